#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace livediff {

/// Single-channel intensity raster, row-major. Decoded images hold values in
/// [0, 255]; diffusion intermediates are stored as-is without clamping.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, double fill = 0.0);
  GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  double& at(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }

  std::span<double> row(std::size_t r) { return {pixels_.data() + r * width_, width_}; }
  std::span<const double> row(std::size_t r) const { return {pixels_.data() + r * width_, width_}; }

  std::span<double> pixels() noexcept { return pixels_; }
  std::span<const double> pixels() const noexcept { return pixels_; }

  double sum() const noexcept;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
};

enum class Label { Live, Fake };

const char* to_string(Label label) noexcept;
Label parse_label(const std::string& text);

/// One sample: an ordered run of equally sized frames. A still image is a
/// one-frame clip.
struct Clip {
  std::vector<GrayImage> frames;
  std::string source_id;
  std::optional<Label> label;

  std::size_t width() const { return frames.empty() ? 0 : frames.front().width(); }
  std::size_t height() const { return frames.empty() ? 0 : frames.front().height(); }
};

/// Throws InvalidDimensions unless the clip is non-empty and all frames
/// share one size.
void validate_clip(const Clip& clip);

/// Smallest raster the 4-neighbour stencil accepts.
inline constexpr std::size_t kMinStencilSide = 3;

void require_stencil_size(const GrayImage& img);

namespace imaging {

enum class ImageFormat { Pgm, Png };

/// Picks the format from a file extension (".pgm", ".png", case-insensitive).
ImageFormat format_from_path(const std::string& path);
ImageFormat parse_format(const std::string& name);

/// Color is reduced with BT.601 luma weights; 16-bit samples are rescaled to
/// [0, 255]; alpha is dropped.
GrayImage decode_image(std::span<const std::uint8_t> bytes, ImageFormat format);

GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage decode_png(std::span<const std::uint8_t> bytes);

enum class PgmDepth { Bits8, Bits16 };

/// Binary P5 output. Values are clamped to [0, 255] and quantized to the
/// nearest code of the chosen depth (maxval 255 or 65535).
std::vector<std::uint8_t> encode_pgm(const GrayImage& img, PgmDepth depth);

GrayImage read_image(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& img, PgmDepth depth);

/// Bilinear resampling with pixel-centre alignment and clamped borders.
GrayImage resize(const GrayImage& img, std::size_t out_w, std::size_t out_h);

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

}  // namespace imaging

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace livediff
