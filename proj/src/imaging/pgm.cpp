#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "livediff/error.hpp"
#include "livediff/image.hpp"

namespace livediff::imaging {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number() {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 30)) throw Error(ErrorKind::MalformedFile, "PGM header value too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(ErrorKind::MalformedFile, "PGM header expects a number");
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size()) throw Error(ErrorKind::MalformedFile, "PGM header truncated");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw Error(ErrorKind::MalformedFile, "not a PGM file");
  if (bytes[1] != '5') {
    throw Error(ErrorKind::UnsupportedFormat, std::string("netpbm variant P") +
                                                  static_cast<char>(bytes[1]) + " (only P5)");
  }
  HeaderReader hdr(bytes);
  hdr.advance(2);
  const auto width = hdr.number();
  const auto height = hdr.number();
  const auto maxval = hdr.number();
  hdr.single_space();
  if (width == 0 || height == 0) throw Error(ErrorKind::MalformedFile, "PGM has zero size");
  if (maxval == 0 || maxval > 65535) throw Error(ErrorKind::MalformedFile, "PGM maxval out of range");

  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  const std::size_t count = width * height;
  if (bytes.size() - hdr.pos() < count * bytes_per) {
    throw Error(ErrorKind::MalformedFile, "PGM raster truncated");
  }
  const auto* raster = bytes.data() + hdr.pos();
  std::vector<double> pixels(count);
  const double scale = 255.0 / static_cast<double>(maxval);
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t code = bytes_per == 1
                           ? raster[k]
                           : (static_cast<std::size_t>(raster[2 * k]) << 8) | raster[2 * k + 1];
    if (code > maxval) throw Error(ErrorKind::MalformedFile, "PGM sample exceeds maxval");
    pixels[k] = maxval == 255 ? static_cast<double>(code) : static_cast<double>(code) * scale;
  }
  return GrayImage(width, height, std::move(pixels));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img, PgmDepth depth) {
  const std::size_t maxval = depth == PgmDepth::Bits8 ? 255 : 65535;
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" + std::to_string(maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.size() * (depth == PgmDepth::Bits8 ? 1 : 2));
  for (const double v : img.pixels()) {
    const double clamped = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 255.0);
    if (depth == PgmDepth::Bits8) {
      out.push_back(static_cast<std::uint8_t>(std::lround(clamped)));
    } else {
      const auto code = static_cast<std::uint16_t>(std::lround(clamped * 65535.0 / 255.0));
      out.push_back(static_cast<std::uint8_t>(code >> 8));
      out.push_back(static_cast<std::uint8_t>(code & 0xff));
    }
  }
  return out;
}

}  // namespace livediff::imaging
