#include "livediff/image.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>

#include "livediff/error.hpp"

namespace livediff {

GrayImage::GrayImage(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), pixels_(width * height, fill) {}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != width_ * height_) {
    throw Error(ErrorKind::InvalidDimensions,
                "pixel count " + std::to_string(pixels_.size()) + " != " + std::to_string(width_) +
                    "x" + std::to_string(height_));
  }
}

double GrayImage::sum() const noexcept {
  return std::accumulate(pixels_.begin(), pixels_.end(), 0.0);
}

const char* to_string(Label label) noexcept { return label == Label::Live ? "live" : "fake"; }

Label parse_label(const std::string& text) {
  if (text == "live") return Label::Live;
  if (text == "fake") return Label::Fake;
  throw Error(ErrorKind::ParseError, "unknown label '" + text + "'");
}

void validate_clip(const Clip& clip) {
  if (clip.frames.empty()) {
    throw Error(ErrorKind::InvalidDimensions, "clip '" + clip.source_id + "' has no frames");
  }
  const auto w = clip.frames.front().width();
  const auto h = clip.frames.front().height();
  for (const auto& f : clip.frames) {
    if (f.width() != w || f.height() != h) {
      throw Error(ErrorKind::InvalidDimensions,
                  "clip '" + clip.source_id + "' mixes frame sizes");
    }
  }
}

void require_stencil_size(const GrayImage& img) {
  if (img.width() < kMinStencilSide || img.height() < kMinStencilSide) {
    throw Error(ErrorKind::InvalidDimensions,
                "image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " is smaller than 3x3");
  }
}

namespace imaging {

namespace {
std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}
}  // namespace

ImageFormat parse_format(const std::string& name) {
  const auto n = lower(name);
  if (n == "pgm") return ImageFormat::Pgm;
  if (n == "png") return ImageFormat::Png;
  throw Error(ErrorKind::UnsupportedFormat, "format '" + name + "'");
}

ImageFormat format_from_path(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  if (!ext.empty() && ext.front() == '.') ext.erase(0, 1);
  return parse_format(ext);
}

GrayImage decode_image(std::span<const std::uint8_t> bytes, ImageFormat format) {
  switch (format) {
    case ImageFormat::Pgm: return decode_pgm(bytes);
    case ImageFormat::Png: return decode_png(bytes);
  }
  throw Error(ErrorKind::UnsupportedFormat, "unknown image format");
}

GrayImage read_image(const std::string& path) {
  const auto format = format_from_path(path);
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes, format);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void write_pgm(const std::string& path, const GrayImage& img, PgmDepth depth) {
  write_file_atomic(path, encode_pgm(img, depth));
}

}  // namespace imaging

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorKind::Io, "rename to " + path + ": " + ec.message());
}

void write_file_atomic(const std::string& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace livediff
