#include <algorithm>
#include <cmath>

#include "livediff/error.hpp"
#include "livediff/image.hpp"

namespace livediff::imaging {

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

// Pixel centres are aligned: output x maps to (x + 0.5) * in / out - 0.5.
std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> result(out);
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t x = 0; x < out; ++x) {
    double src = (static_cast<double>(x) + 0.5) * ratio - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(src));
    result[x] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
  }
  return result;
}

}  // namespace

GrayImage resize(const GrayImage& img, std::size_t out_w, std::size_t out_h) {
  if (out_w < kMinStencilSide || out_h < kMinStencilSide) {
    throw Error(ErrorKind::InvalidDimensions,
                "resize target " + std::to_string(out_w) + "x" + std::to_string(out_h));
  }
  if (img.empty()) throw Error(ErrorKind::InvalidDimensions, "resize of an empty image");
  if (out_w == img.width() && out_h == img.height()) return img;

  const auto xs = taps(img.width(), out_w);
  const auto ys = taps(img.height(), out_h);
  GrayImage out(out_w, out_h);
  for (std::size_t y = 0; y < out_h; ++y) {
    const auto top = img.row(ys[y].lo);
    const auto bottom = img.row(ys[y].hi);
    const double fy = ys[y].frac;
    auto dst = out.row(y);
    for (std::size_t x = 0; x < out_w; ++x) {
      const auto& t = xs[x];
      const double upper = (1.0 - t.frac) * top[t.lo] + t.frac * top[t.hi];
      const double lower = (1.0 - t.frac) * bottom[t.lo] + t.frac * bottom[t.hi];
      dst[x] = (1.0 - fy) * upper + fy * lower;
    }
  }
  return out;
}

}  // namespace livediff::imaging
