#pragma once

// Minimal libpng writer for building decode fixtures.

#include <png.h>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fixture {

/// `samples` holds width*height*channels values in [0, 2^depth). depth is 8 or 16.
inline std::vector<std::uint8_t> encode_png(unsigned width, unsigned height, int color_type, int depth,
                                            const std::vector<unsigned>& samples) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png write failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        buf->insert(buf->end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, width, height, depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_GRAY ? 1
                       : color_type == PNG_COLOR_TYPE_GRAY_ALPHA ? 2
                       : color_type == PNG_COLOR_TYPE_RGB ? 3 : 4;
  const std::size_t per_row = static_cast<std::size_t>(width) * channels;
  std::vector<std::uint8_t> row(per_row * (depth / 8));
  for (unsigned r = 0; r < height; ++r) {
    for (std::size_t k = 0; k < per_row; ++k) {
      const unsigned v = samples[r * per_row + k];
      if (depth == 8) {
        row[k] = static_cast<std::uint8_t>(v);
      } else {
        row[2 * k] = static_cast<std::uint8_t>(v >> 8);
        row[2 * k + 1] = static_cast<std::uint8_t>(v & 0xff);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace fixture
