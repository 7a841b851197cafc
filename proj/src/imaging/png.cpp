#include <png.h>

#include <csetjmp>
#include <cstring>
#include <string>

#include "livediff/error.hpp"
#include "livediff/image.hpp"

namespace livediff::imaging {

namespace {

struct ReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
  char message[256] = {};
};

void read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* state = static_cast<ReadState*>(png_get_io_ptr(png));
  if (state->bytes.size() - state->pos < length) {
    png_error(png, "unexpected end of data");
  }
  std::memcpy(out, state->bytes.data() + state->pos, length);
  state->pos += length;
}

void on_error(png_structp png, png_const_charp msg) {
  auto* state = static_cast<ReadState*>(png_get_error_ptr(png));
  std::strncpy(state->message, msg, sizeof(state->message) - 1);
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

}  // namespace

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorKind::MalformedFile, "not a PNG file");
  }

  // Everything with a destructor lives above setjmp.
  ReadState state{bytes, 0, {}};
  std::vector<std::uint8_t> raster;
  std::vector<png_bytep> rows;
  std::vector<double> pixels;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int depth = 0;

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, on_error, on_warning);
  if (png == nullptr) throw Error(ErrorKind::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorKind::Io, "png_create_info_struct failed");
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::MalformedFile, std::string("PNG: ") + state.message);
  }

  png_set_read_fn(png, &state, read_from_memory);
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  if ((channels != 1 && channels != 3) || (depth != 8 && depth != 16)) {
    png_error(png, "unsupported channel layout");
  }

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  raster.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = raster.data() + r * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t bytes_per = depth == 16 ? 2 : 1;
  const double scale = depth == 16 ? 255.0 / 65535.0 : 1.0;
  auto sample = [&](std::size_t offset) -> double {
    if (bytes_per == 1) return raster[offset];
    return static_cast<double>((static_cast<unsigned>(raster[offset]) << 8) | raster[offset + 1]);
  };

  pixels.resize(static_cast<std::size_t>(width) * height);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t base = r * row_bytes + c * channels * bytes_per;
      double v;
      if (channels == 1) {
        v = sample(base);
      } else {
        v = kLumaR * sample(base) + kLumaG * sample(base + bytes_per) +
            kLumaB * sample(base + 2 * bytes_per);
      }
      pixels[r * width + c] = depth == 16 ? v * scale : v;
    }
  }
  return GrayImage(width, height, std::move(pixels));
}

}  // namespace livediff::imaging
