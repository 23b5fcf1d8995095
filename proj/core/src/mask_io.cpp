#include "puma/mask_io.hpp"

#include <csetjmp>
#include <cstring>
#include <fstream>

#include <png.h>

#include "puma/error.hpp"

namespace puma {

namespace {

struct ReadState {
  const std::string* bytes;
  std::size_t pos;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* state = static_cast<ReadState*>(png_get_io_ptr(png));
  if (state->pos + length > state->bytes->size())
    png_error(png, "unexpected end of stream");
  std::memcpy(out, state->bytes->data() + state->pos, length);
  state->pos += length;
}

void write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void flush_callback(png_structp) {}

void quiet_warning(png_structp, png_const_charp) {}

// Cosmetic palette: a fixed wheel for the first indices, gray ramp beyond.
// Index 0 is black; only the index values are meaningful.
void fill_palette(png_color* palette) {
  static const png_color wheel[16] = {
      {0, 0, 0},       {230, 25, 75},   {60, 180, 75},   {255, 225, 25},
      {0, 130, 200},   {245, 130, 48},  {145, 30, 180},  {70, 240, 240},
      {240, 50, 230},  {210, 245, 60},  {250, 190, 190}, {0, 128, 128},
      {170, 110, 40},  {128, 0, 0},     {170, 255, 195}, {128, 128, 0},
  };
  for (int i = 0; i < 256; ++i) {
    if (i < 16) {
      palette[i] = wheel[i];
    } else {
      const auto g = static_cast<png_byte>(i);
      palette[i] = png_color{g, g, g};
    }
  }
}

}  // namespace

LabelMask read_mask(const std::string& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0)
    fail(errc::unsupported_image_format, "not a PNG stream");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(errc::io_error, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(errc::io_error, "png_create_info_struct failed");
  }
  png_set_error_fn(png, png_get_error_ptr(png), nullptr, quiet_warning);

  ReadState state{&bytes, 0};
  LabelMask mask;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(errc::unsupported_image_format, "corrupt or truncated PNG stream");
  }

  png_set_read_fn(png, &state, read_callback);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (bit_depth > 8 ||
      (color_type != PNG_COLOR_TYPE_PALETTE && color_type != PNG_COLOR_TYPE_GRAY)) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(errc::unsupported_image_format,
         "mask PNGs must be 8-bit indexed-color or grayscale (got color type " +
             std::to_string(color_type) + ", depth " + std::to_string(bit_depth) + ")");
  }
  if (bit_depth < 8) png_set_packing(png);  // one byte per pixel, index preserved

  mask.width = static_cast<int>(width);
  mask.height = static_cast<int>(height);
  mask.data.assign(static_cast<std::size_t>(width) * height, 0);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y)
    rows[y] = mask.data.data() + static_cast<std::size_t>(y) * width;

  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return mask;
}

std::string write_mask(const LabelMask& mask) {
  if (mask.width <= 0 || mask.height <= 0 ||
      mask.data.size() != static_cast<std::size_t>(mask.width) * mask.height)
    fail(errc::dimension_mismatch, "write_mask: inconsistent mask dimensions");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(errc::io_error, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(errc::io_error, "png_create_info_struct failed");
  }

  std::string out;
  std::vector<png_bytep> rows(static_cast<std::size_t>(mask.height));
  png_color palette[256];
  fill_palette(palette);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(errc::io_error, "PNG encode failed");
  }

  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(mask.width),
               static_cast<png_uint_32>(mask.height), 8, PNG_COLOR_TYPE_PALETTE,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_PLTE(png, info, palette, 256);
  png_write_info(png, info);

  for (int y = 0; y < mask.height; ++y)
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(mask.data.data() + static_cast<std::size_t>(y) * mask.width);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

LabelMask read_mask_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_mask(bytes);
}

void write_mask_file(const LabelMask& mask, const std::filesystem::path& path) {
  const std::string bytes = write_mask(mask);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io_error, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(errc::io_error, "short write to " + path.string());
}

}  // namespace puma
