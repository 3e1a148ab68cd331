#include "histo/error.hpp"
#include "histo/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace histo {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

}  // namespace

RasterImage load_image(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorKind::Io, "cannot open " + path);

  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw Error(ErrorKind::Format, path + " is not a PNG file");
  }

  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                           png_warning_handler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Io, "libpng initialisation failed");
  }

  // Everything libpng-owned lives in these buffers so setjmp does not skip destructors
  // of objects created after it.
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int channels = 0;
  bool bad_format = false;
  std::string format_message;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Format, path + ": " + message);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (bit_depth > 8) {
    bad_format = true;
    format_message = "unsupported bit depth " + std::to_string(bit_depth);
  } else if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    bad_format = true;
    format_message = "alpha channels are not supported";
  }

  if (!bad_format) {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (bad_format) throw Error(ErrorKind::Format, path + ": " + format_message);
  if (channels != 1 && channels != 3) {
    throw Error(ErrorKind::Format, path + ": unsupported channel count " + std::to_string(channels));
  }

  Eigen::ArrayXd data(Eigen::Index(width) * height * channels);
  for (Eigen::Index i = 0; i < data.size(); ++i) data[i] = pixels[std::size_t(i)];
  return RasterImage(int(width), int(height), channels, std::move(data));
}

void save_png(const RasterImage& img, const std::string& path) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(ErrorKind::Channel, "PNG output supports 1 or 3 channels");
  }
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error(ErrorKind::Io, "cannot write " + path);

  std::vector<png_byte> pixels(std::size_t(img.data().size()));
  for (Eigen::Index i = 0; i < img.data().size(); ++i) {
    pixels[std::size_t(i)] = png_byte(std::clamp(std::lround(img.data()[i]), 0L, 255L));
  }
  const std::size_t stride = std::size_t(img.width()) * img.channels();
  std::vector<png_bytep> rows(std::size_t(img.height()));
  for (int y = 0; y < img.height(); ++y) rows[std::size_t(y)] = pixels.data() + y * stride;

  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                            png_warning_handler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, path + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(img.width()), png_uint_32(img.height()), 8,
               img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace histo
