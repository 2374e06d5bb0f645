#pragma once

// Grayscale PNG rasters: 8-bit class maps, 16-bit instance ids, 1-bit masks.

#include "panoscene/core.hpp"

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

namespace panoscene::io {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngMessage {
  char text[256] = {0};
};

inline void png_error_handler(png_structp png, png_const_charp msg) {
  auto* m = static_cast<PngMessage*>(png_get_error_ptr(png));
  if (m) std::snprintf(m->text, sizeof m->text, "%s", msg);
  png_longjmp(png, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

struct RawImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 8;  // 8 or 16 after unpacking
  std::vector<std::uint8_t> bytes;
};

/// Decodes a grayscale PNG; sub-byte depths unpack to one byte per pixel
/// without rescaling, 16-bit samples come out in host order.
inline RawImage read_gray(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw Error(ErrorCode::IoError, "'" + path + "' is not a PNG file");

  PngMessage msg;
  RawImage img;
  std::vector<png_bytep> rows;
  std::string problem;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &msg, png_error_handler, png_warning_handler);
  if (!png) throw Error(ErrorCode::IoError, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "'" + path + "': " + msg.text);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    problem = "expected a single-channel grayscale PNG";
  } else if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
    problem = "interlaced PNGs are not supported";
  } else {
    if (depth < 8) png_set_packing(png);
    if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
    png_read_update_info(png, info);
    img.width = png_get_image_width(png, info);
    img.height = png_get_image_height(png, info);
    img.bit_depth = depth == 16 ? 16 : 8;
    const std::size_t stride = png_get_rowbytes(png, info);
    img.bytes.resize(stride * img.height);
    rows.resize(img.height);
    for (std::uint32_t r = 0; r < img.height; ++r) rows[r] = img.bytes.data() + r * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!problem.empty()) throw Error(ErrorCode::IoError, "'" + path + "': " + problem);
  return img;
}

inline void write_gray(const std::string& path, std::uint32_t width, std::uint32_t height, int bit_depth,
                       const std::vector<std::uint8_t>& bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  PngMessage msg;
  const std::size_t stride = bytes.size() / height;
  std::vector<png_bytep> rows(height);
  for (std::uint32_t r = 0; r < height; ++r) rows[r] = const_cast<png_bytep>(bytes.data() + r * stride);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &msg, png_error_handler, png_warning_handler);
  if (!png) throw Error(ErrorCode::IoError, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "'" + path + "': " + msg.text);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth < 8) png_set_packing(png);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

/// 8-bit label map.
inline void write_png(const std::string& path, const EquirectGrid<std::uint8_t>& grid) {
  if (grid.channels() != 1) throw Error(ErrorCode::ShapeMismatch, "PNG output needs a single channel");
  detail::write_gray(path, grid.width(), grid.height(), 8, grid.data());
}

/// 16-bit id map.
inline void write_png(const std::string& path, const EquirectGrid<std::uint16_t>& grid) {
  if (grid.channels() != 1) throw Error(ErrorCode::ShapeMismatch, "PNG output needs a single channel");
  std::vector<std::uint8_t> bytes(grid.data().size() * 2);
  std::memcpy(bytes.data(), grid.data().data(), bytes.size());
  detail::write_gray(path, grid.width(), grid.height(), 16, bytes);
}

/// 1-bit mask; any nonzero value is written as 1.
inline void write_mask_png(const std::string& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> bytes(mask.data().size());
  for (std::size_t k = 0; k < bytes.size(); ++k) bytes[k] = mask.data()[k] ? 1 : 0;
  detail::write_gray(path, mask.width(), mask.height(), 1, bytes);
}

/// Label map from a 1-, 2-, 4- or 8-bit grayscale PNG, values kept as stored.
inline EquirectGrid<std::uint8_t> read_png_u8(const std::string& path) {
  detail::RawImage img = detail::read_gray(path);
  if (img.bit_depth != 8) throw Error(ErrorCode::IoError, "'" + path + "' holds 16-bit samples");
  EquirectGrid<std::uint8_t> out(static_cast<int>(img.width), static_cast<int>(img.height));
  out.data() = std::move(img.bytes);
  return out;
}

/// Id map from an 8- or 16-bit grayscale PNG.
inline EquirectGrid<std::uint16_t> read_png_u16(const std::string& path) {
  const detail::RawImage img = detail::read_gray(path);
  EquirectGrid<std::uint16_t> out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (img.bit_depth == 16)
    std::memcpy(out.data().data(), img.bytes.data(), img.bytes.size());
  else
    for (std::size_t k = 0; k < img.bytes.size(); ++k) out.data()[k] = img.bytes[k];
  return out;
}

/// Mask from any grayscale PNG; nonzero samples become 1.
inline BinaryMask read_mask_png(const std::string& path) {
  const detail::RawImage img = detail::read_gray(path);
  BinaryMask out(static_cast<int>(img.width), static_cast<int>(img.height));
  const std::size_t step = img.bit_depth == 16 ? 2 : 1;
  for (std::size_t k = 0; k < out.data().size(); ++k) {
    bool on = img.bytes[k * step] != 0;
    if (step == 2) on = on || img.bytes[k * step + 1] != 0;
    out.data()[k] = on ? 1 : 0;
  }
  return out;
}

}  // namespace panoscene::io
