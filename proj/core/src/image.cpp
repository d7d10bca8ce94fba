// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace licq {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Tensor from_rgb8(const std::vector<unsigned char>& rgb, int64_t h, int64_t w, int channels) {
  Tensor img({3, h, w});
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x) {
      const unsigned char* px = rgb.data() + (y * w + x) * channels;
      for (int64_t c = 0; c < 3; ++c) {
        const unsigned char v = channels == 1 ? px[0] : px[c];
        img.data()[(c * h + y) * w + x] = static_cast<double>(v) / 255.0;
      }
    }
  return img;
}

Tensor load_ppm(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open image: " + path);
  char magic[3] = {0, 0, 0};
  if (std::fscanf(f.get(), "%2s", magic) != 1 || std::strcmp(magic, "P6") != 0)
    throw std::runtime_error("not a P6 PPM: " + path);
  int w = 0, h = 0, maxval = 0;
  // Skip whitespace and comments between header fields.
  auto read_int = [&](int& out) {
    int c;
    do {
      c = std::fgetc(f.get());
      if (c == '#')
        while (c != '\n' && c != EOF) c = std::fgetc(f.get());
    } while (c == ' ' || c == '\t' || c == '\n' || c == '\r');
    std::ungetc(c, f.get());
    if (std::fscanf(f.get(), "%d", &out) != 1) throw std::runtime_error("bad PPM header: " + path);
  };
  read_int(w);
  read_int(h);
  read_int(maxval);
  if (w <= 0 || h <= 0 || maxval != 255) throw std::runtime_error("unsupported PPM: " + path);
  std::fgetc(f.get());  // single whitespace after maxval
  std::vector<unsigned char> rgb(static_cast<size_t>(w) * h * 3);
  if (std::fread(rgb.data(), 1, rgb.size(), f.get()) != rgb.size())
    throw std::runtime_error("truncated PPM: " + path);
  return from_rgb8(rgb, h, w, 3);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Tensor load_image(const std::string& path) {
  if (has_suffix(path, ".ppm")) return load_ppm(path);

  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open image: " + path);
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw std::runtime_error("not a PNG: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png alloc failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png alloc failure");
  }
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png decode error: " + path);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  pixels.resize(static_cast<size_t>(w) * h * 3);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  return from_rgb8(pixels, h, w, 3);
}

namespace {

std::vector<unsigned char> to_rgb8(const Tensor& image) {
  if (image.ndim() != 3 || image.dim(0) != 3)
    throw std::invalid_argument("save_image: expected (3,H,W) tensor");
  const int64_t h = image.dim(1), w = image.dim(2);
  std::vector<unsigned char> rgb(static_cast<size_t>(h) * w * 3);
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x)
      for (int64_t c = 0; c < 3; ++c) {
        double v = image.data()[(c * h + y) * w + x];
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        rgb[(static_cast<size_t>(y) * w + x) * 3 + c] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
  return rgb;
}

}  // namespace

void save_image_png(const std::string& path, const Tensor& image) {
  auto rgb = to_rgb8(image);
  const int64_t h = image.dim(1), w = image.dim(2);
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot write image: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png alloc failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png alloc failure");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png encode error: " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (int64_t y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = rgb.data() + y * w * 3;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_image_ppm(const std::string& path, const Tensor& image) {
  auto rgb = to_rgb8(image);
  const int64_t h = image.dim(1), w = image.dim(2);
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot write image: " + path);
  std::fprintf(f.get(), "P6\n%lld %lld\n255\n", static_cast<long long>(w),
               static_cast<long long>(h));
  if (std::fwrite(rgb.data(), 1, rgb.size(), f.get()) != rgb.size())
    throw std::runtime_error("short write: " + path);
}

Tensor pad_to_multiple_reflect(const Tensor& image, int multiple) {
  if (image.ndim() != 3) throw std::invalid_argument("pad: expected (C,H,W)");
  const int64_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const int64_t ph = (h + multiple - 1) / multiple * multiple;
  const int64_t pw = (w + multiple - 1) / multiple * multiple;
  if (ph == h && pw == w) return image;
  Tensor out({c, ph, pw});
  auto mirror = [](int64_t i, int64_t n) {
    if (i < n) return i;
    int64_t m = 2 * n - 2 - i;  // reflect about the last sample
    if (m < 0) m = n - 1;       // degenerate: clamp for very skinny images
    return m;
  };
  for (int64_t ic = 0; ic < c; ++ic)
    for (int64_t y = 0; y < ph; ++y) {
      const int64_t sy = mirror(y, h);
      for (int64_t x = 0; x < pw; ++x)
        out.data()[(ic * ph + y) * pw + x] = image.data()[(ic * h + sy) * w + mirror(x, w)];
    }
  return out;
}

Tensor center_crop(const Tensor& image, int64_t h, int64_t w) {
  if (image.ndim() != 3) throw std::invalid_argument("center_crop: expected (C,H,W)");
  const int64_t c = image.dim(0), ih = image.dim(1), iw = image.dim(2);
  if (h > ih || w > iw) throw std::invalid_argument("center_crop: target larger than image");
  const int64_t oy = (ih - h) / 2, ox = (iw - w) / 2;
  Tensor out({c, h, w});
  for (int64_t ic = 0; ic < c; ++ic)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x)
        out.data()[(ic * h + y) * w + x] = image.data()[(ic * ih + oy + y) * iw + ox + x];
  return out;
}

}  // namespace licq
