#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "journeybench/common.hpp"

namespace jb {

// Single-channel image, intensities in [0,1], row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> pix;

  Image() = default;
  Image(int w, int h, float fill = 0.0f) : width(w), height(h), pix(size_t(w) * h, fill) {}

  float& at(int x, int y) { return pix[size_t(y) * width + x]; }
  float at(int x, int y) const { return pix[size_t(y) * width + x]; }

  bool same_shape(const Image& o) const { return width == o.width && height == o.height; }

  // Snap every pixel to the 8-bit grid (what PNG storage will hold), so
  // in-memory images round-trip bit-exactly through the manifest.
  void snap_to_u8();
};

// Nearest-of-255 quantization used for PNG storage.
inline uint8_t to_u8(float v) {
  float c = clamp01(v);
  int q = int(c * 255.0f + 0.5f);
  return uint8_t(q > 255 ? 255 : q);
}

// 8-bit grayscale PNG codec (zlib-backed). write_png emits filter-0 rows;
// read_png handles all five standard filters.
void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);

// 2x2 box downsample; odd trailing row/col averaged over the available pixels.
Image downsample2x(const Image& img);

Image hflip(const Image& img);

// Crop the axis-aligned window [x0,y0]..[x0+cw,y0+ch) and bilinearly resize
// back to the source dimensions.
Image crop_resize(const Image& img, double x0, double y0, double cw, double ch);

double mean_abs_diff(const Image& a, const Image& b);
double max_abs_diff(const Image& a, const Image& b);
double psnr(const Image& a, const Image& b);

}  // namespace jb
