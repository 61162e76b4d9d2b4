#include "journeybench/affine.hpp"

#include <cmath>

namespace jb {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

AffineTransform compose(const AffineTransform& t2, const AffineTransform& t1) {
  AffineTransform out;
  out.rotation_deg = t1.rotation_deg + t2.rotation_deg;
  out.scale = t1.scale * t2.scale;
  double r2 = t2.rotation_deg * kPi / 180.0;
  double c = std::cos(r2), s = std::sin(r2);
  out.tx = t2.scale * (c * t1.tx - s * t1.ty) + t2.tx;
  out.ty = t2.scale * (s * t1.tx + c * t1.ty) + t2.ty;
  return out;
}

AffineTransform invert(const AffineTransform& t) {
  require(t.scale > 0.0, ErrorKind::InvalidArgument, "scale must be positive");
  AffineTransform out;
  out.rotation_deg = -t.rotation_deg;
  out.scale = 1.0 / t.scale;
  double r = -t.rotation_deg * kPi / 180.0;
  double c = std::cos(r), s = std::sin(r);
  out.tx = -(c * t.tx - s * t.ty) / t.scale;
  out.ty = -(s * t.tx + c * t.ty) / t.scale;
  return out;
}

Image apply_affine(const Image& img, const AffineTransform& t) {
  require(t.scale > 0.0, ErrorKind::InvalidArgument, "scale must be positive");
  Image out(img.width, img.height);
  const double cx = (img.width - 1) * 0.5;
  const double cy = (img.height - 1) * 0.5;
  // Inverse map: for each output pixel, sample T^{-1}(p) in the input.
  const double r = t.rotation_deg * kPi / 180.0;
  const double c = std::cos(r), s = std::sin(r);
  const double inv_scale = 1.0 / t.scale;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double px = x - cx - t.tx;
      double py = y - cy - t.ty;
      double sx = inv_scale * (c * px + s * py) + cx;
      double sy = inv_scale * (-s * px + c * py) + cy;
      int ix = int(std::floor(sx)), iy = int(std::floor(sy));
      double fx = sx - ix, fy = sy - iy;
      auto sample = [&](int gx, int gy) -> double {
        if (gx < 0 || gy < 0 || gx >= img.width || gy >= img.height) return kBackgroundFill;
        return img.at(gx, gy);
      };
      double v = (1 - fx) * (1 - fy) * sample(ix, iy) + fx * (1 - fy) * sample(ix + 1, iy) +
                 (1 - fx) * fy * sample(ix, iy + 1) + fx * fy * sample(ix + 1, iy + 1);
      out.at(x, y) = float(v);
    }
  }
  return out;
}

}  // namespace jb
