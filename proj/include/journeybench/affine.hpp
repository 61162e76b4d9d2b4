#pragma once

#include "journeybench/image.hpp"

namespace jb {

// Rigid + isotropic-scale transform about the image center. Maps input
// coordinates p (relative to center, pixels) to output coordinates
// T(p) = scale * R(rotation) * p + (tx, ty); apply_affine resamples the
// warped content accordingly.
struct AffineTransform {
  double rotation_deg = 0.0;
  double tx = 0.0;  // pixels
  double ty = 0.0;  // pixels
  double scale = 1.0;

  static AffineTransform identity() { return {}; }

  bool is_identity(double eps = 0.0) const {
    return std::abs(rotation_deg) <= eps && std::abs(tx) <= eps && std::abs(ty) <= eps &&
           std::abs(scale - 1.0) <= eps;
  }
};

// t2 ∘ t1 (apply t1 first).
AffineTransform compose(const AffineTransform& t2, const AffineTransform& t1);

AffineTransform invert(const AffineTransform& t);

// Bilinear resampling about the image center; out-of-bounds samples take the
// renderer background value.
constexpr float kBackgroundFill = 0.05f;
Image apply_affine(const Image& img, const AffineTransform& t);

}  // namespace jb
