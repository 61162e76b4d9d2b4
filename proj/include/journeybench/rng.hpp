#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "journeybench/common.hpp"

namespace jb {

// Deterministic RNG with a platform-independent stream (splitmix64 core),
// so frozen test values and manifests reproduce everywhere. Not for
// cryptography.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // Decorrelate trivially related seeds.
    next_u64();
    next_u64();
  }

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  int range_int(int lo, int hi) {  // inclusive bounds
    return lo + int(below(uint64_t(hi - lo + 1)));
  }

  // Standard normal via Box-Muller; caches the second draw.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index drawn from explicit probabilities (assumed to sum to ~1).
  int pick(const std::vector<double>& probs) {
    double r = uniform(), c = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
      c += probs[i];
      if (r < c) return int(i);
    }
    return int(probs.size()) - 1;
  }

  // Fisher-Yates; deterministic given the stream position.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = size_t(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent child stream, e.g. child_seed(seed, "patient", 17).
  static uint64_t child_seed(uint64_t seed, std::string_view tag, uint64_t index = 0) {
    return hash_combine(hash_combine(seed, fnv1a64(tag)), index);
  }

 private:
  uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace jb
