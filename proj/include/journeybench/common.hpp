#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace jb {

// Error taxonomy shared by every module. Callers catch JbError and branch
// on kind(); message() carries the context.
enum class ErrorKind {
  InvalidArgument,
  ExtractionFailure,
  SegmentationFailure,
  ManifestCorrupt,
  ResolutionMismatch,
  MissingPrerequisite,
  ConfigHashMismatch,
  ProviderUnavailable,
  ProviderProtocolError,
  ProviderEmpty,
  UndefinedMetric,
  LeakageError,
  IoError,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ExtractionFailure: return "extraction-failure";
    case ErrorKind::SegmentationFailure: return "segmentation-failure";
    case ErrorKind::ManifestCorrupt: return "manifest-corrupt";
    case ErrorKind::ResolutionMismatch: return "resolution-mismatch";
    case ErrorKind::MissingPrerequisite: return "missing-prerequisite";
    case ErrorKind::ConfigHashMismatch: return "config-hash-mismatch";
    case ErrorKind::ProviderUnavailable: return "provider-unavailable";
    case ErrorKind::ProviderProtocolError: return "provider-protocol-error";
    case ErrorKind::ProviderEmpty: return "provider-empty";
    case ErrorKind::UndefinedMetric: return "undefined-metric";
    case ErrorKind::LeakageError: return "leakage-error";
    case ErrorKind::IoError: return "io-error";
  }
  return "unknown";
}

class JbError : public std::runtime_error {
 public:
  JbError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw JbError(kind, message);
}

inline void require(bool cond, ErrorKind kind, const std::string& message) {
  if (!cond) fail(kind, message);
}

// FNV-1a, the stable 64-bit hash used for split assignment and config
// fingerprints. Stable across platforms and runs by construction.
inline uint64_t fnv1a64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull) {
  uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  // splitmix64-style mixing of two hashes.
  uint64_t x = a + 0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

inline std::string hex64(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

template <typename T>
inline T clamp01(T v) {
  return v < T(0) ? T(0) : (v > T(1) ? T(1) : v);
}

}  // namespace jb
