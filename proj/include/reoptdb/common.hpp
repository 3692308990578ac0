#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace reoptdb {

// All table values are 64-bit signed integers.
using Value = std::int64_t;

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad command-line usage or malformed user input.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

// A condition the theory says cannot happen did happen (e.g. the
// re-optimization loop hit its iteration safety valve).
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& msg) : Error(msg) {}
};

// An estimator asked for a sample table with no rows; callers fall back to
// histogram estimates.
class EmptySampleError : public Error {
 public:
  explicit EmptySampleError(const std::string& msg) : Error(msg) {}
};

namespace detail {

// splitmix64 finalizer. Used both to derive child seeds and to hash
// (seed, row index) pairs into uniform 64-bit values.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ (index + 0x9e3779b97f4a7c15ULL));
}

// Top 53 bits, mapped to [0, 1).
inline double to_unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// FNV-1a 64-bit over a byte string; used for catalog file checksums.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Small deterministic PRNG (xorshift-multiply over a splitmix-seeded state).
// The standard <random> engines are avoided for anything whose exact output
// is part of a reproducibility contract, since distributions are not
// portable across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(detail::mix64(seed)) {
    if (state_ == 0) state_ = 0x9e3779b97f4a7c15ULL;
  }

  std::uint64_t next_u64() {
    std::uint64_t x = state_;
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    state_ = x;
    return detail::mix64(x);
  }

  // Uniform in [0, n) via the multiply-shift reduction.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double uniform01() { return detail::to_unit_double(next_u64()); }

  // Independent generator for a named subtask.
  Rng derive(std::uint64_t salt) const {
    return Rng(detail::mix64(state_, salt));
  }

 private:
  std::uint64_t state_;
};

}  // namespace reoptdb
