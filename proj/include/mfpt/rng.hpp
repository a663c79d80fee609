#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mfpt {

// Counter-based stream generator. Each stream is identified by
// (seed, stream id); outputs are a pure function of (key, counter), so
// replicas can be assigned to workers in any order without affecting the
// values drawn.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed) ^ mix(stream ^ 0x6a09e667f3bcc909ULL))) {}

  std::uint64_t next_u64() {
    return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Index into a cumulative probability table (inverse cdf draw).
  std::size_t categorical(const std::vector<double>& cumulative) {
    double u = uniform();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (u < cumulative[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mfpt
