#pragma once

// Counter-based deterministic generator (splitmix64 of seed || counter).
// Streams are reproducible from the (seed, counter) pair recorded in run
// summaries regardless of call interleaving.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "hfb/grid.hpp"

namespace hfb {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), counter_(stream << 32) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (++counter_);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() {  // in [0,1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  cdouble cnormal() { return {normal(), normal()}; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

// Random smooth field: low frequency modes with spectral decay, unit L2 norm.
Field random_smooth_field(const Grid& g, CounterRng& rng, double decay = 2.0);

// Random smooth kernel with the requested symmetry, unit L2(dx dy) norm.
Kernel random_smooth_kernel(const Grid& g, CounterRng& rng, Symmetry tag,
                            double decay = 2.0);

}  // namespace hfb
