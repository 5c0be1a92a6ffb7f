#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "binshrink/types.hpp"

namespace binshrink {

// Deterministic counter-style generator (SplitMix64 output function over an
// incrementing state). A stream is addressed by (seed, label, index): the same
// triple always produces the same draw sequence, on any platform and under any
// thread schedule. Labels name tasks ("folds", "bootstrap", ...), the index
// addresses the replicate or unit.
class RngStream {
 public:
  RngStream(RngSeed seed, std::string_view label, std::uint64_t index = 0);

  std::uint64_t next_u64();

  // Uniform on [0,1), 53-bit resolution.
  double uniform();

  // Uniform on (0,1): never exactly zero, safe under log().
  double uniform_open();

  // Unbiased integer in [0, bound), bound >= 1, by rejection.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal();

  // Exact inverse-CDF binomial draw; n >= 0, p in [0,1].
  int binomial(int n, double p);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace binshrink
