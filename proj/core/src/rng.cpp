#include "binshrink/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace binshrink {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

RngStream::RngStream(RngSeed seed, std::string_view label, std::uint64_t index) {
  state_ = mix64(seed.value + kGamma) ^ mix64(fnv1a(label) + 2 * kGamma) ^
           mix64(index + 3 * kGamma);
}

std::uint64_t RngStream::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("RngStream::below: bound must be >= 1");
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % bound;
}

double RngStream::normal() {
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

int RngStream::binomial(int n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0)
    throw std::invalid_argument("RngStream::binomial: need n >= 0 and p in [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - binomial(n, 1.0 - p);

  const double u = uniform();
  // Inverse-CDF walk from k = 0; log-space start guards tiny (1-p)^n.
  double log_pmf = static_cast<double>(n) * std::log1p(-p);
  double pmf = std::exp(log_pmf);
  const double ratio = p / (1.0 - p);
  double cdf = pmf;
  int k = 0;
  while (u > cdf && k < n) {
    pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
    cdf += pmf;
  }
  return k;
}

}  // namespace binshrink
