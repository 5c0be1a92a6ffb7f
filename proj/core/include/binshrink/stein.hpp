#pragma once

#include <vector>

#include "binshrink/types.hpp"

namespace binshrink {

// A real-valued function tabulated on the outcome space {0, ..., n} of a
// binomial count.
struct OutcomeTable {
  int n = 0;
  std::vector<double> values;  // length n + 1

  double operator()(int y) const { return values[static_cast<std::size_t>(y)]; }
};

// Maximum supported trial count. The alternating sums are exercised and
// accuracy-tested up to n = 1000; beyond that they still evaluate but the
// 1e-12 tolerances are not guaranteed.
inline constexpr int kMaxTrials = 10000;

// Coefficient of the alternating sums: the running product
//   prod_{k=1..j} (n - y - k + 1) / (y + k),
// i.e. C(n-y, j) / C(y+j, j), evaluated without any factorial. Requires
// 0 <= j <= n - y.
double alt_coefficient(int n, int y, int j);

// Ascending alternating sum over the outcomes above y. Zero at y = 0.
double t1(const OutcomeTable& h, int y);

// h(y) minus the descending alternating sum over the outcomes below y.
// Equals h(n) at y = n.
double t2(const OutcomeTable& h, int y);

// Alternating binomial transform sum_j h(j) (-1)^j C(n,j). Vanishes for any
// polynomial h of degree < n.
double delta_h(const OutcomeTable& h);

// The estimator transform: t1 for counts above n/2, t2 otherwise. Its
// expectation under Bin(n, theta) matches theta * E[h(Y)] up to a bias of at
// most 2^-n * |delta_h|.
double t_op(const OutcomeTable& h, int y);

namespace detail {
// Split point a is exposed only for bias testing; the public transform pins
// a = floor(n/2).
double t_op_general(const OutcomeTable& h, int y, int a);
}  // namespace detail

// Test oracle: computes theta * E[h(Y)] - E[t_op(h, Y)] by exact summation
// over the Bin(n, theta) pmf and checks it against the closed form
// (-1)^(a+1) theta^(a+1) (1-theta)^(n-a) delta_h within 1e-12. A mismatch
// means t1/t2 are broken and raises NumericError.
double exact_bias(const OutcomeTable& h, double theta);
double exact_bias(const OutcomeTable& h, double theta, int a);

}  // namespace binshrink
