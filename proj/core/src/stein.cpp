#include "binshrink/stein.hpp"

#include <cmath>
#include <sstream>

#include "binshrink/kahan.hpp"

namespace binshrink {

namespace {

void check_table(const OutcomeTable& h) {
  if (h.n < 1 || h.n > kMaxTrials)
    throw DataError("OutcomeTable: trial count out of supported range");
  if (static_cast<int>(h.values.size()) != h.n + 1)
    throw DataError("OutcomeTable: table length must be n + 1");
}

void check_outcome(const OutcomeTable& h, int y) {
  if (y < 0 || y > h.n) {
    std::ostringstream msg;
    msg << "outcome " << y << " outside {0, ..., " << h.n << "}";
    throw DataError(msg.str());
  }
}

}  // namespace

double alt_coefficient(int n, int y, int j) {
  if (j < 0 || j > n - y || y < 0)
    throw DataError("alt_coefficient: need 0 <= j <= n - y");
  double c = 1.0;
  for (int k = 1; k <= j; ++k)
    c *= static_cast<double>(n - y - k + 1) / static_cast<double>(y + k);
  return c;
}

double t1(const OutcomeTable& h, int y) {
  check_table(h);
  check_outcome(h, y);
  if (y == 0) return 0.0;
  const int n = h.n;
  KahanSum sum;
  double coef = 1.0;  // alt_coefficient(n, y, j), updated multiplicatively
  double sign = 1.0;
  for (int j = 0; j <= n - y; ++j) {
    sum.add(sign * coef * h(y + j));
    coef *= static_cast<double>(n - y - j) / static_cast<double>(y + j + 1);
    sign = -sign;
  }
  return sum.value();
}

double t2(const OutcomeTable& h, int y) {
  check_table(h);
  check_outcome(h, y);
  const int n = h.n;
  if (y == n) return h(n);
  KahanSum sum;
  // Descending coefficient y!/(y-j)! * (n-y)!/(n-y+j)! is the ascending one
  // with y mirrored to n - y.
  double coef = 1.0;
  double sign = 1.0;
  for (int j = 0; j <= y; ++j) {
    sum.add(sign * coef * h(y - j));
    coef *= static_cast<double>(y - j) / static_cast<double>(n - y + j + 1);
    sign = -sign;
  }
  return h(y) - sum.value();
}

double delta_h(const OutcomeTable& h) {
  check_table(h);
  KahanSum sum;
  double binom = 1.0;  // C(n, j)
  double sign = 1.0;
  for (int j = 0; j <= h.n; ++j) {
    sum.add(sign * binom * h(j));
    binom *= static_cast<double>(h.n - j) / static_cast<double>(j + 1);
    sign = -sign;
  }
  return sum.value();
}

double t_op(const OutcomeTable& h, int y) {
  return detail::t_op_general(h, y, h.n / 2);
}

namespace detail {

double t_op_general(const OutcomeTable& h, int y, int a) {
  return y > a ? t1(h, y) : t2(h, y);
}

}  // namespace detail

double exact_bias(const OutcomeTable& h, double theta) {
  return exact_bias(h, theta, h.n / 2);
}

double exact_bias(const OutcomeTable& h, double theta, int a) {
  check_table(h);
  if (theta < 0.0 || theta > 1.0)
    throw DataError("exact_bias: theta outside [0,1]");
  if (a < 0 || a > h.n) throw DataError("exact_bias: split point outside {0,...,n}");
  const int n = h.n;

  // Bin(n, theta) pmf by log-space evaluation, exact enough for n <= 1000.
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  for (int y = 0; y <= n; ++y) {
    if (theta == 0.0) {
      pmf[y] = (y == 0) ? 1.0 : 0.0;
      continue;
    }
    if (theta == 1.0) {
      pmf[y] = (y == n) ? 1.0 : 0.0;
      continue;
    }
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(y + 1.0) -
                              std::lgamma(n - y + 1.0);
    pmf[y] = std::exp(log_choose + y * std::log(theta) +
                      (n - y) * std::log1p(-theta));
  }

  KahanSum mean_h;
  KahanSum mean_t;
  for (int y = 0; y <= n; ++y) {
    mean_h.add(pmf[y] * h(y));
    mean_t.add(pmf[y] * detail::t_op_general(h, y, a));
  }
  const double bias = theta * mean_h.value() - mean_t.value();

  const double closed = ((a % 2 == 0) ? 1.0 : -1.0) * std::pow(theta, a + 1) *
                        std::pow(1.0 - theta, n - a) * delta_h(h);
  if (std::fabs(bias - closed) > 1e-12) {
    std::ostringstream msg;
    msg << "exact_bias: enumerated bias " << bias
        << " disagrees with closed form " << closed
        << " (transform implementation bug)";
    throw NumericError(msg.str());
  }
  return bias;
}

}  // namespace binshrink
