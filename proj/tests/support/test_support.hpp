#pragma once

// Test-only oracles, independent of the library implementation paths they
// check: exact 128-bit rational arithmetic for the alternating-sum
// coefficients, the raw alternating-sum definitions of the linear risk
// coefficients, chi-square tail probabilities, and small dataset builders.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "binshrink/kahan.hpp"
#include "binshrink/quadratic.hpp"
#include "binshrink/rng.hpp"
#include "binshrink/stein.hpp"
#include "binshrink/sure.hpp"
#include "binshrink/types.hpp"

namespace testsupport {

// Exact rational on __int128 with eager reduction; enough headroom for
// binomial coefficients up to n = 60.
struct Rat {
  __int128 num = 0;
  __int128 den = 1;

  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  void reduce() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const __int128 g = gcd128(num, den);
    num /= g;
    den /= g;
  }

  Rat& mul(__int128 p, __int128 q) {  // *= p/q
    num *= p;
    den *= q;
    reduce();
    return *this;
  }

  Rat& add(const Rat& o) {
    num = num * o.den + o.num * den;
    den *= o.den;
    reduce();
    return *this;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// prod_{k=1..j} (n-y-k+1)/(y+k), exactly.
inline Rat alt_coefficient_exact(int n, int y, int j) {
  Rat r;
  r.num = 1;
  r.den = 1;
  for (int k = 1; k <= j; ++k) r.mul(n - y - k + 1, y + k);
  return r;
}

// Upper regularized incomplete gamma Q(a, x), series + continued fraction.
inline double gammq(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammq: bad arguments");
  if (x == 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, return 1 - P.
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Q(a,x) by Lentz continued fraction.
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

// p-value of a chi-square statistic with df degrees of freedom.
inline double chi2_pvalue(double stat, int df) { return gammq(df / 2.0, stat / 2.0); }

// Chi-square goodness of fit against expected probabilities, merging cells
// from both tails until every expected count is >= min_expected.
inline double chi2_gof_pvalue(const std::vector<long long>& observed,
                              const std::vector<double>& prob, double total,
                              double min_expected = 5.0) {
  const std::size_t k = observed.size();
  std::vector<double> exp_count(k);
  std::vector<double> obs(k);
  for (std::size_t i = 0; i < k; ++i) {
    exp_count[i] = prob[i] * total;
    obs[i] = static_cast<double>(observed[i]);
  }
  std::vector<double> merged_exp, merged_obs;
  double acc_e = 0.0, acc_o = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    acc_e += exp_count[i];
    acc_o += obs[i];
    if (acc_e >= min_expected) {
      merged_exp.push_back(acc_e);
      merged_obs.push_back(acc_o);
      acc_e = acc_o = 0.0;
    }
  }
  if (acc_e > 0.0) {
    if (merged_exp.empty()) {
      merged_exp.push_back(acc_e);
      merged_obs.push_back(acc_o);
    } else {
      merged_exp.back() += acc_e;
      merged_obs.back() += acc_o;
    }
  }
  if (merged_exp.size() < 2) return 1.0;
  double stat = 0.0;
  for (std::size_t i = 0; i < merged_exp.size(); ++i) {
    const double d = merged_obs[i] - merged_exp[i];
    stat += d * d / merged_exp[i];
  }
  return chi2_pvalue(stat, static_cast<int>(merged_exp.size()) - 1);
}

inline std::vector<double> binomial_pmf(int n, double theta) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  for (int y = 0; y <= n; ++y) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(y + 1.0) -
                      std::lgamma(n - y + 1.0);
    double lp = lc;
    lp += theta > 0.0 ? y * std::log(theta) : (y == 0 ? 0.0 : -1e308);
    lp += theta < 1.0 ? (n - y) * std::log1p(-theta) : (y == n ? 0.0 : -1e308);
    pmf[static_cast<std::size_t>(y)] = std::exp(lp);
  }
  return pmf;
}

// ---------------------------------------------------------------------------
// Raw alternating-sum definitions of the linear coefficients, the oracle the
// closed forms must reproduce.

inline binshrink::Vec2 raw_linear_coefficient_one(
    const binshrink::OneSampleDataset& data,
    const binshrink::CrossFitPredictions* preds) {
  using binshrink::KahanSum;
  const double gm = binshrink::grand_mean(data);
  const int n_units = data.size();
  auto beta = [&](int i, int y) {
    const auto& u = data.units[static_cast<std::size_t>(i)];
    const double gdev =
        preds ? preds->g_hat[static_cast<std::size_t>(i)] - preds->weighted_mean : 0.0;
    return binshrink::Vec2{static_cast<double>(y) / u.n - gm, gdev};
  };
  KahanSum c0, c1;
  auto accumulate = [&](const binshrink::Vec2& v, double w) {
    c0.add(w * v.v0);
    c1.add(w * v.v1);
  };
  for (int i = 0; i < n_units; ++i) {
    const auto& u = data.units[static_cast<std::size_t>(i)];
    const int a = u.n / 2;
    accumulate(beta(i, u.y), 2.0 * gm);
    if (u.y > a) {
      double sign = 1.0;
      for (int j = 0; j <= u.n - u.y; ++j) {
        const double coef = binshrink::alt_coefficient(u.n, u.y, j);
        accumulate(beta(i, u.y + j), -2.0 * sign * coef);
        sign = -sign;
      }
    } else {
      accumulate(beta(i, u.y), -2.0);
      double sign = 1.0;
      for (int j = 0; j <= u.y; ++j) {
        const double coef = binshrink::alt_coefficient(u.n, u.n - u.y, j);
        accumulate(beta(i, u.y - j), 2.0 * sign * coef);
        sign = -sign;
      }
    }
  }
  return binshrink::Vec2{c0.value() / n_units, c1.value() / n_units};
}

inline binshrink::Vec2 raw_linear_coefficient_two(
    const binshrink::TwoSampleDataset& data,
    const binshrink::CrossFitPredictions* preds1,
    const binshrink::CrossFitPredictions* preds2) {
  using binshrink::KahanSum;
  const binshrink::OneSampleDataset g1 = data.group(1);
  const binshrink::OneSampleDataset g2 = data.group(2);
  const double gm1 = binshrink::grand_mean(g1);
  const double gm2 = binshrink::grand_mean(g2);
  const int n_units = data.size();
  auto beta1 = [&](int i, int y) {
    const auto& u = data.units[static_cast<std::size_t>(i)].group1;
    const double gdev =
        preds1 ? preds1->g_hat[static_cast<std::size_t>(i)] - preds1->weighted_mean : 0.0;
    return binshrink::Vec2{static_cast<double>(y) / u.n - gm1, gdev};
  };
  auto beta2 = [&](int i, int y) {
    const auto& u = data.units[static_cast<std::size_t>(i)].group2;
    const double gdev =
        preds2 ? preds2->g_hat[static_cast<std::size_t>(i)] - preds2->weighted_mean : 0.0;
    return binshrink::Vec2{static_cast<double>(y) / u.n - gm2, gdev};
  };
  KahanSum d0, d1;
  auto accumulate = [&](const binshrink::Vec2& v, double w) {
    d0.add(w * v.v0);
    d1.add(w * v.v1);
  };
  for (int i = 0; i < n_units; ++i) {
    const auto& u1 = data.units[static_cast<std::size_t>(i)].group1;
    const auto& u2 = data.units[static_cast<std::size_t>(i)].group2;
    const binshrink::Vec2 b1 = beta1(i, u1.y);
    const binshrink::Vec2 b2 = beta2(i, u2.y);
    accumulate(b1 - b2, 2.0 * (gm1 - gm2));

    const int a1 = u1.n / 2;
    if (u1.y > a1) {
      double sign = 1.0;
      for (int j = 0; j <= u1.n - u1.y; ++j) {
        const double coef = binshrink::alt_coefficient(u1.n, u1.y, j);
        accumulate(beta1(i, u1.y + j) - b2, -2.0 * sign * coef);
        sign = -sign;
      }
    } else {
      accumulate(b1 - b2, -2.0);
      double sign = 1.0;
      for (int j = 0; j <= u1.y; ++j) {
        const double coef = binshrink::alt_coefficient(u1.n, u1.n - u1.y, j);
        accumulate(beta1(i, u1.y - j) - b2, 2.0 * sign * coef);
        sign = -sign;
      }
    }

    const int a2 = u2.n / 2;
    if (u2.y > a2) {
      double sign = 1.0;
      for (int j = 0; j <= u2.n - u2.y; ++j) {
        const double coef = binshrink::alt_coefficient(u2.n, u2.y, j);
        accumulate(b1 - beta2(i, u2.y + j), 2.0 * sign * coef);
        sign = -sign;
      }
    } else {
      accumulate(b1 - b2, 2.0);
      double sign = 1.0;
      for (int j = 0; j <= u2.y; ++j) {
        const double coef = binshrink::alt_coefficient(u2.n, u2.n - u2.y, j);
        accumulate(b1 - beta2(i, u2.y - j), -2.0 * sign * coef);
        sign = -sign;
      }
    }
  }
  return binshrink::Vec2{d0.value() / n_units, d1.value() / n_units};
}

// ---------------------------------------------------------------------------
// Small dataset builders.

inline binshrink::OneSampleDataset make_one(
    std::initializer_list<std::pair<int, int>> units) {
  binshrink::OneSampleDataset d;
  for (auto [n, y] : units) d.units.push_back({n, y, {}});
  return d;
}

inline binshrink::TwoSampleDataset make_two(
    std::initializer_list<std::array<int, 4>> units) {
  binshrink::TwoSampleDataset d;
  for (auto [n1, y1, n2, y2] : units)
    d.units.push_back({{n1, y1, {}}, {n2, y2, {}}});
  return d;
}

inline binshrink::OneSampleDataset random_one(binshrink::RngStream& rng, int n_units,
                                              int n_max, int dim = 0, int n_min = 2) {
  binshrink::OneSampleDataset d;
  d.covariate_dim = dim;
  for (int i = 0; i < n_units; ++i) {
    binshrink::OneSampleUnit u;
    u.n = n_min +
          static_cast<int>(rng.below(static_cast<std::uint64_t>(n_max - n_min + 1)));
    const double theta = 0.05 + 0.9 * rng.uniform();
    u.y = rng.binomial(u.n, theta);
    for (int j = 0; j < dim; ++j) u.x.push_back(2.0 * rng.uniform() - 1.0);
    d.units.push_back(std::move(u));
  }
  return d;
}

inline binshrink::TwoSampleDataset random_two(binshrink::RngStream& rng, int n_units,
                                              int n_max, int dim = 0) {
  binshrink::TwoSampleDataset d;
  d.covariate_dim = dim;
  const binshrink::OneSampleDataset g1 = random_one(rng, n_units, n_max, dim);
  const binshrink::OneSampleDataset g2 = random_one(rng, n_units, n_max, dim);
  for (int i = 0; i < n_units; ++i)
    d.units.push_back({g1.units[static_cast<std::size_t>(i)],
                       g2.units[static_cast<std::size_t>(i)]});
  return d;
}

inline binshrink::CrossFitPredictions random_preds(binshrink::RngStream& rng,
                                                   const std::vector<int>& trials) {
  std::vector<double> g(trials.size());
  for (double& v : g) v = rng.uniform();
  return binshrink::make_predictions(std::move(g), trials);
}

inline std::vector<int> trials_of(const binshrink::OneSampleDataset& d) {
  std::vector<int> t;
  for (const auto& u : d.units) t.push_back(u.n);
  return t;
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Standard error of the mean.
inline double sem(const std::vector<double>& v) {
  return stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace testsupport
