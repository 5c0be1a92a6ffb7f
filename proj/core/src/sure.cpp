#include "binshrink/sure.hpp"

#include <algorithm>
#include <cmath>

#include "binshrink/kahan.hpp"
#include "binshrink/stein.hpp"

namespace binshrink {

namespace {

void check_alignment(const OneSampleDataset& data, const CrossFitPredictions* preds) {
  if (preds && preds->size() != data.size())
    throw DataError("predictions misaligned with dataset");
}

double pred_deviation(const CrossFitPredictions* preds, int i) {
  return preds ? preds->g_hat[static_cast<std::size_t>(i)] - preds->weighted_mean : 0.0;
}

// Estimator table over the outcome space of one unit, every other quantity
// frozen: t(y') = l1 * y'/n + (1 - l1) * gm + l2 * dev + shift.
void fill_table(OutcomeTable& tbl, int n, const Lambda& lam, double gm, double dev,
                double shift) {
  tbl.n = n;
  tbl.values.resize(static_cast<std::size_t>(n) + 1);
  const double base = (1.0 - lam.lambda1) * gm + lam.lambda2 * dev + shift;
  for (int y = 0; y <= n; ++y)
    tbl.values[static_cast<std::size_t>(y)] =
        lam.lambda1 * static_cast<double>(y) / static_cast<double>(n) + base;
}

// v_i = rate (1 - rate) / (n - 1), the unbiased within-unit variance term.
double unit_variance_term(const OneSampleUnit& u) {
  const double z = u.rate();
  return z * (1.0 - z) / static_cast<double>(u.n - 1);
}

}  // namespace

CrossFitPredictions make_predictions(std::vector<double> g_hat,
                                     const std::vector<int>& trials) {
  if (g_hat.size() != trials.size())
    throw DataError("make_predictions: predictions misaligned with trial counts");
  CrossFitPredictions out;
  out.g_hat = std::move(g_hat);
  double wsum = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < out.g_hat.size(); ++i) {
    out.g_hat[i] = std::clamp(out.g_hat[i], 0.0, 1.0);
    wsum += static_cast<double>(trials[i]) * out.g_hat[i];
    total += static_cast<double>(trials[i]);
  }
  out.weighted_mean = total > 0.0 ? wsum / total : 0.0;
  return out;
}

double sure_one_direct(const OneSampleDataset& data, const CrossFitPredictions* preds,
                       const Lambda& lam) {
  check_alignment(data, preds);
  const double gm = grand_mean(data);
  const int n_units = data.size();
  KahanSum total;
  OutcomeTable tbl;
  for (int i = 0; i < n_units; ++i) {
    const OneSampleUnit& u = data.units[static_cast<std::size_t>(i)];
    fill_table(tbl, u.n, lam, gm, pred_deviation(preds, i), 0.0);
    const double at_y = tbl(u.y);
    total.add(at_y * at_y - 2.0 * t_op(tbl, u.y));
  }
  return total.value() / static_cast<double>(n_units);
}

double sure_two_direct(const TwoSampleDataset& data, const CrossFitPredictions* preds1,
                       const CrossFitPredictions* preds2, const Lambda& lam) {
  if (preds1 && preds1->size() != data.size())
    throw DataError("group-1 predictions misaligned with dataset");
  if (preds2 && preds2->size() != data.size())
    throw DataError("group-2 predictions misaligned with dataset");
  const OneSampleDataset g1 = data.group(1);
  const OneSampleDataset g2 = data.group(2);
  const double gm1 = grand_mean(g1);
  const double gm2 = grand_mean(g2);
  const int n_units = data.size();
  KahanSum total;
  OutcomeTable tbl;
  for (int i = 0; i < n_units; ++i) {
    const OneSampleUnit& u1 = data.units[static_cast<std::size_t>(i)].group1;
    const OneSampleUnit& u2 = data.units[static_cast<std::size_t>(i)].group2;
    const double dev1 = pred_deviation(preds1, i);
    const double dev2 = pred_deviation(preds2, i);
    const double est1 = lam.lambda1 * u1.rate() + (1.0 - lam.lambda1) * gm1 +
                        lam.lambda2 * dev1;
    const double est2 = lam.lambda1 * u2.rate() + (1.0 - lam.lambda1) * gm2 +
                        lam.lambda2 * dev2;
    const double diff = est1 - est2;

    // Transform in the group-1 count with group 2 frozen, then vice versa.
    fill_table(tbl, u1.n, lam, gm1, dev1, -est2);
    const double t_in_1 = t_op(tbl, u1.y);
    fill_table(tbl, u2.n, lam, gm2, dev2, -est1);
    // est1 - est2(y') = -(est2(y') - est1); the transform is linear.
    const double t_in_2 = -t_op(tbl, u2.y);

    total.add(diff * diff - 2.0 * t_in_1 + 2.0 * t_in_2);
  }
  return total.value() / static_cast<double>(n_units);
}

QuadraticForm sure_one_coeffs(const OneSampleDataset& data,
                              const CrossFitPredictions* preds) {
  check_alignment(data, preds);
  const double gm = grand_mean(data);
  const int n_units = data.size();
  KahanSum a00, a01, a11, b0, b1;
  for (int i = 0; i < n_units; ++i) {
    const OneSampleUnit& u = data.units[static_cast<std::size_t>(i)];
    const double d = u.rate() - gm;
    const double g = pred_deviation(preds, i);
    a00.add(d * d);
    a01.add(d * g);
    a11.add(g * g);
    b0.add(unit_variance_term(u) - d * d);
    b1.add(-d * g);
  }
  const double inv_n = 1.0 / static_cast<double>(n_units);
  QuadraticForm q;
  q.a = Mat2{a00.value() * inv_n, a01.value() * inv_n, a11.value() * inv_n};
  q.b = Vec2{2.0 * b0.value() * inv_n, 2.0 * b1.value() * inv_n};
  q.c = sure_one_direct(data, preds, Lambda{0.0, 0.0});
  return q;
}

QuadraticForm sure_two_coeffs(const TwoSampleDataset& data,
                              const CrossFitPredictions* preds1,
                              const CrossFitPredictions* preds2) {
  if (preds1 && preds1->size() != data.size())
    throw DataError("group-1 predictions misaligned with dataset");
  if (preds2 && preds2->size() != data.size())
    throw DataError("group-2 predictions misaligned with dataset");
  const OneSampleDataset g1 = data.group(1);
  const OneSampleDataset g2 = data.group(2);
  const double gm1 = grand_mean(g1);
  const double gm2 = grand_mean(g2);
  const int n_units = data.size();
  KahanSum a00, a01, a11, b0, b1;
  for (int i = 0; i < n_units; ++i) {
    const OneSampleUnit& u1 = data.units[static_cast<std::size_t>(i)].group1;
    const OneSampleUnit& u2 = data.units[static_cast<std::size_t>(i)].group2;
    const double d = (u1.rate() - gm1) - (u2.rate() - gm2);
    const double g = pred_deviation(preds1, i) - pred_deviation(preds2, i);
    a00.add(d * d);
    a01.add(d * g);
    a11.add(g * g);
    b0.add(unit_variance_term(u1) + unit_variance_term(u2) - d * d);
    b1.add(-d * g);
  }
  const double inv_n = 1.0 / static_cast<double>(n_units);
  QuadraticForm q;
  q.a = Mat2{a00.value() * inv_n, a01.value() * inv_n, a11.value() * inv_n};
  q.b = Vec2{2.0 * b0.value() * inv_n, 2.0 * b1.value() * inv_n};
  q.c = sure_two_direct(data, preds1, preds2, Lambda{0.0, 0.0});
  return q;
}

}  // namespace binshrink
