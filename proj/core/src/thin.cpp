#include "binshrink/thin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "binshrink/kahan.hpp"
#include "binshrink/shrink.hpp"
#include "binshrink/sure.hpp"

namespace binshrink {

int hypergeom_sample(int m, int rest, int successes, RngStream& rng) {
  if (m < 0 || rest < 0 || successes < 0 || successes > m + rest)
    throw DataError("hypergeom_sample: need 0 <= successes <= m + rest");
  const int k_min = std::max(0, successes - rest);
  const int k_max = std::min(m, successes);
  if (k_min == k_max) return k_min;

  auto log_choose = [](int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  };
  const double u = rng.uniform();
  double log_pmf = log_choose(m, k_min) + log_choose(rest, successes - k_min) -
                   log_choose(m + rest, successes);
  double pmf = std::exp(log_pmf);
  double cdf = pmf;
  int k = k_min;
  while (u > cdf && k < k_max) {
    // pmf(k+1)/pmf(k) = (m-k)(successes-k) / ((k+1)(rest-successes+k+1))
    pmf *= static_cast<double>(m - k) * static_cast<double>(successes - k) /
           (static_cast<double>(k + 1) *
            static_cast<double>(rest - successes + k + 1));
    ++k;
    cdf += pmf;
  }
  return k;
}

namespace {

int holdout_trials(int n, double fraction) {
  return std::max(1, static_cast<int>(std::floor(fraction * n)));
}

void split_unit(const OneSampleUnit& u, double fraction, RngStream& rng, int row,
                const char* which, OneSampleUnit* train, OneSampleUnit* holdout) {
  const int m = holdout_trials(u.n, fraction);
  if (u.n - m < 2) {
    std::ostringstream msg;
    msg << "thin: unit " << row << which << ": training half would keep "
        << u.n - m << " trial(s) (< 2); unit too small for fraction " << fraction;
    throw DataError(msg.str());
  }
  const int y1 = hypergeom_sample(m, u.n - m, u.y, rng);
  holdout->n = m;
  holdout->y = y1;
  holdout->x = u.x;
  train->n = u.n - m;
  train->y = u.y - y1;
  train->x = u.x;
}

}  // namespace

ThinningSplitOne thin_one(const OneSampleDataset& data, double fraction, RngSeed seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw DataError("thin: fraction must lie in (0,1)");
  ThinningSplitOne out;
  out.train.covariate_dim = out.holdout.covariate_dim = data.covariate_dim;
  out.train.units.resize(data.units.size());
  out.holdout.units.resize(data.units.size());
  for (int i = 0; i < data.size(); ++i) {
    RngStream rng(seed, "thin", static_cast<std::uint64_t>(i));
    split_unit(data.units[static_cast<std::size_t>(i)], fraction, rng, i + 1, "",
               &out.train.units[static_cast<std::size_t>(i)],
               &out.holdout.units[static_cast<std::size_t>(i)]);
  }
  return out;
}

ThinningSplitTwo thin_two(const TwoSampleDataset& data, double fraction, RngSeed seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw DataError("thin: fraction must lie in (0,1)");
  ThinningSplitTwo out;
  out.train.covariate_dim = out.holdout.covariate_dim = data.covariate_dim;
  out.train.units.resize(data.units.size());
  out.holdout.units.resize(data.units.size());
  for (int i = 0; i < data.size(); ++i) {
    RngStream rng1(seed, "thin-g1", static_cast<std::uint64_t>(i));
    RngStream rng2(seed, "thin-g2", static_cast<std::uint64_t>(i));
    split_unit(data.units[static_cast<std::size_t>(i)].group1, fraction, rng1, i + 1,
               " (group 1)", &out.train.units[static_cast<std::size_t>(i)].group1,
               &out.holdout.units[static_cast<std::size_t>(i)].group1);
    split_unit(data.units[static_cast<std::size_t>(i)].group2, fraction, rng2, i + 1,
               " (group 2)", &out.train.units[static_cast<std::size_t>(i)].group2,
               &out.holdout.units[static_cast<std::size_t>(i)].group2);
  }
  return out;
}

double holdout_risk_one(const std::vector<double>& estimates,
                        const OneSampleDataset& holdout,
                        const OneSampleDataset* train) {
  if (static_cast<int>(estimates.size()) != holdout.size())
    throw DataError("holdout_risk: estimates misaligned with holdout set");
  bool all_equal_holdout = true;
  bool all_equal_train = train != nullptr;
  KahanSum sum;
  for (int i = 0; i < holdout.size(); ++i) {
    const OneSampleUnit& u = holdout.units[static_cast<std::size_t>(i)];
    if (u.n < 1) throw DataError("holdout_risk: holdout unit with no trials");
    const double est = estimates[static_cast<std::size_t>(i)];
    if (est != u.rate()) all_equal_holdout = false;
    if (all_equal_train && est != train->units[static_cast<std::size_t>(i)].rate())
      all_equal_train = false;
    sum.add(est * est - 2.0 * u.rate() * est);
  }
  if (all_equal_holdout && !all_equal_train)
    throw DataError(
        "holdout_risk: estimates coincide with the holdout rates; estimates "
        "must be computed from the training half only");
  return sum.value() / static_cast<double>(holdout.size());
}

double holdout_risk_two(const std::vector<double>& estimates,
                        const TwoSampleDataset& holdout,
                        const TwoSampleDataset* train) {
  if (static_cast<int>(estimates.size()) != holdout.size())
    throw DataError("holdout_risk: estimates misaligned with holdout set");
  bool all_equal_holdout = true;
  bool all_equal_train = train != nullptr;
  KahanSum sum;
  for (int i = 0; i < holdout.size(); ++i) {
    const OneSampleUnit& u1 = holdout.units[static_cast<std::size_t>(i)].group1;
    const OneSampleUnit& u2 = holdout.units[static_cast<std::size_t>(i)].group2;
    if (u1.n < 1 || u2.n < 1)
      throw DataError("holdout_risk: holdout unit with no trials");
    const double est = estimates[static_cast<std::size_t>(i)];
    const double mle_diff = u1.rate() - u2.rate();
    if (est != mle_diff) all_equal_holdout = false;
    if (all_equal_train) {
      const auto& t = train->units[static_cast<std::size_t>(i)];
      if (est != t.group1.rate() - t.group2.rate()) all_equal_train = false;
    }
    sum.add(est * est - 2.0 * mle_diff * est);
  }
  if (all_equal_holdout && !all_equal_train)
    throw DataError(
        "holdout_risk: estimates coincide with the holdout rate differences; "
        "estimates must be computed from the training half only");
  return sum.value() / static_cast<double>(holdout.size());
}

namespace {

std::vector<double> draw_covariates(RngStream& rng, int dim) {
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (double& v : x) v = 2.0 * rng.uniform() - 1.0;
  return x;
}

double design_g(const SyntheticDesign& d, const std::vector<double>& x) {
  double g = d.g_intercept;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double slope = j < d.g_slope.size() ? d.g_slope[j] : 0.0;
    g += slope * x[j];
  }
  return g;
}

OneSampleUnit draw_unit(const SyntheticDesign& d, RngSeed seed, const char* tag,
                        int index, double* theta_out, double* g_out) {
  RngStream rng(seed, tag, static_cast<std::uint64_t>(index));
  OneSampleUnit u;
  u.n = d.trials_min +
        static_cast<int>(rng.below(static_cast<std::uint64_t>(d.trials_max - d.trials_min + 1)));
  u.x = draw_covariates(rng, d.covariate_dim);
  const double g = design_g(d, u.x);
  double theta = g + (d.noise_sd > 0.0 ? d.noise_sd * rng.normal() : 0.0);
  theta = std::clamp(theta, d.clip_lo, d.clip_hi);
  u.y = rng.binomial(u.n, theta);
  *theta_out = theta;
  *g_out = std::clamp(g, 0.0, 1.0);
  return u;
}

void check_design(const SyntheticDesign& d) {
  if (d.n_units < 1) throw DataError("simulate: need at least one unit");
  if (d.trials_min < 2 || d.trials_max < d.trials_min)
    throw DataError("simulate: need 2 <= trials_min <= trials_max");
  if (!(d.clip_lo >= 0.0 && d.clip_lo < d.clip_hi && d.clip_hi <= 1.0))
    throw DataError("simulate: need 0 <= clip_lo < clip_hi <= 1");
}

}  // namespace

SyntheticOne simulate_one(const SyntheticDesign& design, RngSeed seed) {
  check_design(design);
  SyntheticOne out;
  out.data.covariate_dim = design.covariate_dim;
  out.data.units.resize(static_cast<std::size_t>(design.n_units));
  out.theta.resize(static_cast<std::size_t>(design.n_units));
  out.g_clipped.resize(static_cast<std::size_t>(design.n_units));
  for (int i = 0; i < design.n_units; ++i)
    out.data.units[static_cast<std::size_t>(i)] =
        draw_unit(design, seed, "sim", i, &out.theta[static_cast<std::size_t>(i)],
                  &out.g_clipped[static_cast<std::size_t>(i)]);
  return out;
}

SyntheticTwo simulate_two(const SyntheticDesign& d1, const SyntheticDesign& d2,
                          RngSeed seed) {
  check_design(d1);
  check_design(d2);
  if (d1.n_units != d2.n_units)
    throw DataError("simulate: the two groups must pair up unit-for-unit");
  if (d1.covariate_dim != d2.covariate_dim)
    throw DataError("simulate: the two groups must share a covariate dimension");
  SyntheticTwo out;
  out.data.covariate_dim = d1.covariate_dim;
  out.data.units.resize(static_cast<std::size_t>(d1.n_units));
  out.theta1.resize(static_cast<std::size_t>(d1.n_units));
  out.theta2.resize(static_cast<std::size_t>(d1.n_units));
  out.g1_clipped.resize(static_cast<std::size_t>(d1.n_units));
  out.g2_clipped.resize(static_cast<std::size_t>(d1.n_units));
  for (int i = 0; i < d1.n_units; ++i) {
    out.data.units[static_cast<std::size_t>(i)].group1 =
        draw_unit(d1, seed, "sim-g1", i, &out.theta1[static_cast<std::size_t>(i)],
                  &out.g1_clipped[static_cast<std::size_t>(i)]);
    out.data.units[static_cast<std::size_t>(i)].group2 =
        draw_unit(d2, seed, "sim-g2", i, &out.theta2[static_cast<std::size_t>(i)],
                  &out.g2_clipped[static_cast<std::size_t>(i)]);
  }
  return out;
}

double exact_risk_tables(const std::vector<int>& trials, const std::vector<double>& theta,
                         const std::function<double(int, int)>& table) {
  if (trials.size() != theta.size())
    throw DataError("exact_risk_tables: trials/theta misaligned");
  KahanSum total;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const int n = trials[i];
    const double th = theta[i];
    // Walk the pmf multiplicatively; n stays desk-sized here.
    double pmf = std::pow(1.0 - th, n);
    const double ratio = th < 1.0 ? th / (1.0 - th) : 0.0;
    KahanSum unit;
    for (int y = 0; y <= n; ++y) {
      double p = pmf;
      if (th >= 1.0) p = (y == n) ? 1.0 : 0.0;
      const double t = table(static_cast<int>(i), y);
      unit.add(p * (t * t - 2.0 * th * t));
      if (th < 1.0)
        pmf *= ratio * static_cast<double>(n - y) / static_cast<double>(y + 1);
    }
    total.add(unit.value());
  }
  return total.value() / static_cast<double>(trials.size());
}

namespace {

struct GroupMoments {
  // Per-unit moments of A_i = Y_i/n_i - Ybar and of (Ybar - theta_i).
  std::vector<double> mean_a;      // E[A_i]
  std::vector<double> mean_a2;     // E[A_i^2]
  std::vector<double> cross;       // E[(Ybar - theta_i) A_i]
  std::vector<double> mean_resid;  // E[Ybar - theta_i]
  double var_pool = 0.0;           // Var(Ybar)
};

GroupMoments group_moments(const std::vector<int>& trials,
                           const std::vector<double>& theta) {
  const std::size_t n_units = trials.size();
  double total = 0.0;
  for (int n : trials) total += static_cast<double>(n);
  double theta_bar = 0.0;
  for (std::size_t i = 0; i < n_units; ++i)
    theta_bar += trials[i] * theta[i] / total;
  GroupMoments m;
  m.mean_a.resize(n_units);
  m.mean_a2.resize(n_units);
  m.cross.resize(n_units);
  m.mean_resid.resize(n_units);
  double pool = 0.0;
  std::vector<double> var_rate(n_units), weight(n_units);
  for (std::size_t i = 0; i < n_units; ++i) {
    weight[i] = trials[i] / total;
    var_rate[i] = theta[i] * (1.0 - theta[i]) / trials[i];
    pool += weight[i] * weight[i] * var_rate[i];
  }
  m.var_pool = pool;
  for (std::size_t i = 0; i < n_units; ++i) {
    const double dev = theta[i] - theta_bar;
    m.mean_a[i] = dev;
    m.mean_a2[i] = var_rate[i] * (1.0 - 2.0 * weight[i]) + pool + dev * dev;
    m.cross[i] = weight[i] * var_rate[i] - pool - dev * dev;
    m.mean_resid[i] = -dev;
  }
  return m;
}

}  // namespace

QuadraticForm oracle_risk_quadratic_one(const std::vector<int>& trials,
                                        const std::vector<double>& theta,
                                        const std::vector<double>* preds) {
  if (trials.size() != theta.size())
    throw DataError("oracle_risk_quadratic: trials/theta misaligned");
  if (preds && preds->size() != trials.size())
    throw DataError("oracle_risk_quadratic: predictions misaligned");
  const std::size_t n_units = trials.size();
  const GroupMoments m = group_moments(trials, theta);

  double pred_mean = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n_units; ++i) total += trials[i];
  if (preds)
    for (std::size_t i = 0; i < n_units; ++i)
      pred_mean += trials[i] * (*preds)[i] / total;

  KahanSum a00, a01, a11, b0, b1, c;
  for (std::size_t i = 0; i < n_units; ++i) {
    const double gdev = preds ? (*preds)[i] - pred_mean : 0.0;
    a00.add(m.mean_a2[i]);
    a01.add(m.mean_a[i] * gdev);
    a11.add(gdev * gdev);
    b0.add(m.cross[i]);
    b1.add(m.mean_resid[i] * gdev);
    c.add(m.var_pool + m.mean_resid[i] * m.mean_resid[i]);
  }
  const double inv_n = 1.0 / static_cast<double>(n_units);
  QuadraticForm q;
  q.a = Mat2{a00.value() * inv_n, a01.value() * inv_n, a11.value() * inv_n};
  q.b = Vec2{2.0 * b0.value() * inv_n, 2.0 * b1.value() * inv_n};
  q.c = c.value() * inv_n;
  return q;
}

QuadraticForm oracle_risk_quadratic_two(const std::vector<int>& trials1,
                                        const std::vector<double>& theta1,
                                        const std::vector<int>& trials2,
                                        const std::vector<double>& theta2,
                                        const std::vector<double>* preds1,
                                        const std::vector<double>* preds2) {
  if (trials1.size() != theta1.size() || trials2.size() != theta2.size() ||
      trials1.size() != trials2.size())
    throw DataError("oracle_risk_quadratic: misaligned inputs");
  const std::size_t n_units = trials1.size();
  const GroupMoments m1 = group_moments(trials1, theta1);
  const GroupMoments m2 = group_moments(trials2, theta2);

  auto weighted_mean = [](const std::vector<int>& tr, const std::vector<double>* p) {
    if (!p) return 0.0;
    double total = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      total += tr[i];
      acc += tr[i] * (*p)[i];
    }
    return acc / total;
  };
  const double pm1 = weighted_mean(trials1, preds1);
  const double pm2 = weighted_mean(trials2, preds2);

  KahanSum a00, a01, a11, b0, b1, c;
  for (std::size_t i = 0; i < n_units; ++i) {
    const double gdev = (preds1 ? (*preds1)[i] - pm1 : 0.0) -
                        (preds2 ? (*preds2)[i] - pm2 : 0.0);
    // Groups are independent, so the moments add with a mean cross term.
    const double mean_a = m1.mean_a[i] - m2.mean_a[i];
    const double mean_a2 = m1.mean_a2[i] + m2.mean_a2[i] -
                           2.0 * m1.mean_a[i] * m2.mean_a[i];
    const double mean_resid = m1.mean_resid[i] - m2.mean_resid[i];
    const double cross = m1.cross[i] - m1.mean_resid[i] * m2.mean_a[i] -
                         m2.mean_resid[i] * m1.mean_a[i] + m2.cross[i];
    a00.add(mean_a2);
    a01.add(mean_a * gdev);
    a11.add(gdev * gdev);
    b0.add(cross);
    b1.add(mean_resid * gdev);
    c.add(m1.var_pool + m2.var_pool + mean_resid * mean_resid);
  }
  const double inv_n = 1.0 / static_cast<double>(n_units);
  QuadraticForm q;
  q.a = Mat2{a00.value() * inv_n, a01.value() * inv_n, a11.value() * inv_n};
  q.b = Vec2{2.0 * b0.value() * inv_n, 2.0 * b1.value() * inv_n};
  q.c = c.value() * inv_n;
  return q;
}

double shift_risk_constant_one(const std::vector<double>& theta) {
  KahanSum s;
  for (double t : theta) s.add(t * t);
  return s.value() / static_cast<double>(theta.size());
}

double shift_risk_constant_two(const std::vector<double>& theta1,
                               const std::vector<double>& theta2) {
  KahanSum s;
  for (std::size_t i = 0; i < theta1.size(); ++i) {
    const double d = theta1[i] - theta2[i];
    s.add(d * d);
  }
  return s.value() / static_cast<double>(theta1.size());
}

std::string EstimatorConfig::label() const {
  switch (kind) {
    case Kind::mle:
      return "mle";
    case Kind::grand_mean:
      return "grand_mean";
    case Kind::fixed_lambda: {
      std::ostringstream s;
      s << "fixed(" << lambda.lambda1 << "," << lambda.lambda2 << ")";
      return s.str();
    }
    case Kind::sure_fit:
      return "sure_fit";
  }
  return "?";
}

std::vector<Lambda> LambdaGrid::points() const {
  if (n1 < 1 || n2 < 1) throw DataError("LambdaGrid: counts must be >= 1");
  std::vector<Lambda> out;
  out.reserve(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2));
  for (int i = 0; i < n1; ++i) {
    const double l1 =
        n1 == 1 ? l1_min : l1_min + (l1_max - l1_min) * i / static_cast<double>(n1 - 1);
    for (int j = 0; j < n2; ++j) {
      const double l2 =
          n2 == 1 ? l2_min : l2_min + (l2_max - l2_min) * j / static_cast<double>(n2 - 1);
      out.push_back(Lambda{l1, l2});
    }
  }
  return out;
}

namespace {

struct FittedPredsOne {
  CrossFitPredictions preds;
  bool present = false;
};

FittedPredsOne make_preds_one(const OneSampleDataset& train, const PredictorSpec& spec,
                              int k_folds, RngSeed seed, const char* fold_label) {
  FittedPredsOne out;
  switch (spec.kind) {
    case PredictorSpec::Kind::none:
      return out;
    case PredictorSpec::Kind::external: {
      std::vector<int> trials(static_cast<std::size_t>(train.size()));
      for (int i = 0; i < train.size(); ++i)
        trials[static_cast<std::size_t>(i)] = train.units[static_cast<std::size_t>(i)].n;
      out.preds = load_external_predictions_one(spec.external_path, train.size(), trials);
      out.present = true;
      return out;
    }
    case PredictorSpec::Kind::constant:
    case PredictorSpec::Kind::ols: {
      const auto predictor = spec.kind == PredictorSpec::Kind::constant
                                 ? make_constant_predictor()
                                 : make_ols_predictor();
      RngSeed fold_seed{RngStream(seed, fold_label).next_u64()};
      const FoldAssignment folds = assign_folds(train.size(), k_folds, fold_seed);
      out.preds = cross_fit(train, *predictor, folds).preds;
      out.present = true;
      return out;
    }
  }
  return out;
}

}  // namespace

ComparisonResult compare_one(const OneSampleDataset& data, double fraction,
                             const std::vector<EstimatorConfig>& configs,
                             const LambdaGrid& grid, int k_folds, RngSeed seed) {
  if (configs.empty()) throw DataError("compare: need at least one estimator config");
  const ThinningSplitOne split = thin_one(data, fraction, seed);

  ComparisonResult out;
  for (const EstimatorConfig& cfg : configs) {
    ComparisonRow row;
    row.estimator = cfg.label();
    std::vector<double> est;
    switch (cfg.kind) {
      case EstimatorConfig::Kind::mle:
        est = estimate_one(split.train, nullptr, Lambda{1.0, 0.0});
        row.lambda_used = Lambda{1.0, 0.0};
        row.has_lambda = true;
        break;
      case EstimatorConfig::Kind::grand_mean:
        est = estimate_one(split.train, nullptr, Lambda{0.0, 0.0});
        row.lambda_used = Lambda{0.0, 0.0};
        row.has_lambda = true;
        break;
      case EstimatorConfig::Kind::fixed_lambda: {
        const FittedPredsOne fp =
            make_preds_one(split.train, cfg.predictor, k_folds, seed, "compare-folds");
        est = estimate_one(split.train, fp.present ? &fp.preds : nullptr, cfg.lambda);
        row.lambda_used = cfg.lambda;
        row.has_lambda = true;
        break;
      }
      case EstimatorConfig::Kind::sure_fit: {
        const FittedPredsOne fp =
            make_preds_one(split.train, cfg.predictor, k_folds, seed, "compare-folds");
        const QuadraticForm q =
            sure_one_coeffs(split.train, fp.present ? &fp.preds : nullptr);
        const Lambda lam = fit_lambda(q, /*feasible=*/true);
        est = estimate_one(split.train, fp.present ? &fp.preds : nullptr, lam);
        row.lambda_used = lam;
        row.has_lambda = true;
        break;
      }
    }
    row.holdout_risk = holdout_risk_one(est, split.holdout, &split.train);
    out.rows.push_back(std::move(row));
  }

  // Paired surfaces over the grid, no predictor (the grid sweep covers the
  // lambda2 = 0 slice unless external predictions are configured).
  FittedPredsOne surface_preds;
  for (const EstimatorConfig& cfg : configs)
    if (cfg.kind == EstimatorConfig::Kind::sure_fit &&
        cfg.predictor.kind != PredictorSpec::Kind::none) {
      surface_preds = make_preds_one(split.train, cfg.predictor, k_folds, seed,
                                     "compare-folds");
      break;
    }
  const CrossFitPredictions* sp = surface_preds.present ? &surface_preds.preds : nullptr;
  for (const Lambda& lam : grid.points()) {
    SurfacePoint pt;
    pt.lambda = lam;
    pt.sure = sure_one_direct(split.train, sp, lam);
    pt.holdout = holdout_risk_one(estimate_one(split.train, sp, lam), split.holdout,
                                  &split.train);
    out.surface.push_back(pt);
  }
  return out;
}

ComparisonResult compare_two(const TwoSampleDataset& data, double fraction,
                             const std::vector<EstimatorConfig>& configs,
                             const LambdaGrid& grid, int k_folds, RngSeed seed) {
  if (configs.empty()) throw DataError("compare: need at least one estimator config");
  const ThinningSplitTwo split = thin_two(data, fraction, seed);
  const OneSampleDataset train1 = split.train.group(1);
  const OneSampleDataset train2 = split.train.group(2);

  auto make_preds_pair = [&](const PredictorSpec& spec)
      -> std::pair<FittedPredsOne, FittedPredsOne> {
    if (spec.kind == PredictorSpec::Kind::external) {
      std::vector<int> t1(static_cast<std::size_t>(train1.size())),
          t2(static_cast<std::size_t>(train2.size()));
      for (int i = 0; i < train1.size(); ++i) {
        t1[static_cast<std::size_t>(i)] = train1.units[static_cast<std::size_t>(i)].n;
        t2[static_cast<std::size_t>(i)] = train2.units[static_cast<std::size_t>(i)].n;
      }
      auto both =
          load_external_predictions_two(spec.external_path, train1.size(), t1, t2);
      return {{both.first, true}, {both.second, true}};
    }
    if (spec.kind == PredictorSpec::Kind::none) return {};
    // One split of the unit index serves both groups.
    const auto predictor = spec.kind == PredictorSpec::Kind::constant
                               ? make_constant_predictor()
                               : make_ols_predictor();
    RngSeed fold_seed{RngStream(seed, "compare-folds").next_u64()};
    const FoldAssignment folds = assign_folds(train1.size(), k_folds, fold_seed);
    return {{cross_fit(train1, *predictor, folds).preds, true},
            {cross_fit(train2, *predictor, folds).preds, true}};
  };

  ComparisonResult out;
  for (const EstimatorConfig& cfg : configs) {
    ComparisonRow row;
    row.estimator = cfg.label();
    std::vector<double> est;
    switch (cfg.kind) {
      case EstimatorConfig::Kind::mle:
        est = estimate_two(split.train, nullptr, nullptr, Lambda{1.0, 0.0});
        row.lambda_used = Lambda{1.0, 0.0};
        row.has_lambda = true;
        break;
      case EstimatorConfig::Kind::grand_mean:
        est = estimate_two(split.train, nullptr, nullptr, Lambda{0.0, 0.0});
        row.lambda_used = Lambda{0.0, 0.0};
        row.has_lambda = true;
        break;
      case EstimatorConfig::Kind::fixed_lambda: {
        auto [fp1, fp2] = make_preds_pair(cfg.predictor);
        est = estimate_two(split.train, fp1.present ? &fp1.preds : nullptr,
                           fp2.present ? &fp2.preds : nullptr, cfg.lambda);
        row.lambda_used = cfg.lambda;
        row.has_lambda = true;
        break;
      }
      case EstimatorConfig::Kind::sure_fit: {
        auto [fp1, fp2] = make_preds_pair(cfg.predictor);
        const QuadraticForm q =
            sure_two_coeffs(split.train, fp1.present ? &fp1.preds : nullptr,
                            fp2.present ? &fp2.preds : nullptr);
        const Lambda lam = fit_lambda(q, /*feasible=*/true);
        est = estimate_two(split.train, fp1.present ? &fp1.preds : nullptr,
                           fp2.present ? &fp2.preds : nullptr, lam);
        row.lambda_used = lam;
        row.has_lambda = true;
        break;
      }
    }
    row.holdout_risk = holdout_risk_two(est, split.holdout, &split.train);
    out.rows.push_back(std::move(row));
  }

  std::pair<FittedPredsOne, FittedPredsOne> surface_preds;
  for (const EstimatorConfig& cfg : configs)
    if (cfg.kind == EstimatorConfig::Kind::sure_fit &&
        cfg.predictor.kind != PredictorSpec::Kind::none) {
      surface_preds = make_preds_pair(cfg.predictor);
      break;
    }
  const CrossFitPredictions* sp1 =
      surface_preds.first.present ? &surface_preds.first.preds : nullptr;
  const CrossFitPredictions* sp2 =
      surface_preds.second.present ? &surface_preds.second.preds : nullptr;
  for (const Lambda& lam : grid.points()) {
    SurfacePoint pt;
    pt.lambda = lam;
    pt.sure = sure_two_direct(split.train, sp1, sp2, lam);
    pt.holdout = holdout_risk_two(estimate_two(split.train, sp1, sp2, lam),
                                  split.holdout, &split.train);
    out.surface.push_back(pt);
  }
  return out;
}

}  // namespace binshrink
