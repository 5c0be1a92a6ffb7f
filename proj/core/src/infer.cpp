#include "binshrink/infer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <sstream>

#include "binshrink/parallel.hpp"
#include "binshrink/shrink.hpp"
#include "binshrink/sure.hpp"

namespace binshrink {

namespace {

struct Replicate {
  Lambda lambda;
  QuadraticForm coeffs;
};

std::vector<int> resample_indices(int n_units, RngStream& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n_units));
  for (int& v : idx) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_units)));
  return idx;
}

// One-sample pipeline on an arbitrary dataset: predictions, coefficients,
// constrained fit. `external` carries per-unit predictions already aligned
// with `data` (resampled alongside it).
Replicate run_pipeline_one(const OneSampleDataset& data, const PredictorSpec& spec,
                           int k_folds, RngSeed fold_seed,
                           const std::vector<double>* external) {
  std::optional<CrossFitPredictions> preds;
  if (spec.kind == PredictorSpec::Kind::external) {
    std::vector<int> trials(static_cast<std::size_t>(data.size()));
    for (int i = 0; i < data.size(); ++i)
      trials[static_cast<std::size_t>(i)] = data.units[static_cast<std::size_t>(i)].n;
    preds = make_predictions(*external, trials);
  } else if (spec.kind != PredictorSpec::Kind::none) {
    const auto predictor = spec.kind == PredictorSpec::Kind::constant
                               ? make_constant_predictor()
                               : make_ols_predictor();
    const FoldAssignment folds = assign_folds(data.size(), k_folds, fold_seed);
    preds = cross_fit(data, *predictor, folds).preds;
  }
  Replicate rep;
  rep.coeffs = sure_one_coeffs(data, preds ? &*preds : nullptr);
  rep.lambda = fit_lambda(rep.coeffs, /*feasible=*/true);
  return rep;
}

Replicate run_pipeline_two(const TwoSampleDataset& data, const PredictorSpec& spec,
                           int k_folds, RngSeed fold_seed,
                           const std::vector<double>* external1,
                           const std::vector<double>* external2) {
  const OneSampleDataset g1 = data.group(1);
  const OneSampleDataset g2 = data.group(2);
  std::optional<CrossFitPredictions> preds1, preds2;
  auto trials_of = [](const OneSampleDataset& d) {
    std::vector<int> t(static_cast<std::size_t>(d.size()));
    for (int i = 0; i < d.size(); ++i)
      t[static_cast<std::size_t>(i)] = d.units[static_cast<std::size_t>(i)].n;
    return t;
  };
  if (spec.kind == PredictorSpec::Kind::external) {
    preds1 = make_predictions(*external1, trials_of(g1));
    preds2 = make_predictions(*external2, trials_of(g2));
  } else if (spec.kind != PredictorSpec::Kind::none) {
    const auto predictor = spec.kind == PredictorSpec::Kind::constant
                               ? make_constant_predictor()
                               : make_ols_predictor();
    // One split of the unit index serves both groups.
    const FoldAssignment folds = assign_folds(data.size(), k_folds, fold_seed);
    preds1 = cross_fit(g1, *predictor, folds).preds;
    preds2 = cross_fit(g2, *predictor, folds).preds;
  }
  Replicate rep;
  rep.coeffs = sure_two_coeffs(data, preds1 ? &*preds1 : nullptr,
                               preds2 ? &*preds2 : nullptr);
  rep.lambda = fit_lambda(rep.coeffs, /*feasible=*/true);
  return rep;
}

template <typename MakeReplicate>
BootstrapRun collect_replicates(int b, RngSeed seed, MakeReplicate make) {
  if (b < 2) throw DataError("bootstrap: need at least 2 replicates");
  std::vector<std::optional<Replicate>> slots(static_cast<std::size_t>(b));
  parallel_for(b, [&](int r) { slots[static_cast<std::size_t>(r)] = make(r); });

  BootstrapRun run;
  run.b_requested = b;
  run.seed = seed;
  for (const auto& slot : slots) {
    if (slot) {
      run.lambda_reps.push_back(slot->lambda);
      run.coeff_reps.push_back(slot->coeffs);
    } else {
      ++run.skipped;
    }
  }
  if (run.skipped * 20 > b) {
    std::ostringstream msg;
    msg << "bootstrap: " << run.skipped << " of " << b
        << " replicates failed (singular or predictor error)";
    throw NumericError(msg.str());
  }
  return run;
}

// External predictions must ride along with the resampled units.
std::vector<double> gather(const std::vector<double>& src, const std::vector<int>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[i] = src[static_cast<std::size_t>(idx[i])];
  return out;
}

}  // namespace

BootstrapRun bootstrap_one(const OneSampleDataset& data, const PredictorSpec& predictor,
                           int k_folds, int b, RngSeed seed) {
  std::optional<std::vector<double>> external;
  if (predictor.kind == PredictorSpec::Kind::external) {
    std::vector<int> trials(static_cast<std::size_t>(data.size()));
    for (int i = 0; i < data.size(); ++i)
      trials[static_cast<std::size_t>(i)] = data.units[static_cast<std::size_t>(i)].n;
    external =
        load_external_predictions_one(predictor.external_path, data.size(), trials).g_hat;
  }
  return collect_replicates(b, seed, [&](int r) -> std::optional<Replicate> {
    RngStream rng(seed, "bootstrap", static_cast<std::uint64_t>(r));
    const std::vector<int> idx = resample_indices(data.size(), rng);
    OneSampleDataset sample;
    sample.covariate_dim = data.covariate_dim;
    sample.units.reserve(idx.size());
    for (int i : idx) sample.units.push_back(data.units[static_cast<std::size_t>(i)]);
    std::optional<std::vector<double>> ext;
    if (external) ext = gather(*external, idx);
    try {
      return run_pipeline_one(sample, predictor, k_folds,
                              RngSeed{rng.next_u64()}, ext ? &*ext : nullptr);
    } catch (const NumericError&) {
      return std::nullopt;
    } catch (const PredictorError&) {
      return std::nullopt;
    }
  });
}

BootstrapRun bootstrap_two(const TwoSampleDataset& data, const PredictorSpec& predictor,
                           int k_folds, int b, RngSeed seed) {
  std::optional<std::vector<double>> external1, external2;
  if (predictor.kind == PredictorSpec::Kind::external) {
    std::vector<int> t1(static_cast<std::size_t>(data.size())),
        t2(static_cast<std::size_t>(data.size()));
    for (int i = 0; i < data.size(); ++i) {
      t1[static_cast<std::size_t>(i)] = data.units[static_cast<std::size_t>(i)].group1.n;
      t2[static_cast<std::size_t>(i)] = data.units[static_cast<std::size_t>(i)].group2.n;
    }
    auto both = load_external_predictions_two(predictor.external_path, data.size(), t1, t2);
    external1 = both.first.g_hat;
    external2 = both.second.g_hat;
  }
  return collect_replicates(b, seed, [&](int r) -> std::optional<Replicate> {
    RngStream rng(seed, "bootstrap", static_cast<std::uint64_t>(r));
    const std::vector<int> idx = resample_indices(data.size(), rng);
    TwoSampleDataset sample;
    sample.covariate_dim = data.covariate_dim;
    sample.units.reserve(idx.size());
    for (int i : idx) sample.units.push_back(data.units[static_cast<std::size_t>(i)]);
    std::optional<std::vector<double>> ext1, ext2;
    if (external1) {
      ext1 = gather(*external1, idx);
      ext2 = gather(*external2, idx);
    }
    try {
      return run_pipeline_two(sample, predictor, k_folds, RngSeed{rng.next_u64()},
                              ext1 ? &*ext1 : nullptr, ext2 ? &*ext2 : nullptr);
    } catch (const NumericError&) {
      return std::nullopt;
    } catch (const PredictorError&) {
      return std::nullopt;
    }
  });
}

double chi2_quantile_2df(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw DataError("chi2_quantile_2df: probability must lie in (0,1)");
  if (prob == 0.90) return 4.605170185988091;
  if (prob == 0.95) return 5.991464547107979;
  if (prob == 0.99) return 9.210340371976184;
  // With 2 df the distribution is Exp(1/2), so the quantile is closed-form.
  return -2.0 * std::log(1.0 - prob);
}

namespace {

Mat2 replicate_covariance(const std::vector<Lambda>& reps) {
  const int b = static_cast<int>(reps.size());
  if (b < 2) throw DataError("covariance: need at least 2 replicates");
  double m1 = 0.0, m2 = 0.0;
  for (const Lambda& l : reps) {
    m1 += l.lambda1;
    m2 += l.lambda2;
  }
  m1 /= b;
  m2 /= b;
  double c00 = 0.0, c01 = 0.0, c11 = 0.0;
  for (const Lambda& l : reps) {
    const double d1 = l.lambda1 - m1;
    const double d2 = l.lambda2 - m2;
    c00 += d1 * d1;
    c01 += d1 * d2;
    c11 += d2 * d2;
  }
  const double denom = static_cast<double>(b - 1);
  return Mat2{c00 / denom, c01 / denom, c11 / denom};
}

}  // namespace

bool EllipsoidRegion::contains(const Lambda& l) const {
  const Vec2 d{center.lambda1 - l.lambda1, center.lambda2 - l.lambda2};
  if (pinned_second) {
    if (std::fabs(d.v1) > 1e-12) return false;
    return static_cast<double>(n_units) * d.v0 * d.v0 / covariance.m00 <= chi2_crit;
  }
  Vec2 solved;
  try {
    solved = solve_sym(covariance, d);
  } catch (const NumericError&) {
    throw NumericError("ellipsoid membership: singular bootstrap covariance");
  }
  return static_cast<double>(n_units) * d.dot(solved) <= chi2_crit;
}

EllipsoidRegion ellipsoid_region(const BootstrapRun& run, const Lambda& lam_hat,
                                 double alpha, int n_units) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DataError("ellipsoid_region: alpha must lie in (0,1)");
  EllipsoidRegion region;
  region.center = lam_hat;
  region.alpha = alpha;
  region.n_units = n_units;
  region.chi2_crit = chi2_quantile_2df(1.0 - alpha);
  region.covariance = replicate_covariance(run.lambda_reps) *
                      static_cast<double>(n_units);
  // The no-covariate pipeline pins every replicate's second coordinate to
  // exactly zero; the region is then an interval, not a singularity.
  region.pinned_second = region.covariance.m11 == 0.0 && region.covariance.m01 == 0.0;
  if (region.pinned_second) {
    if (region.covariance.m00 <= 0.0)
      throw NumericError("ellipsoid_region: singular bootstrap covariance");
  } else {
    // Surface the singularity now rather than on first membership query.
    solve_sym(region.covariance, Vec2{1.0, 0.0});
  }
  return region;
}

namespace {

double empirical_quantile(std::vector<double> values, double prob) {
  std::sort(values.begin(), values.end());
  const int n = static_cast<int>(values.size());
  int idx = static_cast<int>(std::ceil(prob * n)) - 1;
  idx = std::clamp(idx, 0, n - 1);
  return values[static_cast<std::size_t>(idx)];
}

}  // namespace

bool GridRegion::contains(const Lambda& l) const {
  if (!l.feasible()) return false;
  const double scale = std::pow(static_cast<double>(n_units), gamma);
  const Vec2 g{2.0 * (objective.a.m00 * l.lambda1 + objective.a.m01 * l.lambda2) +
                   objective.b.v0,
               2.0 * (objective.a.m01 * l.lambda1 + objective.a.m11 * l.lambda2) +
                   objective.b.v1};
  const double inner = min_quadratic_slab_disc(objective.a, g, -l.lambda1,
                                               1.0 - l.lambda1, delta);
  const double statistic = -(scale * scale) * inner;
  return statistic <= c_crit + 1e-9 * (1.0 + std::fabs(c_crit));
}

bool GridRegion::empty() const {
  for (std::uint8_t m : member)
    if (m) return false;
  return true;
}

Lambda GridRegion::point(int i1, int i2) const {
  const double l1 = grid.n1 == 1 ? grid.l1_min
                                 : grid.l1_min + (grid.l1_max - grid.l1_min) * i1 /
                                       static_cast<double>(grid.n1 - 1);
  const double l2 = grid.n2 == 1 ? grid.l2_min
                                 : grid.l2_min + (grid.l2_max - grid.l2_min) * i2 /
                                       static_cast<double>(grid.n2 - 1);
  return Lambda{l1, l2};
}

GridRegion constrained_region(const QuadraticForm& objective, const Lambda& lam_hat,
                              const BootstrapRun& run, double alpha, double gamma,
                              const GridSpec& grid, int n_units,
                              double delta_override) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DataError("constrained_region: alpha must lie in (0,1)");
  if (run.coeff_reps.empty())
    throw DataError("constrained_region: bootstrap run carries no coefficients");
  GridRegion region;
  region.grid = grid;
  region.gamma = gamma;
  region.n_units = n_units;
  region.lam_hat = lam_hat;
  region.objective = objective;
  region.delta = delta_override > 0.0
                     ? delta_override
                     : 1.0 / std::sqrt(static_cast<double>(n_units));

  const double scale = std::pow(static_cast<double>(n_units), gamma);
  const Vec2 hat{lam_hat.lambda1, lam_hat.lambda2};
  std::vector<double> sup_stats;
  sup_stats.reserve(run.coeff_reps.size());
  int clipped_count = 0;
  for (const QuadraticForm& star : run.coeff_reps) {
    const Mat2 curvature = star.a * 2.0 - objective.a;
    const Mat2 shift = (star.a - objective.a) * 2.0;
    const Vec2 slope = (shift.mul(hat) + (star.b - objective.b)) * scale;
    bool clipped = false;
    sup_stats.push_back(-min_quadratic_free(curvature, slope, &clipped));
    if (clipped) ++clipped_count;
  }
  region.psd_clipped_reps = clipped_count;
  region.c_crit = empirical_quantile(std::move(sup_stats), 1.0 - alpha);

  region.member.assign(
      static_cast<std::size_t>(grid.n1) * static_cast<std::size_t>(grid.n2), 0);
  for (int i1 = 0; i1 < grid.n1; ++i1)
    for (int i2 = 0; i2 < grid.n2; ++i2) {
      const Lambda l = region.point(i1, i2);
      region.member[static_cast<std::size_t>(i1) * grid.n2 + i2] =
          region.contains(l) ? 1 : 0;
    }
  return region;
}

GridSpec default_grid(const BootstrapRun& run, const Lambda& lam_hat) {
  GridSpec spec;
  spec.l1_min = 0.0;
  spec.l1_max = 1.0;
  spec.n1 = 101;
  const Mat2 cov = replicate_covariance(run.lambda_reps);
  const double sd2 = std::sqrt(std::max(cov.m11, 0.0));
  if (sd2 <= 1e-12) {
    spec.l2_min = spec.l2_max = lam_hat.lambda2;
    spec.n2 = 1;
  } else {
    spec.l2_min = lam_hat.lambda2 - 6.0 * sd2;
    spec.l2_max = lam_hat.lambda2 + 6.0 * sd2;
    spec.n2 = 201;
  }
  return spec;
}

}  // namespace binshrink
