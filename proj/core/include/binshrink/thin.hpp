#pragma once

#include <functional>
#include <string>
#include <vector>

#include "binshrink/quadratic.hpp"
#include "binshrink/rng.hpp"
#include "binshrink/types.hpp"

namespace binshrink {

// Exact inverse-CDF draw from Hypergeometric(population m + rest, `successes`
// marked, m drawn): the number of marked elements among the m drawn. The pmf
// is walked with a log-space start and a multiplicative recurrence.
int hypergeom_sample(int m, int rest, int successes, RngStream& rng);

// A count split into two independent halves sharing the same underlying rate:
// the training half keeps (n_i - m_i, y_i - y1_i), the holdout half (m_i, y1_i).
struct ThinningSplitOne {
  OneSampleDataset train;
  OneSampleDataset holdout;
};

struct ThinningSplitTwo {
  TwoSampleDataset train;
  TwoSampleDataset holdout;
};

// Holdout sizes m_i = max(1, floor(fraction * n_i)); a unit whose training
// half would drop below 2 trials is rejected with a diagnostic. Covariates are
// carried into both halves. Per-unit draws use streams ("thin", i), so the
// split is independent of evaluation order.
ThinningSplitOne thin_one(const OneSampleDataset& data, double fraction, RngSeed seed);
ThinningSplitTwo thin_two(const TwoSampleDataset& data, double fraction, RngSeed seed);

// Unbiased holdout estimate of the shifted risk
//   (1/N) sum_i E[est_i^2] - 2 theta_i E[est_i]
// for estimates computed from the training half only:
//   (1/N) sum_i [ est_i^2 - 2 (y1_i / m_i) est_i ].
// Passing the holdout rates themselves as estimates is rejected; supplying
// the training half lets the guard wave through the rare legitimate
// coincidence where a train-side estimator happens to reproduce them.
double holdout_risk_one(const std::vector<double>& estimates,
                        const OneSampleDataset& holdout,
                        const OneSampleDataset* train = nullptr);
double holdout_risk_two(const std::vector<double>& estimates,
                        const TwoSampleDataset& holdout,
                        const TwoSampleDataset* train = nullptr);

// ---------------------------------------------------------------------------
// Synthetic data with known truth.

struct SyntheticDesign {
  int n_units = 100;
  int trials_min = 4;
  int trials_max = 12;
  int covariate_dim = 0;
  double g_intercept = 0.5;
  std::vector<double> g_slope;  // one entry per covariate
  double noise_sd = 0.0;        // sd of the rate noise around g(x)
  double clip_lo = 0.005;       // generated rates clipped into [clip_lo, clip_hi]
  double clip_hi = 0.995;
};

struct SyntheticOne {
  OneSampleDataset data;
  std::vector<double> theta;
  // g(x_i) clipped into [0,1]: the prediction vector a consistent model
  // converges to, used by the exact-risk oracle.
  std::vector<double> g_clipped;
};

struct SyntheticTwo {
  TwoSampleDataset data;
  std::vector<double> theta1, theta2;
  std::vector<double> g1_clipped, g2_clipped;
};

// Covariates, rates and counts drawn from per-task streams of `seed`.
SyntheticOne simulate_one(const SyntheticDesign& design, RngSeed seed);
SyntheticTwo simulate_two(const SyntheticDesign& d1, const SyntheticDesign& d2,
                          RngSeed seed);

// Exact shifted risk (1/N) sum_i { E[t_i(Y_i)^2] - 2 theta_i E[t_i(Y_i)] } of a
// per-unit outcome-table estimator, by enumerating each Bin(n_i, theta_i).
double exact_risk_tables(const std::vector<int>& trials, const std::vector<double>& theta,
                         const std::function<double(int unit, int outcome)>& table);

// The true squared-error risk of the shrinkage family as an explicit quadratic
// in lambda, computed from binomial moments with a fixed prediction vector
// (pass null for the no-covariate family). eval() returns the L2 risk; its
// minimizer over [0,1] x R is the oracle parameter.
QuadraticForm oracle_risk_quadratic_one(const std::vector<int>& trials,
                                        const std::vector<double>& theta,
                                        const std::vector<double>* preds);
QuadraticForm oracle_risk_quadratic_two(const std::vector<int>& trials1,
                                        const std::vector<double>& theta1,
                                        const std::vector<int>& trials2,
                                        const std::vector<double>& theta2,
                                        const std::vector<double>* preds1,
                                        const std::vector<double>* preds2);

// The same shifted risk the SURE targets: L2 risk minus the mean squared truth.
double shift_risk_constant_one(const std::vector<double>& theta);
double shift_risk_constant_two(const std::vector<double>& theta1,
                               const std::vector<double>& theta2);

// ---------------------------------------------------------------------------
// Estimator comparison on one thinning split.

struct PredictorSpec {
  enum class Kind { none, constant, ols, external };
  Kind kind = Kind::none;
  std::string external_path;
};

struct EstimatorConfig {
  enum class Kind { mle, grand_mean, fixed_lambda, sure_fit };
  Kind kind = Kind::mle;
  Lambda lambda;        // fixed_lambda only
  PredictorSpec predictor;  // sure_fit only
  std::string label() const;
};

struct SurfacePoint {
  Lambda lambda;
  double sure = 0.0;
  double holdout = 0.0;
};

struct ComparisonRow {
  std::string estimator;
  double holdout_risk = 0.0;
  Lambda lambda_used;
  bool has_lambda = false;
};

struct LambdaGrid {
  double l1_min = 0.0, l1_max = 1.0;
  int n1 = 21;
  double l2_min = 0.0, l2_max = 0.0;
  int n2 = 1;

  std::vector<Lambda> points() const;
};

struct ComparisonResult {
  std::vector<ComparisonRow> rows;
  std::vector<SurfacePoint> surface;  // SURE on train vs holdout risk per grid point
};

// Thins once, fits every configured estimator on the training half and scores
// it on the holdout half; also sweeps the grid for the paired surfaces.
ComparisonResult compare_one(const OneSampleDataset& data, double fraction,
                             const std::vector<EstimatorConfig>& configs,
                             const LambdaGrid& grid, int k_folds, RngSeed seed);
ComparisonResult compare_two(const TwoSampleDataset& data, double fraction,
                             const std::vector<EstimatorConfig>& configs,
                             const LambdaGrid& grid, int k_folds, RngSeed seed);

}  // namespace binshrink
