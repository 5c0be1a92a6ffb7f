#pragma once

#include <vector>

#include "binshrink/quadratic.hpp"
#include "binshrink/thin.hpp"
#include "binshrink/types.hpp"

namespace binshrink {

// Unit-level resampling with replacement; the whole pipeline (folds,
// cross-fit, coefficients, constrained fit) reruns per replicate on streams
// derived from the replicate index, so results do not depend on scheduling.
// Replicates that die in a singularity or predictor failure are skipped and
// counted; more than 5% skipped fails the run.
struct BootstrapRun {
  int b_requested = 0;
  std::vector<Lambda> lambda_reps;        // constrained fits, replicate order
  std::vector<QuadraticForm> coeff_reps;  // per-replicate coefficients
  int skipped = 0;
  RngSeed seed;
};

BootstrapRun bootstrap_one(const OneSampleDataset& data, const PredictorSpec& predictor,
                           int k_folds, int b, RngSeed seed);
BootstrapRun bootstrap_two(const TwoSampleDataset& data, const PredictorSpec& predictor,
                           int k_folds, int b, RngSeed seed);

// Chi-square quantile with 2 degrees of freedom: tabulated for the standard
// levels, -2 log(alpha) otherwise (exact for this df).
double chi2_quantile_2df(double level);

// Confidence ellipsoid from the bootstrap covariance. Membership statistic is
// N (center - l)' V^-1 (center - l) <= chi2 quantile, with V = N x the sample
// covariance of the replicate estimates.
struct EllipsoidRegion {
  Lambda center;
  Mat2 covariance;  // V = N * cov(replicates)
  double alpha = 0.05;
  double chi2_crit = 0.0;
  int n_units = 0;
  // Without covariates the second coordinate is structurally pinned to the
  // center and the statistic degrades to its first component.
  bool pinned_second = false;

  bool contains(const Lambda& l) const;
};

EllipsoidRegion ellipsoid_region(const BootstrapRun& run, const Lambda& lam_hat,
                                 double alpha, int n_units);

// Confidence region for a possibly-boundary optimum: bootstrap local
// perturbation quantile plus a pointwise grid test of
//   N^(2 gamma) ( L(l) - inf_{|u| <= delta, l+u feasible} L(l+u) ) <= c_crit.
struct GridSpec {
  double l1_min = 0.0, l1_max = 1.0;
  int n1 = 101;
  double l2_min = 0.0, l2_max = 0.0;
  int n2 = 201;
};

struct GridRegion {
  GridSpec grid;
  std::vector<std::uint8_t> member;  // row-major, l1 outer, l2 inner
  double c_crit = 0.0;
  double gamma = 0.5;
  double delta = 0.0;
  int n_units = 0;
  Lambda lam_hat;
  QuadraticForm objective;
  int psd_clipped_reps = 0;  // replicates whose curvature needed clipping

  bool contains(const Lambda& l) const;
  bool empty() const;
  Lambda point(int i1, int i2) const;
};

// gamma = 0.5 and delta = 1/sqrt(N) unless overridden by delta_override > 0.
GridRegion constrained_region(const QuadraticForm& objective, const Lambda& lam_hat,
                              const BootstrapRun& run, double alpha, double gamma,
                              const GridSpec& grid, int n_units,
                              double delta_override = 0.0);

// Default grid: 101 points across [0,1] and 201 points across
// lam_hat2 +/- 6 bootstrap standard deviations (a single row when the spread
// vanishes, e.g. without covariates).
GridSpec default_grid(const BootstrapRun& run, const Lambda& lam_hat);

}  // namespace binshrink
