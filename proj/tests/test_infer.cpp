#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "binshrink/infer.hpp"
#include "binshrink/rng.hpp"
#include "binshrink/shrink.hpp"
#include "binshrink/sure.hpp"
#include "binshrink/thin.hpp"
#include "test_support.hpp"

using namespace binshrink;
using testsupport::make_one;

TEST_SUITE_BEGIN("infer");

namespace {

SyntheticOne interior_design(std::uint64_t seed, int n_units = 250) {
  SyntheticDesign sd;
  sd.n_units = n_units;
  sd.trials_min = 5;
  sd.trials_max = 15;
  sd.covariate_dim = 1;
  sd.g_intercept = 0.4;
  sd.g_slope = {0.12};
  sd.noise_sd = 0.08;
  return simulate_one(sd, RngSeed{seed});
}

}  // namespace

TEST_CASE("bootstrap is reproducible for a fixed seed") {
  RngStream rng(RngSeed{71}, "boot-repro");
  const OneSampleDataset d = testsupport::random_one(rng, 25, 12);
  PredictorSpec spec;  // none
  const BootstrapRun a = bootstrap_one(d, spec, 5, 2, RngSeed{3});
  const BootstrapRun b = bootstrap_one(d, spec, 5, 2, RngSeed{3});
  REQUIRE(a.lambda_reps.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.lambda_reps[i].lambda1 == b.lambda_reps[i].lambda1);
    CHECK(a.lambda_reps[i].lambda2 == b.lambda_reps[i].lambda2);
  }
}

TEST_CASE("bootstrap does not depend on the thread count") {
  RngStream rng(RngSeed{72}, "boot-threads");
  const OneSampleDataset d = testsupport::random_one(rng, 40, 10);
  PredictorSpec spec;
  setenv("BINSHRINK_THREADS", "1", 1);
  const BootstrapRun serial = bootstrap_one(d, spec, 5, 64, RngSeed{4});
  setenv("BINSHRINK_THREADS", "7", 1);
  const BootstrapRun parallel = bootstrap_one(d, spec, 5, 64, RngSeed{4});
  unsetenv("BINSHRINK_THREADS");
  REQUIRE(serial.lambda_reps.size() == parallel.lambda_reps.size());
  for (std::size_t i = 0; i < serial.lambda_reps.size(); ++i)
    CHECK(serial.lambda_reps[i].lambda1 == parallel.lambda_reps[i].lambda1);
}

TEST_CASE("resampling a degenerate dataset returns one fit everywhere") {
  const OneSampleDataset d = make_one({{8, 3}, {8, 3}, {8, 3}, {8, 3}});
  PredictorSpec spec;
  const BootstrapRun run = bootstrap_one(d, spec, 2, 16, RngSeed{5});
  REQUIRE(run.lambda_reps.size() == 16);
  for (const Lambda& l : run.lambda_reps) {
    CHECK(l.lambda1 == run.lambda_reps[0].lambda1);
    CHECK(l.lambda2 == 0.0);
  }
}

TEST_CASE("interior design gives a finite, positive-definite replicate covariance") {
  const SyntheticOne sim = interior_design(81);
  PredictorSpec spec;
  spec.kind = PredictorSpec::Kind::ols;
  const BootstrapRun run = bootstrap_one(sim.data, spec, 10, 500, RngSeed{6});
  CHECK(run.skipped == 0);
  const EllipsoidRegion region =
      ellipsoid_region(run, Lambda{0.5, 0.5}, 0.05, sim.data.size());
  const EigenSym2 e = eigen_sym(region.covariance);
  CHECK(e.values[0] > 0.0);
  CHECK(std::isfinite(e.values[1]));
}

TEST_CASE("chi-square critical values") {
  CHECK(chi2_quantile_2df(0.95) == doctest::Approx(5.991464547107979).epsilon(1e-15));
  // Cross-checked against the tail probability oracle.
  CHECK(testsupport::chi2_pvalue(chi2_quantile_2df(0.95), 2) ==
        doctest::Approx(0.05).epsilon(1e-10));
  CHECK(testsupport::chi2_pvalue(chi2_quantile_2df(0.99), 2) ==
        doctest::Approx(0.01).epsilon(1e-10));
  CHECK(chi2_quantile_2df(0.875) ==
        doctest::Approx(-2.0 * std::log(0.125)).epsilon(1e-15));
}

TEST_CASE("ellipsoid contains its center and shrinks with alpha") {
  const SyntheticOne sim = interior_design(82, 120);
  PredictorSpec spec;
  spec.kind = PredictorSpec::Kind::constant;
  const BootstrapRun run = bootstrap_one(sim.data, spec, 5, 120, RngSeed{7});
  const QuadraticForm q = sure_one_coeffs(sim.data, nullptr);
  const Lambda lam_hat = fit_lambda(q, true);
  const EllipsoidRegion wide = ellipsoid_region(run, lam_hat, 0.01, sim.data.size());
  const EllipsoidRegion narrow = ellipsoid_region(run, lam_hat, 0.50, sim.data.size());
  CHECK(wide.contains(lam_hat));
  CHECK(narrow.contains(lam_hat));
  // Membership is monotone: anything inside the narrow region is inside the
  // wide one.
  RngStream rng(RngSeed{73}, "monotone");
  for (int rep = 0; rep < 200; ++rep) {
    const Lambda probe{2.0 * rng.uniform() - 0.5, 4.0 * rng.uniform() - 2.0};
    if (narrow.contains(probe)) CHECK(wide.contains(probe));
  }
}

TEST_CASE("ellipsoid membership ignores replicate order") {
  const SyntheticOne sim = interior_design(83, 100);
  PredictorSpec spec;
  spec.kind = PredictorSpec::Kind::constant;
  const BootstrapRun run = bootstrap_one(sim.data, spec, 5, 100, RngSeed{8});
  BootstrapRun shuffled = run;
  RngStream rng(RngSeed{74}, "shuffle");
  rng.shuffle(shuffled.lambda_reps);
  const Lambda lam_hat{0.4, 0.0};
  const EllipsoidRegion a = ellipsoid_region(run, lam_hat, 0.05, sim.data.size());
  const EllipsoidRegion b = ellipsoid_region(shuffled, lam_hat, 0.05, sim.data.size());
  for (int rep = 0; rep < 100; ++rep) {
    const Lambda probe{rng.uniform(), rng.uniform() - 0.5};
    CHECK(a.contains(probe) == b.contains(probe));
  }
}

TEST_CASE("singular bootstrap covariance is reported") {
  BootstrapRun run;
  run.b_requested = 3;
  run.lambda_reps = {Lambda{0.5, 0.0}, Lambda{0.5, 0.0}, Lambda{0.5, 0.0}};
  CHECK_THROWS_AS(ellipsoid_region(run, Lambda{0.5, 0.0}, 0.05, 50), NumericError);
}

TEST_CASE("the fitted parameter always belongs to the grid region") {
  const SyntheticOne sim = interior_design(84, 150);
  PredictorSpec spec;
  spec.kind = PredictorSpec::Kind::ols;
  const FoldAssignment folds = assign_folds(sim.data.size(), 10, RngSeed{9});
  const CrossFitPredictions preds =
      cross_fit(sim.data, *make_ols_predictor(), folds).preds;
  const QuadraticForm q = sure_one_coeffs(sim.data, &preds);
  const Lambda lam_hat = fit_lambda(q, true);
  const BootstrapRun run = bootstrap_one(sim.data, spec, 10, 150, RngSeed{10});
  const GridRegion region = constrained_region(q, lam_hat, run, 0.05, 0.5,
                                               default_grid(run, lam_hat),
                                               sim.data.size());
  CHECK(region.contains(lam_hat));
  CHECK_FALSE(region.empty());
}

TEST_CASE("interior design: grid region is a bounded superset of the ellipsoid") {
  // The local-perturbation calibrator is conservative relative to the Wald
  // ellipsoid (its replicate infimum runs over all of R^2 while the grid
  // statistic is capped by the delta ball), so on an interior design the grid
  // region should essentially contain the ellipsoid without degenerating to
  // the whole window.
  const SyntheticOne sim = interior_design(85, 400);
  PredictorSpec spec;
  spec.kind = PredictorSpec::Kind::ols;
  const FoldAssignment folds = assign_folds(sim.data.size(), 10, RngSeed{11});
  const CrossFitPredictions preds =
      cross_fit(sim.data, *make_ols_predictor(), folds).preds;
  const QuadraticForm q = sure_one_coeffs(sim.data, &preds);
  const Lambda lam_hat = fit_lambda(q, true);
  const BootstrapRun run = bootstrap_one(sim.data, spec, 10, 200, RngSeed{12});
  const GridSpec grid = default_grid(run, lam_hat);
  const GridRegion region =
      constrained_region(q, lam_hat, run, 0.05, 0.5, grid, sim.data.size());
  const EllipsoidRegion ellipse = ellipsoid_region(run, lam_hat, 0.05, sim.data.size());

  int ell_cells = 0, ell_inside_grid = 0, grid_cells = 0;
  const int total = grid.n1 * grid.n2;
  for (int i1 = 0; i1 < grid.n1; ++i1)
    for (int i2 = 0; i2 < grid.n2; ++i2) {
      const Lambda p = region.point(i1, i2);
      const bool a = region.member[static_cast<std::size_t>(i1) * grid.n2 + i2] != 0;
      const bool b = ellipse.contains(p);
      grid_cells += a ? 1 : 0;
      if (b) {
        ++ell_cells;
        if (a) ++ell_inside_grid;
      }
    }
  REQUIRE(ell_cells > 0);
  CHECK(static_cast<double>(ell_inside_grid) / ell_cells >= 0.99);
  CHECK(grid_cells < total);  // the window is not saturated
}

TEST_CASE("an off-target grid window reports an empty region, not an error") {
  const SyntheticOne sim = interior_design(86, 200);
  PredictorSpec spec;
  const QuadraticForm q = sure_one_coeffs(sim.data, nullptr);
  const Lambda lam_hat = fit_lambda(q, true);
  const BootstrapRun run = bootstrap_one(sim.data, spec, 5, 120, RngSeed{13});
  GridSpec grid;
  grid.l1_min = lam_hat.lambda1 < 0.5 ? 0.98 : 0.0;
  grid.l1_max = lam_hat.lambda1 < 0.5 ? 1.0 : 0.02;
  grid.n1 = 3;
  grid.l2_min = grid.l2_max = 0.0;
  grid.n2 = 1;
  const GridRegion region =
      constrained_region(q, lam_hat, run, 0.05, 0.5, grid, sim.data.size());
  CHECK(region.empty());
}

TEST_CASE("more than five percent failed replicates aborts the run") {
  // Two units with identical rates and a covariate column of zeros: the OLS
  // normal system is exactly collinear on every resample.
  OneSampleDataset d;
  d.covariate_dim = 1;
  for (int i = 0; i < 8; ++i) d.units.push_back({6, 3, {0.0}});
  PredictorSpec spec;
  spec.kind = PredictorSpec::Kind::ols;
  CHECK_THROWS_AS(bootstrap_one(d, spec, 2, 16, RngSeed{14}), NumericError);
}

TEST_SUITE_END();
