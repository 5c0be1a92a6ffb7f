// binshrink: shrinkage estimation for many binomial rates and rate
// differences, risk-tuned via an unbiased-risk criterion.
//
// Subcommands: fit, surface, infer, validate, simulate. Every output is a
// plot-ready CSV or a key=value text block; every stochastic path requires an
// explicit --seed and re-running reproduces outputs byte for byte.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binshrink/csv.hpp"
#include "binshrink/infer.hpp"
#include "binshrink/shrink.hpp"
#include "binshrink/sure.hpp"
#include "binshrink/thin.hpp"
#include "binshrink/types.hpp"

namespace {

using namespace binshrink;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PredictorSpec parse_predictor(const std::string& text) {
  PredictorSpec spec;
  if (text == "none") {
    spec.kind = PredictorSpec::Kind::none;
  } else if (text == "constant") {
    spec.kind = PredictorSpec::Kind::constant;
  } else if (text == "ols") {
    spec.kind = PredictorSpec::Kind::ols;
  } else if (text.rfind("external:", 0) == 0) {
    spec.kind = PredictorSpec::Kind::external;
    spec.external_path = text.substr(9);
    if (spec.external_path.empty())
      throw UsageError("--predictor external: requires a file path");
  } else {
    throw UsageError("--predictor must be none|constant|ols|external:PATH");
  }
  return spec;
}

std::vector<double> parse_doubles(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + tok + "' in '" + text + "'");
    }
  }
  return out;
}

struct AxisSpec {
  double lo = 0.0, hi = 0.0;
  int count = 1;
};

AxisSpec parse_axis(const std::string& text) {
  std::vector<double> parts = parse_doubles(text, ':');
  if (parts.size() != 3 || parts[2] < 1.0 || parts[2] != std::floor(parts[2]))
    throw UsageError("axis spec must be MIN:MAX:COUNT, got '" + text + "'");
  AxisSpec a;
  a.lo = parts[0];
  a.hi = parts[1];
  a.count = static_cast<int>(parts[2]);
  if (a.count > 1 && !(a.hi > a.lo))
    throw UsageError("axis spec needs MAX > MIN when COUNT > 1");
  return a;
}

struct CommonOptions {
  std::string input;
  std::string mode = "one";
  std::string predictor_text = "none";
  int k_folds = 10;
  std::optional<std::uint64_t> seed;
  std::string out_prefix;
};

void add_common(CLI::App* cmd, CommonOptions* opt, bool needs_input) {
  if (needs_input)
    cmd->add_option("--input", opt->input, "input CSV path")->required();
  cmd->add_option("--mode", opt->mode, "one|two")
      ->check(CLI::IsMember({"one", "two"}))
      ->capture_default_str();
  cmd->add_option("--predictor", opt->predictor_text,
                  "none|constant|ols|external:PATH")
      ->capture_default_str();
  cmd->add_option("--k", opt->k_folds, "cross-fitting folds")->capture_default_str();
  cmd->add_option("--seed", opt->seed, "seed for all randomized steps");
  cmd->add_option("--out", opt->out_prefix, "output path prefix");
}

RngSeed require_seed(const CommonOptions& opt, const std::string& why) {
  if (!opt.seed)
    throw UsageError("--seed is required (" + why + "); no wall-clock default");
  return RngSeed{*opt.seed};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  return out;
}

std::string seed_text(const CommonOptions& opt) {
  return opt.seed ? std::to_string(*opt.seed) : "none";
}

// --------------------------------------------------------------------------
// Shared pipeline pieces

struct LoadedPredsOne {
  std::optional<CrossFitPredictions> preds;
  const CrossFitPredictions* get() const { return preds ? &*preds : nullptr; }
};

LoadedPredsOne fit_predictions_one(const OneSampleDataset& data,
                                   const PredictorSpec& spec, int k_folds,
                                   const std::optional<std::uint64_t>& seed,
                                   const char* label) {
  LoadedPredsOne out;
  switch (spec.kind) {
    case PredictorSpec::Kind::none:
      break;
    case PredictorSpec::Kind::external: {
      std::vector<int> trials;
      for (const OneSampleUnit& u : data.units) trials.push_back(u.n);
      out.preds = load_external_predictions_one(spec.external_path, data.size(), trials);
      break;
    }
    default: {
      if (!seed) throw UsageError("--seed is required for cross-fitting");
      const auto predictor = spec.kind == PredictorSpec::Kind::constant
                                 ? make_constant_predictor()
                                 : make_ols_predictor();
      RngSeed fold_seed{RngStream(RngSeed{*seed}, label).next_u64()};
      const FoldAssignment folds = assign_folds(data.size(), k_folds, fold_seed);
      out.preds = cross_fit(data, *predictor, folds).preds;
    }
  }
  return out;
}

struct LoadedPredsTwo {
  std::optional<CrossFitPredictions> preds1, preds2;
  const CrossFitPredictions* get1() const { return preds1 ? &*preds1 : nullptr; }
  const CrossFitPredictions* get2() const { return preds2 ? &*preds2 : nullptr; }
};

LoadedPredsTwo fit_predictions_two(const TwoSampleDataset& data,
                                   const PredictorSpec& spec, int k_folds,
                                   const std::optional<std::uint64_t>& seed,
                                   const char* label) {
  LoadedPredsTwo out;
  const OneSampleDataset g1 = data.group(1);
  const OneSampleDataset g2 = data.group(2);
  switch (spec.kind) {
    case PredictorSpec::Kind::none:
      break;
    case PredictorSpec::Kind::external: {
      std::vector<int> t1, t2;
      for (const TwoSampleUnit& u : data.units) {
        t1.push_back(u.group1.n);
        t2.push_back(u.group2.n);
      }
      auto both = load_external_predictions_two(spec.external_path, data.size(), t1, t2);
      out.preds1 = std::move(both.first);
      out.preds2 = std::move(both.second);
      break;
    }
    default: {
      if (!seed) throw UsageError("--seed is required for cross-fitting");
      const auto predictor = spec.kind == PredictorSpec::Kind::constant
                                 ? make_constant_predictor()
                                 : make_ols_predictor();
      RngSeed fold_seed{RngStream(RngSeed{*seed}, label).next_u64()};
      const FoldAssignment folds = assign_folds(data.size(), k_folds, fold_seed);
      out.preds1 = cross_fit(g1, *predictor, folds).preds;
      out.preds2 = cross_fit(g2, *predictor, folds).preds;
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// fit

struct FitOptions : CommonOptions {
  std::string lambda_override;
};

int cmd_fit(const FitOptions& opt) {
  const PredictorSpec spec = parse_predictor(opt.predictor_text);
  std::optional<Lambda> override_lambda;
  if (!opt.lambda_override.empty()) {
    const std::vector<double> parts = parse_doubles(opt.lambda_override, ',');
    if (parts.size() != 2) throw UsageError("--lambda must be L1,L2");
    override_lambda = Lambda{parts[0], parts[1]};
    if (!override_lambda->feasible())
      throw UsageError("--lambda: L1 must lie in [0,1]");
  }

  std::vector<double> estimates;
  Lambda lam;
  std::string constrained_flag = "no";
  std::ostringstream report;

  if (opt.mode == "one") {
    const OneSampleDataset data = load_one_sample(opt.input);
    const LoadedPredsOne lp =
        fit_predictions_one(data, spec, opt.k_folds, opt.seed, "fit-folds");
    if (override_lambda) {
      lam = *override_lambda;
      constrained_flag = "override";
    } else {
      const QuadraticForm q = sure_one_coeffs(data, lp.get());
      lam = fit_lambda(q, /*feasible=*/true);
      try {
        const Lambda unconstrained = fit_lambda(q, /*feasible=*/false);
        const bool same = std::fabs(unconstrained.lambda1 - lam.lambda1) <= 1e-10 &&
                          std::fabs(unconstrained.lambda2 - lam.lambda2) <= 1e-10;
        constrained_flag = same ? "no" : "yes";
      } catch (const NumericError&) {
        constrained_flag = "yes";
      }
    }
    estimates = estimate_one(data, lp.get(), lam);
    const double gm = grand_mean(data);
    double wsum = 0.0, total = 0.0;
    for (int i = 0; i < data.size(); ++i) {
      wsum += data.units[static_cast<std::size_t>(i)].n * estimates[static_cast<std::size_t>(i)];
      total += data.units[static_cast<std::size_t>(i)].n;
    }
    report << "mode=one\n"
           << "lambda1=" << format_double(lam.lambda1) << "\n"
           << "lambda2=" << format_double(lam.lambda2) << "\n"
           << "constrained=" << constrained_flag << "\n"
           << "grand_mean=" << format_double(gm) << "\n"
           << "estimate_weighted_mean=" << format_double(wsum / total) << "\n";
  } else {
    const TwoSampleDataset data = load_two_sample(opt.input);
    const LoadedPredsTwo lp =
        fit_predictions_two(data, spec, opt.k_folds, opt.seed, "fit-folds");
    if (override_lambda) {
      lam = *override_lambda;
      constrained_flag = "override";
    } else {
      const QuadraticForm q = sure_two_coeffs(data, lp.get1(), lp.get2());
      lam = fit_lambda(q, /*feasible=*/true);
      try {
        const Lambda unconstrained = fit_lambda(q, /*feasible=*/false);
        const bool same = std::fabs(unconstrained.lambda1 - lam.lambda1) <= 1e-10 &&
                          std::fabs(unconstrained.lambda2 - lam.lambda2) <= 1e-10;
        constrained_flag = same ? "no" : "yes";
      } catch (const NumericError&) {
        constrained_flag = "yes";
      }
    }
    estimates = estimate_two(data, lp.get1(), lp.get2(), lam);
    const double gm1 = grand_mean(data.group(1));
    const double gm2 = grand_mean(data.group(2));
    double w1 = 0.0, t1 = 0.0, w2 = 0.0, t2 = 0.0;
    const std::vector<double> e1 = estimate_one(data.group(1), lp.get1(), lam);
    const std::vector<double> e2 = estimate_one(data.group(2), lp.get2(), lam);
    for (int i = 0; i < data.size(); ++i) {
      const auto& u = data.units[static_cast<std::size_t>(i)];
      w1 += u.group1.n * e1[static_cast<std::size_t>(i)];
      t1 += u.group1.n;
      w2 += u.group2.n * e2[static_cast<std::size_t>(i)];
      t2 += u.group2.n;
    }
    report << "mode=two\n"
           << "lambda1=" << format_double(lam.lambda1) << "\n"
           << "lambda2=" << format_double(lam.lambda2) << "\n"
           << "constrained=" << constrained_flag << "\n"
           << "grand_mean1=" << format_double(gm1) << "\n"
           << "grand_mean2=" << format_double(gm2) << "\n"
           << "grand_mean_diff=" << format_double(gm1 - gm2) << "\n"
           << "estimate_weighted_mean_diff=" << format_double(w1 / t1 - w2 / t2)
           << "\n";
  }
  report << "predictor=" << opt.predictor_text << "\n"
         << "k=" << opt.k_folds << "\n"
         << "seed=" << seed_text(opt) << "\n";

  {
    std::ofstream est = open_out(opt.out_prefix + "estimates.csv");
    est << "unit,theta_hat\n";
    for (std::size_t i = 0; i < estimates.size(); ++i)
      est << i + 1 << "," << format_double(estimates[i]) << "\n";
  }
  {
    std::ofstream fit = open_out(opt.out_prefix + "fit.txt");
    fit << report.str();
  }
  std::cout << report.str();
  return 0;
}

// --------------------------------------------------------------------------
// surface

struct SurfaceOptions : CommonOptions {
  std::string axis1 = "0:1:21";
  std::string axis2 = "0:0:1";
  double thin_fraction = 0.0;
};

int cmd_surface(const SurfaceOptions& opt) {
  const PredictorSpec spec = parse_predictor(opt.predictor_text);
  const AxisSpec a1 = parse_axis(opt.axis1);
  const AxisSpec a2 = parse_axis(opt.axis2);
  const bool thinned = opt.thin_fraction > 0.0;

  LambdaGrid grid;
  grid.l1_min = a1.lo;
  grid.l1_max = a1.hi;
  grid.n1 = a1.count;
  grid.l2_min = a2.lo;
  grid.l2_max = a2.hi;
  grid.n2 = a2.count;

  std::ofstream out = open_out(opt.out_prefix + "surface.csv");
  out << (thinned ? "lambda1,lambda2,sure,holdout_risk\n" : "lambda1,lambda2,sure\n");

  auto write_row = [&](const Lambda& l, double sure, std::optional<double> holdout) {
    out << format_double(l.lambda1) << "," << format_double(l.lambda2) << ","
        << format_double(sure);
    if (holdout) out << "," << format_double(*holdout);
    out << "\n";
  };

  if (opt.mode == "one") {
    OneSampleDataset data = load_one_sample(opt.input);
    std::optional<ThinningSplitOne> split;
    if (thinned)
      split = thin_one(data, opt.thin_fraction, require_seed(opt, "--thin"));
    const OneSampleDataset& eval_data = thinned ? split->train : data;
    const LoadedPredsOne lp =
        fit_predictions_one(eval_data, spec, opt.k_folds, opt.seed, "surface-folds");
    for (const Lambda& l : grid.points()) {
      const double sure = sure_one_direct(eval_data, lp.get(), l);
      std::optional<double> holdout;
      if (thinned)
        holdout = holdout_risk_one(estimate_one(eval_data, lp.get(), l),
                                   split->holdout, &split->train);
      write_row(l, sure, holdout);
    }
  } else {
    TwoSampleDataset data = load_two_sample(opt.input);
    std::optional<ThinningSplitTwo> split;
    if (thinned)
      split = thin_two(data, opt.thin_fraction, require_seed(opt, "--thin"));
    const TwoSampleDataset& eval_data = thinned ? split->train : data;
    const LoadedPredsTwo lp =
        fit_predictions_two(eval_data, spec, opt.k_folds, opt.seed, "surface-folds");
    for (const Lambda& l : grid.points()) {
      const double sure = sure_two_direct(eval_data, lp.get1(), lp.get2(), l);
      std::optional<double> holdout;
      if (thinned)
        holdout = holdout_risk_two(estimate_two(eval_data, lp.get1(), lp.get2(), l),
                                   split->holdout, &split->train);
      write_row(l, sure, holdout);
    }
  }
  return 0;
}

// --------------------------------------------------------------------------
// infer

struct InferOptions : CommonOptions {
  int b = 500;
  double alpha = 0.05;
  std::string boundary = "no";
  bool allow_small_b = false;
  double gamma = 0.5;
  std::string axis1 = "";
  std::string axis2 = "";
};

int cmd_infer(const InferOptions& opt) {
  const PredictorSpec spec = parse_predictor(opt.predictor_text);
  const RngSeed seed = require_seed(opt, "bootstrap resampling");
  if (opt.b < 100 && !opt.allow_small_b)
    throw UsageError("--b < 100 is unreliable; pass --allow-small-b to override");
  if (opt.b < 2) throw UsageError("--b must be at least 2");

  QuadraticForm q;
  Lambda lam_hat;
  BootstrapRun run;
  int n_units = 0;

  if (opt.mode == "one") {
    const OneSampleDataset data = load_one_sample(opt.input);
    n_units = data.size();
    const LoadedPredsOne lp =
        fit_predictions_one(data, spec, opt.k_folds, opt.seed, "fit-folds");
    q = sure_one_coeffs(data, lp.get());
    lam_hat = fit_lambda(q, /*feasible=*/true);
    run = bootstrap_one(data, spec, opt.k_folds, opt.b, seed);
  } else {
    const TwoSampleDataset data = load_two_sample(opt.input);
    n_units = data.size();
    const LoadedPredsTwo lp =
        fit_predictions_two(data, spec, opt.k_folds, opt.seed, "fit-folds");
    q = sure_two_coeffs(data, lp.get1(), lp.get2());
    lam_hat = fit_lambda(q, /*feasible=*/true);
    run = bootstrap_two(data, spec, opt.k_folds, opt.b, seed);
  }

  if (opt.boundary == "no") {
    const EllipsoidRegion region = ellipsoid_region(run, lam_hat, opt.alpha, n_units);
    std::ostringstream block;
    block << "type=ellipsoid\n"
          << "mode=" << opt.mode << "\n"
          << "lambda1_hat=" << format_double(region.center.lambda1) << "\n"
          << "lambda2_hat=" << format_double(region.center.lambda2) << "\n"
          << "v11=" << format_double(region.covariance.m00) << "\n"
          << "v12=" << format_double(region.covariance.m01) << "\n"
          << "v22=" << format_double(region.covariance.m11) << "\n"
          << "n=" << n_units << "\n"
          << "b=" << opt.b << "\n"
          << "b_skipped=" << run.skipped << "\n"
          << "alpha=" << format_double(opt.alpha) << "\n"
          << "chi2_crit=" << format_double(region.chi2_crit) << "\n"
          << "seed=" << seed_text(opt) << "\n";
    std::ofstream out = open_out(opt.out_prefix + "region.txt");
    out << block.str();
    std::cout << block.str();
    return 0;
  }

  GridSpec grid = default_grid(run, lam_hat);
  if (!opt.axis1.empty()) {
    const AxisSpec a = parse_axis(opt.axis1);
    grid.l1_min = a.lo;
    grid.l1_max = a.hi;
    grid.n1 = a.count;
  }
  if (!opt.axis2.empty()) {
    const AxisSpec a = parse_axis(opt.axis2);
    grid.l2_min = a.lo;
    grid.l2_max = a.hi;
    grid.n2 = a.count;
  }
  const GridRegion region =
      constrained_region(q, lam_hat, run, opt.alpha, opt.gamma, grid, n_units);
  {
    std::ofstream out = open_out(opt.out_prefix + "region.csv");
    out << "lambda1,lambda2,member\n";
    for (int i1 = 0; i1 < grid.n1; ++i1)
      for (int i2 = 0; i2 < grid.n2; ++i2) {
        const Lambda l = region.point(i1, i2);
        out << format_double(l.lambda1) << "," << format_double(l.lambda2) << ","
            << static_cast<int>(
                   region.member[static_cast<std::size_t>(i1) * grid.n2 + i2])
            << "\n";
      }
  }
  std::cout << "type=grid\n"
            << "mode=" << opt.mode << "\n"
            << "lambda1_hat=" << format_double(lam_hat.lambda1) << "\n"
            << "lambda2_hat=" << format_double(lam_hat.lambda2) << "\n"
            << "c_crit=" << format_double(region.c_crit) << "\n"
            << "gamma=" << format_double(region.gamma) << "\n"
            << "delta=" << format_double(region.delta) << "\n"
            << "psd_clipped_reps=" << region.psd_clipped_reps << "\n"
            << "b_skipped=" << run.skipped << "\n"
            << "seed=" << seed_text(opt) << "\n";
  if (region.empty())
    std::cout << "warning=constrained region is empty at this grid resolution\n";
  return 0;
}

// --------------------------------------------------------------------------
// validate

struct ValidateOptions : CommonOptions {
  double fraction = 0.2;
  std::string estimators = "mle,grand_mean,sure_fit";
  std::string axis1 = "0:1:21";
  std::string axis2 = "0:0:1";
};

int cmd_validate(const ValidateOptions& opt) {
  const PredictorSpec spec = parse_predictor(opt.predictor_text);
  const RngSeed seed = require_seed(opt, "data thinning");

  std::vector<EstimatorConfig> configs;
  {
    std::stringstream ss(opt.estimators);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      EstimatorConfig cfg;
      if (tok == "mle") {
        cfg.kind = EstimatorConfig::Kind::mle;
      } else if (tok == "grand_mean") {
        cfg.kind = EstimatorConfig::Kind::grand_mean;
      } else if (tok == "sure_fit") {
        cfg.kind = EstimatorConfig::Kind::sure_fit;
        cfg.predictor = spec;
      } else if (tok.rfind("fixed:", 0) == 0) {
        const std::vector<double> parts = parse_doubles(tok.substr(6), ':');
        if (parts.size() != 2) throw UsageError("fixed estimator must be fixed:L1:L2");
        cfg.kind = EstimatorConfig::Kind::fixed_lambda;
        cfg.lambda = Lambda{parts[0], parts[1]};
        cfg.predictor = spec;
      } else {
        throw UsageError("unknown estimator '" + tok + "'");
      }
      configs.push_back(cfg);
    }
  }
  if (configs.empty()) throw UsageError("--estimators must name at least one estimator");

  const AxisSpec a1 = parse_axis(opt.axis1);
  const AxisSpec a2 = parse_axis(opt.axis2);
  LambdaGrid grid{a1.lo, a1.hi, a1.count, a2.lo, a2.hi, a2.count};

  ComparisonResult result;
  if (opt.mode == "one") {
    result = compare_one(load_one_sample(opt.input), opt.fraction, configs, grid,
                         opt.k_folds, seed);
  } else {
    result = compare_two(load_two_sample(opt.input), opt.fraction, configs, grid,
                         opt.k_folds, seed);
  }

  {
    std::ofstream out = open_out(opt.out_prefix + "comparison.csv");
    out << "estimator,holdout_risk,lambda1,lambda2\n";
    for (const ComparisonRow& row : result.rows) {
      out << row.estimator << "," << format_double(row.holdout_risk) << ",";
      if (row.has_lambda)
        out << format_double(row.lambda_used.lambda1) << ","
            << format_double(row.lambda_used.lambda2);
      else
        out << ",";
      out << "\n";
    }
  }
  {
    std::ofstream out = open_out(opt.out_prefix + "surface.csv");
    out << "lambda1,lambda2,sure,holdout_risk\n";
    for (const SurfacePoint& pt : result.surface)
      out << format_double(pt.lambda.lambda1) << "," << format_double(pt.lambda.lambda2)
          << "," << format_double(pt.sure) << "," << format_double(pt.holdout) << "\n";
  }
  return 0;
}

// --------------------------------------------------------------------------
// simulate

struct SimulateOptions : CommonOptions {
  int n_units = 100;
  std::string trials = "4:12";
  std::string trials2;
  int dim = 0;
  double g_intercept = 0.5;
  std::string g_slopes;
  double g2_intercept = 0.5;
  std::string g2_slopes;
  double noise_sd = 0.05;
  double noise_sd2 = 0.05;
  std::string clip = "0.005:0.995";
};

SyntheticDesign build_design(const SimulateOptions& opt, bool second_group) {
  SyntheticDesign d;
  d.n_units = opt.n_units;
  const std::string trials_text =
      second_group && !opt.trials2.empty() ? opt.trials2 : opt.trials;
  const std::vector<double> tr = parse_doubles(trials_text, ':');
  if (tr.size() != 2) throw UsageError("--trials must be MIN:MAX");
  d.trials_min = static_cast<int>(tr[0]);
  d.trials_max = static_cast<int>(tr[1]);
  d.covariate_dim = opt.dim;
  d.g_intercept = second_group ? opt.g2_intercept : opt.g_intercept;
  const std::string slopes = second_group ? opt.g2_slopes : opt.g_slopes;
  if (!slopes.empty()) d.g_slope = parse_doubles(slopes, ',');
  d.noise_sd = second_group ? opt.noise_sd2 : opt.noise_sd;
  const std::vector<double> cl = parse_doubles(opt.clip, ':');
  if (cl.size() != 2) throw UsageError("--clip must be LO:HI");
  d.clip_lo = cl[0];
  d.clip_hi = cl[1];
  return d;
}

int cmd_simulate(const SimulateOptions& opt) {
  const RngSeed seed = require_seed(opt, "synthetic data generation");
  if (opt.mode == "one") {
    const SyntheticOne sim = simulate_one(build_design(opt, false), seed);
    {
      std::ofstream out = open_out(opt.out_prefix + "data.csv");
      write_one_sample(out, sim.data);
    }
    std::ofstream out = open_out(opt.out_prefix + "truth.csv");
    out << "unit,theta,g\n";
    for (std::size_t i = 0; i < sim.theta.size(); ++i)
      out << i + 1 << "," << format_double(sim.theta[i]) << ","
          << format_double(sim.g_clipped[i]) << "\n";
  } else {
    const SyntheticTwo sim =
        simulate_two(build_design(opt, false), build_design(opt, true), seed);
    {
      std::ofstream out = open_out(opt.out_prefix + "data.csv");
      write_two_sample(out, sim.data);
    }
    std::ofstream out = open_out(opt.out_prefix + "truth.csv");
    out << "unit,theta1,theta2,g1,g2\n";
    for (std::size_t i = 0; i < sim.theta1.size(); ++i)
      out << i + 1 << "," << format_double(sim.theta1[i]) << ","
          << format_double(sim.theta2[i]) << "," << format_double(sim.g1_clipped[i])
          << "," << format_double(sim.g2_clipped[i]) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shrinkage estimation for many binomial rates"};
  app.require_subcommand(1);

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand("fit", "fit the shrinkage parameter and estimates");
  add_common(fit, &fit_opt, true);
  fit->add_option("--lambda", fit_opt.lambda_override, "override as L1,L2");

  SurfaceOptions surf_opt;
  CLI::App* surface = app.add_subcommand("surface", "risk-estimate surface over a grid");
  add_common(surface, &surf_opt, true);
  surface->add_option("--grid-lambda1", surf_opt.axis1, "MIN:MAX:COUNT")
      ->capture_default_str();
  surface->add_option("--grid-lambda2", surf_opt.axis2, "MIN:MAX:COUNT")
      ->capture_default_str();
  surface->add_option("--thin", surf_opt.thin_fraction,
                      "holdout fraction; adds a holdout_risk column");

  InferOptions infer_opt;
  CLI::App* infer = app.add_subcommand("infer", "confidence region for the parameter");
  add_common(infer, &infer_opt, true);
  infer->add_option("--b", infer_opt.b, "bootstrap replicates")->capture_default_str();
  infer->add_option("--alpha", infer_opt.alpha, "miscoverage level")
      ->capture_default_str();
  infer->add_option("--boundary", infer_opt.boundary,
                    "yes: boundary-safe grid region; no: ellipsoid")
      ->check(CLI::IsMember({"yes", "no"}))
      ->capture_default_str();
  infer->add_flag("--allow-small-b", infer_opt.allow_small_b,
                  "permit fewer than 100 replicates");
  infer->add_option("--gamma", infer_opt.gamma, "local rate exponent")
      ->capture_default_str();
  infer->add_option("--grid-lambda1", infer_opt.axis1, "MIN:MAX:COUNT");
  infer->add_option("--grid-lambda2", infer_opt.axis2, "MIN:MAX:COUNT");

  ValidateOptions val_opt;
  CLI::App* validate =
      app.add_subcommand("validate", "holdout comparison of estimators via thinning");
  add_common(validate, &val_opt, true);
  validate->add_option("--fraction", val_opt.fraction, "holdout trial fraction")
      ->capture_default_str();
  validate->add_option("--estimators", val_opt.estimators,
                       "comma list: mle,grand_mean,fixed:L1:L2,sure_fit")
      ->capture_default_str();
  validate->add_option("--grid-lambda1", val_opt.axis1, "MIN:MAX:COUNT")
      ->capture_default_str();
  validate->add_option("--grid-lambda2", val_opt.axis2, "MIN:MAX:COUNT")
      ->capture_default_str();

  SimulateOptions sim_opt;
  CLI::App* simulate = app.add_subcommand("simulate", "generate synthetic data + truth");
  add_common(simulate, &sim_opt, false);
  simulate->add_option("--n-units", sim_opt.n_units, "number of units")
      ->capture_default_str();
  simulate->add_option("--trials", sim_opt.trials, "MIN:MAX trial counts")
      ->capture_default_str();
  simulate->add_option("--trials2", sim_opt.trials2, "group-2 MIN:MAX (two-sample)");
  simulate->add_option("--d", sim_opt.dim, "covariate dimension")->capture_default_str();
  simulate->add_option("--g-intercept", sim_opt.g_intercept, "rate model intercept")
      ->capture_default_str();
  simulate->add_option("--g-slopes", sim_opt.g_slopes, "comma list of slopes");
  simulate->add_option("--g2-intercept", sim_opt.g2_intercept,
                       "group-2 intercept (two-sample)");
  simulate->add_option("--g2-slopes", sim_opt.g2_slopes, "group-2 slopes (two-sample)");
  simulate->add_option("--noise-sd", sim_opt.noise_sd, "sd of rate noise")
      ->capture_default_str();
  simulate->add_option("--noise-sd2", sim_opt.noise_sd2, "group-2 noise sd");
  simulate->add_option("--clip", sim_opt.clip, "LO:HI clipping for generated rates")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fit) return cmd_fit(fit_opt);
    if (*surface) return cmd_surface(surf_opt);
    if (*infer) return cmd_infer(infer_opt);
    if (*validate) return cmd_validate(val_opt);
    if (*simulate) return cmd_simulate(sim_opt);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const PredictorError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
