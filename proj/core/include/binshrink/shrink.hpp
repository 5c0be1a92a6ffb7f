#pragma once

#include <memory>
#include <string>
#include <vector>

#include "binshrink/quadratic.hpp"
#include "binshrink/sure.hpp"
#include "binshrink/types.hpp"

namespace binshrink {

// Balanced fold labels in 1..k, one per unit, sizes differing by at most one.
struct FoldAssignment {
  std::vector<int> fold_of;
  int k = 0;

  int size() const { return static_cast<int>(fold_of.size()); }
};

FoldAssignment assign_folds(int n_units, int k, RngSeed seed);

// A fitted prediction model.
struct PredictorModel {
  virtual ~PredictorModel() = default;
  virtual double predict(const std::vector<double>& x) const = 0;
};

// Deterministic map from a training set to a model. Implementations must be
// safe to call concurrently on disjoint training sets.
struct Predictor {
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<PredictorModel> fit(
      const std::vector<std::vector<double>>& x,
      const std::vector<double>& targets) const = 0;
};

// Predicts the training mean of the targets, ignoring covariates.
std::unique_ptr<Predictor> make_constant_predictor();

// Least squares of the targets on the covariates with an intercept. A mildly
// ill-conditioned normal system falls back to a 1e-8 ridge; an exactly
// rank-deficient design throws PredictorError.
std::unique_ptr<Predictor> make_ols_predictor();

// Cross-fitting bookkeeping kept alongside the predictions: which units
// trained each fold model.
struct CrossFitResult {
  CrossFitPredictions preds;
  FoldAssignment folds;
  std::vector<std::vector<int>> training_units;  // [fold-1] -> unit indices
};

// Fits one model per fold on the complement of the fold and predicts each
// unit with the model that never saw it. Targets are the raw rates y_i / n_i.
// Requires covariates; without them use a null predictions pointer downstream.
CrossFitResult cross_fit(const OneSampleDataset& data, const Predictor& predictor,
                         const FoldAssignment& folds);

// External per-unit predictions: CSV with columns unit,fold,g_hat for the
// one-sample case and unit,fold,g1_hat,g2_hat for the two-sample case.
// Values are clipped to [0,1] on load; every unit 1..N must appear once.
CrossFitPredictions load_external_predictions_one(const std::string& path, int n_units,
                                                  const std::vector<int>& trials);
std::pair<CrossFitPredictions, CrossFitPredictions> load_external_predictions_two(
    const std::string& path, int n_units, const std::vector<int>& trials1,
    const std::vector<int>& trials2);

// Per-unit shrinkage estimates
//   theta_i = l1 y_i/n_i + (1 - l1) grand_mean + l2 (g_i - g_bar).
// Their size-weighted average equals the grand mean for every lambda.
std::vector<double> estimate_one(const OneSampleDataset& data,
                                 const CrossFitPredictions* preds, const Lambda& lam);

// Group-wise difference of the one-sample estimator, sharing one lambda.
std::vector<double> estimate_two(const TwoSampleDataset& data,
                                 const CrossFitPredictions* preds1,
                                 const CrossFitPredictions* preds2, const Lambda& lam);

// Minimizer of a risk quadratic. feasible = false solves the stationarity
// system outright (throws NumericError when the matrix is singular beyond
// condition 1e12); feasible = true minimizes over [0,1] x R, profiling the
// second coordinate out in closed form and clamping the first. A vanishing
// prediction-direction curvature (a11 <= 1e-12 trace) degrades to the 1-D
// problem with lambda2 = 0.
Lambda fit_lambda(const QuadraticForm& q, bool feasible);

}  // namespace binshrink
