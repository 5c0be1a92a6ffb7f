#pragma once

#include <vector>

#include "binshrink/quadratic.hpp"
#include "binshrink/types.hpp"

namespace binshrink {

// Out-of-fold predictor outputs, clipped to [0,1], plus their size-weighted
// mean. Produced by cross_fit() or loaded from an external file.
struct CrossFitPredictions {
  std::vector<double> g_hat;
  double weighted_mean = 0.0;

  int size() const { return static_cast<int>(g_hat.size()); }
};

// Computes the size-weighted mean and clips every entry into [0,1].
CrossFitPredictions make_predictions(std::vector<double> g_hat,
                                     const std::vector<int>& trials);

// Risk estimate for the shrinkage estimator at a given parameter, evaluated
// by applying the outcome transform to each unit's estimator table with the
// grand mean and the predictions held fixed. `preds` may be null, which pins
// the prediction term to zero.
double sure_one_direct(const OneSampleDataset& data, const CrossFitPredictions* preds,
                       const Lambda& lam);

double sure_two_direct(const TwoSampleDataset& data, const CrossFitPredictions* preds1,
                       const CrossFitPredictions* preds2, const Lambda& lam);

// The same risk estimates as explicit quadratic functions of the parameter.
// The quadratic coefficient is an average of outer products (hence PSD); the
// linear coefficient uses the O(N) closed form; the constant is pinned by one
// direct evaluation at lambda = (0,0), so eval() and the direct form agree
// there exactly. Without covariates the second row/column of `a` and second
// entry of `b` are exactly zero.
QuadraticForm sure_one_coeffs(const OneSampleDataset& data,
                              const CrossFitPredictions* preds);

QuadraticForm sure_two_coeffs(const TwoSampleDataset& data,
                              const CrossFitPredictions* preds1,
                              const CrossFitPredictions* preds2);

}  // namespace binshrink
