#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace binshrink {

// Errors caused by bad input data (files, invalid counts, misaligned vectors).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Errors caused by numerical degeneracy (singular coefficient matrices, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Errors raised by prediction models (rank-deficient designs, ...).
struct PredictorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One binomial observation: y successes out of n trials, optional covariates.
struct OneSampleUnit {
  int n = 0;
  int y = 0;
  std::vector<double> x;

  double rate() const { return static_cast<double>(y) / static_cast<double>(n); }
};

struct TwoSampleUnit {
  OneSampleUnit group1;
  OneSampleUnit group2;
};

struct OneSampleDataset {
  std::vector<OneSampleUnit> units;
  int covariate_dim = 0;

  int size() const { return static_cast<int>(units.size()); }
  bool has_covariates() const { return covariate_dim > 0; }

  // Throws DataError on any violated invariant. `where` prefixes messages.
  void validate(const std::string& where = "dataset") const;
};

struct TwoSampleDataset {
  std::vector<TwoSampleUnit> units;
  int covariate_dim = 0;  // per group

  int size() const { return static_cast<int>(units.size()); }
  bool has_covariates() const { return covariate_dim > 0; }

  void validate(const std::string& where = "dataset") const;

  OneSampleDataset group(int which) const;  // which in {1,2}
};

// Size-weighted pooled success rate, sum(y_i) / sum(n_i).
double grand_mean(const OneSampleDataset& data);

// Shrinkage parameter: lambda1 in [0,1] weights the per-unit rate against the
// grand mean, lambda2 in R weights the centered prediction term.
struct Lambda {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  bool feasible() const { return lambda1 >= 0.0 && lambda1 <= 1.0; }
};

// Seed for all stochastic operations. Streams are derived per task label so
// results do not depend on evaluation order or thread count.
struct RngSeed {
  std::uint64_t value = 0;
};

}  // namespace binshrink
