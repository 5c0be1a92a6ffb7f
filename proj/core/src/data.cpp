#include "binshrink/types.hpp"

#include <sstream>

namespace binshrink {

namespace {

void check_unit(const OneSampleUnit& u, int dim, const std::string& where, int row) {
  std::ostringstream msg;
  if (u.n < 2) {
    msg << where << ": row " << row << ": trial count must be >= 2, got " << u.n;
    throw DataError(msg.str());
  }
  if (u.y < 0 || u.y > u.n) {
    msg << where << ": row " << row << ": success count " << u.y
        << " outside [0, " << u.n << "]";
    throw DataError(msg.str());
  }
  if (static_cast<int>(u.x.size()) != dim) {
    msg << where << ": row " << row << ": ragged covariates (expected " << dim
        << " value(s), got " << u.x.size() << ")";
    throw DataError(msg.str());
  }
  for (double v : u.x) {
    if (!(v == v) || v - v != 0.0) {
      msg << where << ": row " << row << ": non-finite covariate";
      throw DataError(msg.str());
    }
  }
}

}  // namespace

void OneSampleDataset::validate(const std::string& where) const {
  if (units.empty()) throw DataError(where + ": dataset is empty");
  for (int i = 0; i < size(); ++i) check_unit(units[i], covariate_dim, where, i + 1);
  const double gm = grand_mean(*this);
  if (!(gm >= 0.0 && gm <= 1.0))
    throw DataError(where + ": grand mean outside [0,1]");
}

void TwoSampleDataset::validate(const std::string& where) const {
  if (units.empty()) throw DataError(where + ": dataset is empty");
  for (int i = 0; i < size(); ++i) {
    check_unit(units[i].group1, covariate_dim, where + " (group 1)", i + 1);
    check_unit(units[i].group2, covariate_dim, where + " (group 2)", i + 1);
  }
}

OneSampleDataset TwoSampleDataset::group(int which) const {
  OneSampleDataset out;
  out.covariate_dim = covariate_dim;
  out.units.reserve(units.size());
  for (const TwoSampleUnit& u : units)
    out.units.push_back(which == 1 ? u.group1 : u.group2);
  return out;
}

double grand_mean(const OneSampleDataset& data) {
  long long y = 0;
  long long n = 0;
  for (const OneSampleUnit& u : data.units) {
    y += u.y;
    n += u.n;
  }
  if (n == 0) throw DataError("grand_mean: dataset has no trials");
  return static_cast<double>(y) / static_cast<double>(n);
}

}  // namespace binshrink
