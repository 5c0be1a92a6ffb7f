#include "binshrink/shrink.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "binshrink/rng.hpp"

namespace binshrink {

FoldAssignment assign_folds(int n_units, int k, RngSeed seed) {
  if (k < 2 || k > n_units)
    throw DataError("assign_folds: need 2 <= K <= N");
  FoldAssignment fa;
  fa.k = k;
  fa.fold_of.resize(static_cast<std::size_t>(n_units));
  // Round-robin labels, then a seeded shuffle: balanced and deterministic.
  for (int i = 0; i < n_units; ++i) fa.fold_of[static_cast<std::size_t>(i)] = i % k + 1;
  RngStream rng(seed, "folds");
  rng.shuffle(fa.fold_of);
  return fa;
}

namespace {

class ConstantModel : public PredictorModel {
 public:
  explicit ConstantModel(double mean) : mean_(mean) {}
  double predict(const std::vector<double>&) const override { return mean_; }

 private:
  double mean_;
};

class ConstantPredictor : public Predictor {
 public:
  std::string name() const override { return "constant"; }
  std::unique_ptr<PredictorModel> fit(const std::vector<std::vector<double>>&,
                                      const std::vector<double>& targets) const override {
    if (targets.empty()) throw PredictorError("constant: empty training set");
    const double mean =
        std::accumulate(targets.begin(), targets.end(), 0.0) /
        static_cast<double>(targets.size());
    return std::make_unique<ConstantModel>(mean);
  }
};

class LinearModel : public PredictorModel {
 public:
  explicit LinearModel(std::vector<double> coef) : coef_(std::move(coef)) {}
  double predict(const std::vector<double>& x) const override {
    double v = coef_[0];
    for (std::size_t j = 0; j < x.size(); ++j) v += coef_[j + 1] * x[j];
    return v;
  }

 private:
  std::vector<double> coef_;  // intercept first
};

// Gaussian elimination with partial pivoting on the (d+1)-dim normal system.
// Records the smallest pivot relative to the matrix scale; aborts on an
// exactly vanishing pivot.
bool solve_normal_equations(std::vector<std::vector<double>> m, std::vector<double> rhs,
                            std::vector<double>* out, double* min_rel_pivot) {
  const std::size_t d = rhs.size();
  double scale = 0.0;
  for (const auto& row : m)
    for (double v : row) scale = std::max(scale, std::fabs(v));
  *min_rel_pivot = 0.0;
  if (scale == 0.0) return false;
  *min_rel_pivot = 1.0;
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    const double rel = std::fabs(m[pivot][col]) / scale;
    *min_rel_pivot = std::min(*min_rel_pivot, rel);
    if (rel <= 1e-14) return false;
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = col + 1; r < d; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < d; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  out->assign(d, 0.0);
  for (std::size_t r = d; r-- > 0;) {
    double v = rhs[r];
    for (std::size_t c = r + 1; c < d; ++c) v -= m[r][c] * (*out)[c];
    (*out)[r] = v / m[r][r];
  }
  return true;
}

class OlsPredictor : public Predictor {
 public:
  std::string name() const override { return "ols"; }
  std::unique_ptr<PredictorModel> fit(const std::vector<std::vector<double>>& x,
                                      const std::vector<double>& targets) const override {
    if (x.empty() || x.size() != targets.size())
      throw PredictorError("ols: empty or misaligned training set");
    const std::size_t d = x.front().size() + 1;
    std::vector<std::vector<double>> xtx(d, std::vector<double>(d, 0.0));
    std::vector<double> xty(d, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::vector<double> row(d, 1.0);
      for (std::size_t j = 0; j + 1 < d; ++j) row[j + 1] = x[i][j];
      for (std::size_t a = 0; a < d; ++a) {
        xty[a] += row[a] * targets[i];
        for (std::size_t b = 0; b <= a; ++b) xtx[a][b] += row[a] * row[b];
      }
    }
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a + 1; b < d; ++b) xtx[a][b] = xtx[b][a];

    std::vector<double> coef;
    double rel_pivot = 0.0;
    if (solve_normal_equations(xtx, xty, &coef, &rel_pivot) && rel_pivot > 1e-8)
      return std::make_unique<LinearModel>(std::move(coef));

    // An exactly vanishing pivot is perfect collinearity and is an error; a
    // merely ill-conditioned system falls back to the ridge.
    if (rel_pivot <= 1e-14) throw PredictorError("ols: collinear covariate design");
    double diag_scale = 0.0;
    for (std::size_t a = 0; a < d; ++a) diag_scale = std::max(diag_scale, xtx[a][a]);
    std::vector<std::vector<double>> ridge = xtx;
    for (std::size_t a = 0; a < d; ++a) ridge[a][a] += 1e-8 * std::max(diag_scale, 1.0);
    if (!solve_normal_equations(ridge, xty, &coef, &rel_pivot))
      throw PredictorError("ols: collinear covariate design");
    return std::make_unique<LinearModel>(std::move(coef));
  }
};

}  // namespace

std::unique_ptr<Predictor> make_constant_predictor() {
  return std::make_unique<ConstantPredictor>();
}

std::unique_ptr<Predictor> make_ols_predictor() {
  return std::make_unique<OlsPredictor>();
}

CrossFitResult cross_fit(const OneSampleDataset& data, const Predictor& predictor,
                         const FoldAssignment& folds) {
  if (!data.has_covariates())
    throw DataError("cross_fit: dataset has no covariates");
  if (folds.size() != data.size())
    throw DataError("cross_fit: fold assignment misaligned with dataset");
  const int n_units = data.size();
  const int k = folds.k;

  CrossFitResult out;
  out.folds = folds;
  out.training_units.assign(static_cast<std::size_t>(k), {});
  std::vector<double> raw(static_cast<std::size_t>(n_units), 0.0);

  for (int fold = 1; fold <= k; ++fold) {
    std::vector<std::vector<double>> x;
    std::vector<double> targets;
    std::vector<int>& members = out.training_units[static_cast<std::size_t>(fold - 1)];
    for (int i = 0; i < n_units; ++i) {
      if (folds.fold_of[static_cast<std::size_t>(i)] == fold) continue;
      const OneSampleUnit& u = data.units[static_cast<std::size_t>(i)];
      x.push_back(u.x);
      targets.push_back(u.rate());
      members.push_back(i);
    }
    std::unique_ptr<PredictorModel> model;
    try {
      model = predictor.fit(x, targets);
    } catch (const PredictorError& e) {
      std::ostringstream msg;
      msg << "fold " << fold << ": " << e.what();
      throw PredictorError(msg.str());
    }
    for (int i = 0; i < n_units; ++i) {
      if (folds.fold_of[static_cast<std::size_t>(i)] != fold) continue;
      raw[static_cast<std::size_t>(i)] =
          model->predict(data.units[static_cast<std::size_t>(i)].x);
    }
  }

  std::vector<int> trials(static_cast<std::size_t>(n_units));
  for (int i = 0; i < n_units; ++i)
    trials[static_cast<std::size_t>(i)] = data.units[static_cast<std::size_t>(i)].n;
  out.preds = make_predictions(std::move(raw), trials);
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_pred(const std::string& s, const std::string& path, int row) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    std::ostringstream msg;
    msg << path << ": row " << row << ": bad prediction value '" << s << "'";
    throw DataError(msg.str());
  }
  return v;
}

std::vector<std::vector<double>> load_prediction_columns(const std::string& path,
                                                         int n_units, int n_value_cols,
                                                         const char* header_tail) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file (missing header)");
  const std::string expected = std::string("unit,fold,") + header_tail;
  {
    std::string got;
    for (char c : line)
      if (c != '\r' && c != ' ') got.push_back(c);
    if (got != expected)
      throw DataError(path + ": expected header '" + expected + "', got '" + got + "'");
  }
  std::vector<std::vector<double>> values(
      static_cast<std::size_t>(n_value_cols),
      std::vector<double>(static_cast<std::size_t>(n_units), 0.0));
  std::vector<bool> seen(static_cast<std::size_t>(n_units), false);
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (static_cast<int>(fields.size()) != 2 + n_value_cols) {
      std::ostringstream msg;
      msg << path << ": row " << row << ": expected " << 2 + n_value_cols
          << " fields";
      throw DataError(msg.str());
    }
    int unit = 0;
    auto [ptr, ec] = std::from_chars(fields[0].data(),
                                     fields[0].data() + fields[0].size(), unit);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size() || unit < 1 ||
        unit > n_units) {
      std::ostringstream msg;
      msg << path << ": row " << row << ": unit index out of range";
      throw DataError(msg.str());
    }
    if (seen[static_cast<std::size_t>(unit - 1)]) {
      std::ostringstream msg;
      msg << path << ": row " << row << ": duplicate unit " << unit;
      throw DataError(msg.str());
    }
    seen[static_cast<std::size_t>(unit - 1)] = true;
    for (int c = 0; c < n_value_cols; ++c)
      values[static_cast<std::size_t>(c)][static_cast<std::size_t>(unit - 1)] =
          parse_pred(fields[static_cast<std::size_t>(2 + c)], path, row);
  }
  for (int i = 0; i < n_units; ++i)
    if (!seen[static_cast<std::size_t>(i)]) {
      std::ostringstream msg;
      msg << path << ": missing prediction for unit " << i + 1;
      throw DataError(msg.str());
    }
  return values;
}

}  // namespace

CrossFitPredictions load_external_predictions_one(const std::string& path, int n_units,
                                                  const std::vector<int>& trials) {
  auto cols = load_prediction_columns(path, n_units, 1, "g_hat");
  return make_predictions(std::move(cols[0]), trials);
}

std::pair<CrossFitPredictions, CrossFitPredictions> load_external_predictions_two(
    const std::string& path, int n_units, const std::vector<int>& trials1,
    const std::vector<int>& trials2) {
  auto cols = load_prediction_columns(path, n_units, 2, "g1_hat,g2_hat");
  return {make_predictions(std::move(cols[0]), trials1),
          make_predictions(std::move(cols[1]), trials2)};
}

std::vector<double> estimate_one(const OneSampleDataset& data,
                                 const CrossFitPredictions* preds, const Lambda& lam) {
  if (!lam.feasible()) throw DataError("estimate_one: lambda1 outside [0,1]");
  if (preds && preds->size() != data.size())
    throw DataError("estimate_one: predictions misaligned with dataset");
  const double gm = grand_mean(data);
  std::vector<double> out(static_cast<std::size_t>(data.size()));
  for (int i = 0; i < data.size(); ++i) {
    const OneSampleUnit& u = data.units[static_cast<std::size_t>(i)];
    const double dev = preds ? preds->g_hat[static_cast<std::size_t>(i)] -
                                   preds->weighted_mean
                             : 0.0;
    out[static_cast<std::size_t>(i)] =
        lam.lambda1 * u.rate() + (1.0 - lam.lambda1) * gm + lam.lambda2 * dev;
  }
  return out;
}

std::vector<double> estimate_two(const TwoSampleDataset& data,
                                 const CrossFitPredictions* preds1,
                                 const CrossFitPredictions* preds2, const Lambda& lam) {
  const std::vector<double> e1 = estimate_one(data.group(1), preds1, lam);
  const std::vector<double> e2 = estimate_one(data.group(2), preds2, lam);
  std::vector<double> out(e1.size());
  for (std::size_t i = 0; i < e1.size(); ++i) out[i] = e1[i] - e2[i];
  return out;
}

namespace {

// Minimize a t^2 + b t over [0,1].
double clamp_min_1d(double a, double b) {
  if (a > 0.0) return std::clamp(-b / (2.0 * a), 0.0, 1.0);
  return b >= 0.0 ? 0.0 : 1.0;
}

}  // namespace

Lambda fit_lambda(const QuadraticForm& q, bool feasible) {
  const Mat2& a = q.a;
  if (a.m00 <= 0.0 && a.m11 <= 0.0) {
    if (!feasible)
      throw NumericError("fit_lambda: quadratic coefficient matrix is zero");
    // Entirely flat or linear objective: pick the feasible corner.
    return Lambda{clamp_min_1d(0.0, q.b.v0), 0.0};
  }
  // Vanishing prediction-direction curvature means no covariate signal; the
  // problem is 1-D in lambda1 with lambda2 pinned to zero.
  const bool no_pred_signal = a.m11 <= 1e-12 * a.trace();

  if (!feasible) {
    if (no_pred_signal &&
        std::fabs(q.b.v1) <= 1e-12 * (std::fabs(q.b.v0) + 1.0) && a.m00 > 0.0) {
      return Lambda{-q.b.v0 / (2.0 * a.m00), 0.0};
    }
    const Vec2 sol = solve_sym(a, Vec2{-0.5 * q.b.v0, -0.5 * q.b.v1});
    return Lambda{sol.v0, sol.v1};
  }

  if (no_pred_signal) {
    return Lambda{clamp_min_1d(a.m00, q.b.v0), 0.0};
  }

  // Profile the unconstrained coordinate out: l2(l1) = -(b1 + 2 a01 l1)/(2 a11),
  // then a 1-D quadratic in l1 with the Schur-complement curvature.
  const double schur = a.m00 - a.m01 * a.m01 / a.m11;
  const double slope = q.b.v0 - a.m01 * q.b.v1 / a.m11;
  const double l1 = clamp_min_1d(std::max(schur, 0.0), slope);
  const double l2 = -(q.b.v1 + 2.0 * a.m01 * l1) / (2.0 * a.m11);
  return Lambda{l1, l2};
}

}  // namespace binshrink
