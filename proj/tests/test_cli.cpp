#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "test_support.hpp"

// End-to-end drives of the installed command-line binary. Each case works in
// its own scratch directory and checks files, exit codes and byte-for-byte
// reproducibility.

namespace {

const char* cli_path() { return BINSHRINK_CLI_PATH; }

struct Scratch {
  std::string dir;
  explicit Scratch(const std::string& name) : dir("/tmp/binshrink_cli_" + name) {
    std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
  }
  std::string path(const std::string& file) const { return dir + "/" + file; }
};

int run(const std::string& args) {
  const int status = std::system((std::string(cli_path()) + " " + args +
                                  " >/dev/null 2>&1")
                                     .c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string value_of(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return "";
}

}  // namespace

TEST_CASE("fit without covariates reports a zero prediction weight") {
  Scratch s("fit_nocov");
  write_file(s.path("d.csv"), "n,y\n8,3\n12,5\n6,1\n9,4\n10,2\n");
  const int code = run("fit --mode one --input " + s.path("d.csv") +
                       " --predictor none --seed 7 --out " + s.path(""));
  REQUIRE(code == 0);
  const std::string report = slurp(s.path("fit.txt"));
  CHECK(value_of(report, "lambda2") == "0");
  CHECK(value_of(report, "grand_mean") ==
        value_of(report, "estimate_weighted_mean"));
}

TEST_CASE("fit with a parameter override returns the plain rates") {
  Scratch s("fit_override");
  write_file(s.path("d.csv"), "n,y\n8,3\n12,5\n6,1\n");
  REQUIRE(run("fit --mode one --input " + s.path("d.csv") +
              " --predictor none --lambda 1,0 --out " + s.path("")) == 0);
  const std::string est = slurp(s.path("estimates.csv"));
  std::istringstream in(est);
  std::string line;
  std::getline(in, line);
  CHECK(line == "unit,theta_hat");
  std::getline(in, line);
  CHECK(line == "1,0.375");
  std::getline(in, line);
  CHECK(line.substr(0, 2) == "2,");
  CHECK(std::stod(line.substr(2)) == doctest::Approx(5.0 / 12.0).epsilon(1e-16));
}

TEST_CASE("two-sample fit reports an exactly consistent weighted average") {
  Scratch s("fit_two");
  write_file(s.path("d.csv"),
             "n1,y1,n2,y2\n8,3,6,2\n12,5,10,3\n6,1,8,5\n9,4,7,2\n");
  REQUIRE(run("fit --mode two --input " + s.path("d.csv") +
              " --predictor none --seed 3 --out " + s.path("")) == 0);
  const std::string report = slurp(s.path("fit.txt"));
  const double gm_diff = std::stod(value_of(report, "grand_mean_diff"));
  const double est_diff = std::stod(value_of(report, "estimate_weighted_mean_diff"));
  CHECK(std::fabs(gm_diff - est_diff) <= 1e-14);
}

TEST_CASE("data errors exit with code 2 and usage errors with 1") {
  Scratch s("fit_err");
  write_file(s.path("bad.csv"), "n,y\n1,0\n");
  CHECK(run("fit --mode one --input " + s.path("bad.csv") +
            " --predictor none --out " + s.path("")) == 2);
  CHECK(run("fit --mode one --input " + s.path("missing.csv") +
            " --predictor none --out " + s.path("")) == 2);
  CHECK(run("fit --mode one --input " + s.path("bad.csv") +
            " --predictor nope --out " + s.path("")) == 1);
  // Stochastic paths demand a seed.
  write_file(s.path("ok.csv"), "n,y,x1\n8,3,0.1\n12,5,0.2\n6,1,0.3\n9,4,0.4\n");
  CHECK(run("fit --mode one --input " + s.path("ok.csv") +
            " --predictor ols --k 2 --out " + s.path("")) == 1);
}

TEST_CASE("surface emits one row per grid point plus holdout columns") {
  Scratch s("surface");
  write_file(s.path("d.csv"), "n,y\n10,3\n12,5\n10,1\n9,4\n11,2\n10,7\n");
  REQUIRE(run("surface --mode one --input " + s.path("d.csv") +
              " --predictor none --grid-lambda1 0:1:3 --grid-lambda2 -1:1:3 "
              "--out " + s.path("")) == 0);
  const std::string csv = slurp(s.path("surface.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);  // header + 9 rows
  CHECK(csv.substr(0, 20) == "lambda1,lambda2,sure");

  REQUIRE(run("surface --mode one --input " + s.path("d.csv") +
              " --predictor none --grid-lambda1 0:1:5 --grid-lambda2 0:0:1 "
              "--thin 0.2 --seed 11 --out " + s.path("t_")) == 0);
  const std::string thinned = slurp(s.path("t_surface.csv"));
  CHECK(thinned.substr(0, 33) == "lambda1,lambda2,sure,holdout_risk");
  CHECK(std::count(thinned.begin(), thinned.end(), '\n') == 6);
}

TEST_CASE("surface minimum respects the fitted parameter") {
  Scratch s("surface_min");
  write_file(s.path("d.csv"),
             "n,y\n10,3\n12,5\n10,1\n9,4\n11,2\n10,7\n8,2\n14,6\n9,1\n13,8\n");
  REQUIRE(run("surface --mode one --input " + s.path("d.csv") +
              " --predictor none --grid-lambda1 0:1:101 --out " + s.path("")) == 0);
  REQUIRE(run("fit --mode one --input " + s.path("d.csv") +
              " --predictor none --out " + s.path("")) == 0);
  const double lam1 = std::stod(value_of(slurp(s.path("fit.txt")), "lambda1"));
  std::istringstream in(slurp(s.path("surface.csv")));
  std::string line;
  std::getline(in, line);
  double best = 1e300, best_l1 = -1.0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double l1 = std::stod(line.substr(0, c1));
    const double sure = std::stod(line.substr(c2 + 1));
    if (sure < best) {
      best = sure;
      best_l1 = l1;
    }
  }
  CHECK(std::fabs(best_l1 - lam1) <= 0.01 + 1e-12);  // one grid cell
}

TEST_CASE("infer ellipsoid block carries the chi-square critical value") {
  Scratch s("infer_ell");
  // Mild heterogeneity keeps the fitted parameter interior, so the bootstrap
  // spread is nondegenerate.
  REQUIRE(run("simulate --mode one --n-units 60 --trials 8:14 --noise-sd 0.05 "
              "--g-intercept 0.4 --seed 1 --out " + s.path("")) == 0);
  REQUIRE(run("infer --mode one --input " + s.path("data.csv") +
              " --predictor none --b 120 --alpha 0.05 --boundary no --seed 21 "
              "--out " + s.path("")) == 0);
  const std::string block = slurp(s.path("region.txt"));
  CHECK(value_of(block, "chi2_crit").substr(0, 5) == "5.991");
  CHECK(value_of(block, "type") == "ellipsoid");
}

TEST_CASE("infer is byte-identical across reruns") {
  Scratch s("infer_repro");
  std::ostringstream data;
  data << "n,y\n";
  for (int i = 0; i < 30; ++i) data << 6 + (i % 7) << "," << (i * 3) % 5 << "\n";
  write_file(s.path("d.csv"), data.str());
  const std::string cmd = "infer --mode one --input " + s.path("d.csv") +
                          " --predictor none --b 100 --boundary yes --seed 5 --out ";
  REQUIRE(run(cmd + s.path("a_")) == 0);
  REQUIRE(run(cmd + s.path("b_")) == 0);
  const std::string a = slurp(s.path("a_region.csv"));
  CHECK(a == slurp(s.path("b_region.csv")));
  CHECK(!a.empty());
}

TEST_CASE("infer enforces the replicate floor unless overridden") {
  Scratch s("infer_floor");
  REQUIRE(run("simulate --mode one --n-units 40 --trials 8:14 --noise-sd 0.05 "
              "--g-intercept 0.4 --seed 2 --out " + s.path("")) == 0);
  CHECK(run("infer --mode one --input " + s.path("data.csv") +
            " --predictor none --b 20 --boundary no --seed 2 --out " +
            s.path("")) == 1);
  CHECK(run("infer --mode one --input " + s.path("data.csv") +
            " --predictor none --b 20 --allow-small-b --boundary no --seed 2 "
            "--out " + s.path("")) == 0);
}

TEST_CASE("grid region always contains the fitted parameter") {
  Scratch s("infer_grid");
  std::ostringstream data;
  data << "n,y\n";
  for (int i = 0; i < 50; ++i) data << 10 + (i % 4) << "," << 2 + (i * 5) % 7 << "\n";
  write_file(s.path("d.csv"), data.str());
  REQUIRE(run("infer --mode one --input " + s.path("d.csv") +
              " --predictor none --b 100 --boundary yes --seed 9 --out " +
              s.path("")) == 0);
  REQUIRE(run("fit --mode one --input " + s.path("d.csv") +
              " --predictor none --out " + s.path("")) == 0);
  const double lam1 = std::stod(value_of(slurp(s.path("fit.txt")), "lambda1"));
  // Find the member row closest to the fitted value.
  std::istringstream in(slurp(s.path("region.csv")));
  std::string line;
  std::getline(in, line);
  bool found = false;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double l1 = std::stod(line.substr(0, c1));
    const int member = std::stoi(line.substr(c2 + 1));
    if (member == 1 && std::fabs(l1 - lam1) <= 0.011) found = true;
  }
  CHECK(found);
}

TEST_CASE("validate writes the comparison table and paired surfaces") {
  Scratch s("validate");
  std::ostringstream data;
  data << "n,y\n";
  for (int i = 0; i < 30; ++i) data << 10 + (i % 6) << "," << (2 + (i * 7) % 6) << "\n";
  write_file(s.path("d.csv"), data.str());
  REQUIRE(run("validate --mode one --input " + s.path("d.csv") +
              " --estimators mle,grand_mean,fixed:0.5:0,sure_fit --fraction 0.2 "
              "--predictor none --seed 13 --grid-lambda1 0:1:5 --out " +
              s.path("")) == 0);
  const std::string table = slurp(s.path("comparison.csv"));
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  CHECK(table.find("mle,") != std::string::npos);
  CHECK(table.find("grand_mean,") != std::string::npos);
  CHECK(table.find("sure_fit,") != std::string::npos);
  const std::string surf = slurp(s.path("surface.csv"));
  CHECK(std::count(surf.begin(), surf.end(), '\n') == 6);
}

TEST_CASE("simulate writes matching data and truth files, reproducibly") {
  Scratch s("simulate");
  const std::string cmd =
      "simulate --mode one --n-units 5 --trials 6:12 --d 1 --g-intercept 0.4 "
      "--g-slopes 0.1 --noise-sd 0.05 --seed 17 --out ";
  REQUIRE(run(cmd + s.path("a_")) == 0);
  REQUIRE(run(cmd + s.path("b_")) == 0);
  const std::string data = slurp(s.path("a_data.csv"));
  const std::string truth = slurp(s.path("a_truth.csv"));
  CHECK(std::count(data.begin(), data.end(), '\n') == 6);
  CHECK(std::count(truth.begin(), truth.end(), '\n') == 6);
  CHECK(data == slurp(s.path("b_data.csv")));
  CHECK(truth == slurp(s.path("b_truth.csv")));
  CHECK(run("simulate --mode one --n-units 5 --out " + s.path("c_")) == 1);
}

TEST_CASE("simulated counts match their binomial law") {
  Scratch s("simulate_law");
  REQUIRE(run("simulate --mode one --n-units 50000 --trials 10:10 --noise-sd 0 "
              "--g-intercept 0.35 --seed 23 --out " + s.path("")) == 0);
  std::istringstream in(slurp(s.path("data.csv")));
  std::string line;
  std::getline(in, line);
  std::vector<long long> counts(11, 0);
  long long total = 0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    ++counts[static_cast<std::size_t>(std::stoi(line.substr(c1 + 1)))];
    ++total;
  }
  REQUIRE(total == 50000);
  CHECK(testsupport::chi2_gof_pvalue(counts, testsupport::binomial_pmf(10, 0.35),
                                     static_cast<double>(total)) > 0.01);
}

TEST_SUITE_END();
