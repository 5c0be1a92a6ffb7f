#include "binshrink/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace binshrink {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& name, int row, const std::string& what) {
  std::ostringstream msg;
  msg << name << ": row " << row << ": " << what;
  throw DataError(msg.str());
}

int parse_count(const std::string& raw, const std::string& name, int row,
                const std::string& col) {
  const std::string s = trim(raw);
  int value = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || s.empty())
    fail(name, row, "column '" + col + "': expected an integer count, got '" + raw + "'");
  return value;
}

double parse_real(const std::string& raw, const std::string& name, int row,
                  const std::string& col) {
  const std::string s = trim(raw);
  if (s.empty())
    fail(name, row, "column '" + col + "': ragged covariates (empty cell)");
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    fail(name, row, "column '" + col + "': expected a decimal value, got '" + raw + "'");
  return value;
}

struct Header {
  std::vector<std::string> columns;
  int index_of(const std::string& col) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == col) return static_cast<int>(i);
    return -1;
  }
  std::vector<int> with_prefix(const std::string& prefix) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].rfind(prefix, 0) == 0) out.push_back(static_cast<int>(i));
    return out;
  }
};

Header read_header(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty file (missing header)");
  Header h;
  for (std::string& c : split_csv_line(line)) h.columns.push_back(trim(c));
  return h;
}

void require_column(const Header& h, const std::string& col, const std::string& name) {
  if (h.index_of(col) < 0)
    throw DataError(name + ": missing required column '" + col + "'");
}

void check_width(const std::vector<std::string>& fields, const Header& h,
                 const std::string& name, int row) {
  if (fields.size() != h.columns.size()) {
    std::ostringstream msg;
    msg << "expected " << h.columns.size() << " field(s), got " << fields.size();
    fail(name, row, msg.str());
  }
}

}  // namespace

OneSampleDataset parse_one_sample(std::istream& in, const std::string& name) {
  const Header h = read_header(in, name);
  require_column(h, "n", name);
  require_column(h, "y", name);
  const int n_col = h.index_of("n");
  const int y_col = h.index_of("y");
  const std::vector<int> x_cols = h.with_prefix("x");

  OneSampleDataset data;
  data.covariate_dim = static_cast<int>(x_cols.size());

  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    check_width(fields, h, name, row);
    OneSampleUnit u;
    u.n = parse_count(fields[n_col], name, row, "n");
    u.y = parse_count(fields[y_col], name, row, "y");
    for (int c : x_cols) u.x.push_back(parse_real(fields[c], name, row, h.columns[c]));
    data.units.push_back(std::move(u));
  }
  data.validate(name);
  return data;
}

TwoSampleDataset parse_two_sample(std::istream& in, const std::string& name) {
  const Header h = read_header(in, name);
  for (const char* col : {"n1", "y1", "n2", "y2"}) require_column(h, col, name);
  const int n1 = h.index_of("n1"), y1 = h.index_of("y1");
  const int n2 = h.index_of("n2"), y2 = h.index_of("y2");
  const std::vector<int> x1_cols = h.with_prefix("g1_x");
  const std::vector<int> x2_cols = h.with_prefix("g2_x");
  if (x1_cols.size() != x2_cols.size())
    throw DataError(name + ": group covariate blocks g1_x*/g2_x* differ in width");

  TwoSampleDataset data;
  data.covariate_dim = static_cast<int>(x1_cols.size());

  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    check_width(fields, h, name, row);
    TwoSampleUnit u;
    u.group1.n = parse_count(fields[n1], name, row, "n1");
    u.group1.y = parse_count(fields[y1], name, row, "y1");
    u.group2.n = parse_count(fields[n2], name, row, "n2");
    u.group2.y = parse_count(fields[y2], name, row, "y2");
    for (int c : x1_cols) u.group1.x.push_back(parse_real(fields[c], name, row, h.columns[c]));
    for (int c : x2_cols) u.group2.x.push_back(parse_real(fields[c], name, row, h.columns[c]));
    data.units.push_back(std::move(u));
  }
  data.validate(name);
  return data;
}

OneSampleDataset load_one_sample(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return parse_one_sample(in, path);
}

TwoSampleDataset load_two_sample(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return parse_two_sample(in, path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_one_sample(std::ostream& out, const OneSampleDataset& data) {
  out << "n,y";
  for (int j = 1; j <= data.covariate_dim; ++j) out << ",x" << j;
  out << "\n";
  for (const OneSampleUnit& u : data.units) {
    out << u.n << "," << u.y;
    for (double v : u.x) out << "," << format_double(v);
    out << "\n";
  }
}

void write_two_sample(std::ostream& out, const TwoSampleDataset& data) {
  out << "n1,y1,n2,y2";
  for (int j = 1; j <= data.covariate_dim; ++j) out << ",g1_x" << j;
  for (int j = 1; j <= data.covariate_dim; ++j) out << ",g2_x" << j;
  out << "\n";
  for (const TwoSampleUnit& u : data.units) {
    out << u.group1.n << "," << u.group1.y << "," << u.group2.n << "," << u.group2.y;
    for (double v : u.group1.x) out << "," << format_double(v);
    for (double v : u.group2.x) out << "," << format_double(v);
    out << "\n";
  }
}

}  // namespace binshrink
