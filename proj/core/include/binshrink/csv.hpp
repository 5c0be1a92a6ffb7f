#pragma once

#include <iosfwd>
#include <string>

#include "binshrink/types.hpp"

namespace binshrink {

// CSV ingestion. Headers are mandatory; row numbers in error messages are
// 1-based with the header counting as row 0.
//
// One-sample schema:  n,y            plus covariate columns x1,x2,...
// Two-sample schema:  n1,y1,n2,y2    plus covariate columns g1_x*,g2_x*
//
// Counts must be plain integers; a decimal success count is an error, not a
// rounding. Covariates are decimal with '.' as separator.
OneSampleDataset load_one_sample(const std::string& path);
TwoSampleDataset load_two_sample(const std::string& path);

OneSampleDataset parse_one_sample(std::istream& in, const std::string& name);
TwoSampleDataset parse_two_sample(std::istream& in, const std::string& name);

// Round-trip serialization: writing then re-reading reproduces the numeric
// content exactly (counts as integers, covariates at 17 significant digits).
void write_one_sample(std::ostream& out, const OneSampleDataset& data);
void write_two_sample(std::ostream& out, const TwoSampleDataset& data);

// Fixed-precision helper shared by every writer in the project: shortest text
// that round-trips a double (printed with 17 significant digits).
std::string format_double(double v);

}  // namespace binshrink
