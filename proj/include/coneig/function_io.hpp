///
/// \file function_io.hpp
///
/// JSON and CSV forms of rational functions and reduction reports. Every
/// number is written as the shortest decimal string that reads back to the
/// same double.
///
///     {"alpha0": {"re": "0.25", "im": "0"},
///      "terms": [{"re_tau": "1e-12", "im_tau": "3.14",
///                 "residue": {"re": "1", "im": "-0.5"}}]}
///
#ifndef CONEIG_FUNCTION_IO_HPP
#define CONEIG_FUNCTION_IO_HPP

#include <string>

#include "coneig/cauchy.hpp"
#include "coneig/reduction.hpp"

namespace coneig
{

std::string format_double(double v);

/// Whole-string decimal parse. Throws Parse on trailing characters, empty
/// input or values outside the double range.
double parse_double(const std::string& s);

std::string function_to_json(const RationalFunction& f);

/// Throws Parse for malformed documents. The function is not validated.
RationalFunction function_from_json(const std::string& text);

/// Throws Io when the file cannot be read or written.
RationalFunction read_function(const std::string& path);
void write_function(const std::string& path, const RationalFunction& f);

std::string report_to_json(const ReductionReport& r);

/// Lines "x,re,im" of f(exp(2 pi i x)) on `adaptive_grid({&f}, base_points)`.
std::string eval_csv(const RationalFunction& f, std::size_t base_points);

void write_text(const std::string& path, const std::string& text);

} // namespace coneig

#endif /* CONEIG_FUNCTION_IO_HPP */
