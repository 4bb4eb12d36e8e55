#ifndef FAIRSSAT_SDIMACS_HPP
#define FAIRSSAT_SDIMACS_HPP

#include <iosfwd>
#include <span>
#include <string>

#include "fairssat/ssat.hpp"

namespace fairssat {

// SDIMACS: a `p cnf <vars> <clauses>` header, then quantifier lines
// (`e v1 v2 ... 0` and `r <prob> v1 ... 0`) in prefix order, then clause
// lines. `c` starts a comment anywhere. The parser is strict: the header must
// come first, counts must match, every clause variable must be quantified,
// and probabilities must lie in [0, 1]. Errors carry the offending line.
SsatFormula parse_sdimacs(std::istream& in);
SsatFormula parse_sdimacs(const std::string& text);
SsatFormula parse_sdimacs_file(const std::string& path);

// Probabilities are printed with the shortest digit string that parses back
// to the same double, so write -> parse -> write is byte-stable.
void write_sdimacs(std::ostream& out, const SsatFormula& formula,
                   std::span<const std::string> comments = {});
std::string write_sdimacs(const SsatFormula& formula,
                          std::span<const std::string> comments = {});

}  // namespace fairssat

#endif
