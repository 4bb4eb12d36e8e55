#ifndef FAIRSSAT_TEXT_HPP
#define FAIRSSAT_TEXT_HPP

#include <optional>
#include <string>
#include <string_view>

namespace fairssat {

// Shortest decimal string that parses back to the same double, so emitted
// numbers round-trip bit-exactly.
std::string format_double(double v);

// Whole-string strict parses; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace fairssat

#endif
