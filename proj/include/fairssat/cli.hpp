#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairssat {

// Full command-line driver, callable in-process. `args` excludes the program
// name. Machine output (reports, probabilities, encodings) goes to `out`;
// human summaries, warnings, and diagnostics go to `err`.
//
// Exit codes: 0 success, 1 usage or input error, 2 analysis contract failure
// (the two pipelines disagree in --mode both).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairssat
