#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fairssat/errors.hpp"
#include "fairssat/sdimacs.hpp"
#include "fairssat/ssat.hpp"
#include "oracle.hpp"

using namespace fairssat;

namespace {

template <class F>
std::string thrown_message(F&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

const char* kExample =
    "c two-threshold example, group literal pinned\n"
    "p cnf 4 3\n"
    "r 0.41 1 0\n"
    "r 0.93 2 0\n"
    "r 0.09 3 0\n"
    "e 4 0\n"
    "-1 2 0\n"
    "1 3 0\n"
    "4 0\n";

}  // namespace

TEST_CASE("parses the documented layout") {
  const SsatFormula f = parse_sdimacs(kExample);
  REQUIRE(f.prefix().size() == 4);
  CHECK(f.prefix()[0].first == 1);
  CHECK(f.prefix()[0].second.is_random());
  CHECK(f.prefix()[0].second.prob() == 0.41);
  CHECK(f.prefix()[3].second.is_exists());
  CHECK(f.matrix().num_vars() == 4);
  CHECK(f.matrix().num_clauses() == 3);
  CHECK(std::fabs(evaluate(f).probability - 0.4344) <= 1e-12);
}

TEST_CASE("tolerates comments, blank lines, CRLF, and shared-probability lines") {
  const std::string text =
      "c header comment\r\n"
      "\n"
      "p cnf 3 1\r\n"
      "c a comment inside the prefix\n"
      "r 0.25 1 2 0\n"
      "e 3 0\n"
      "   1   -2  3 0   \n";
  const SsatFormula f = parse_sdimacs(text);
  REQUIRE(f.prefix().size() == 3);
  CHECK(f.prefix()[0].second.prob() == 0.25);
  CHECK(f.prefix()[1].second.prob() == 0.25);  // one 'r' line may list several variables
  CHECK(f.prefix()[1].first == 2);
  CHECK(f.matrix().num_clauses() == 1);
}

TEST_CASE("writer output reparses to a byte-identical rewrite") {
  std::mt19937_64 rng(555);
  for (int round = 0; round < 30; ++round) {
    const int n = oracle::rand_int(rng, 1, 9);
    const oracle::IntCnf cnf = oracle::random_cnf(rng, n, oracle::rand_int(rng, 0, 8), 4);
    std::vector<PrefixEntry> prefix;
    for (Var v = 1; v <= static_cast<Var>(n); ++v) {
      if (oracle::rand_bool(rng)) {
        prefix.emplace_back(v, Quantifier::exists());
      } else {
        prefix.emplace_back(v, Quantifier::random(oracle::rand_prob(rng)));
      }
    }
    const SsatFormula f(prefix, oracle::to_formula(cnf, static_cast<Var>(n)));
    const std::string once = write_sdimacs(f, {});
    const std::string twice = write_sdimacs(parse_sdimacs(once), {});
    CHECK(once == twice);
    CHECK(evaluate(parse_sdimacs(once)).probability == evaluate(f).probability);
  }
}

TEST_CASE("writer emits comments and groups consecutive existentials") {
  CnfFormula m(3);
  m.add_clause({1, -3});
  const SsatFormula f({{1, Quantifier::exists()},
                       {2, Quantifier::exists()},
                       {3, Quantifier::random(0.125)}},
                      m);
  const std::vector<std::string> comments{"legend: v1 = income>=0.29"};
  CHECK(write_sdimacs(f, comments) ==
        "c legend: v1 = income>=0.29\n"
        "p cnf 3 1\n"
        "e 1 2 0\n"
        "r 0.125 3 0\n"
        "1 -3 0\n");
}

TEST_CASE("diagnostics carry line numbers") {
  CHECK(thrown_message([] { parse_sdimacs("1 2 0\n"); }).find("line 1") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 0\np cnf 2 0\n"); })
            .find("duplicate 'p cnf' header") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf x 0\n"); }).find("malformed header") !=
        std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 0 7\n"); }).find("malformed header") !=
        std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 1 0\nr abc 1 0\n"); })
            .find("cannot parse probability") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 1 0\nr 1.5 1 0\n"); })
            .find("outside [0, 1]") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 0\ne 1 2\n"); })
            .find("terminating 0") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 0\ne 3 0\n"); })
            .find("outside the declared range") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 0\ne 1 0\nr 0.5 1 0\n"); })
            .find("quantified twice") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 1\ne 1 2 0\n1 2\n"); })
            .find("missing its terminating 0") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 1\ne 1 2 0\n1 0 2 0\n"); })
            .find("after the terminating 0") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 1\ne 1 2 0\n5 0\n"); })
            .find("outside the declared range") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 2\ne 1 2 0\n1 0\n"); })
            .find("declares 2 clauses but 1") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs("p cnf 2 1\ne 1 0\n1 2 0\n"); })
            .find("never quantified") != std::string::npos);
  CHECK(thrown_message([] { parse_sdimacs(""); }).find("missing 'p cnf' header") !=
        std::string::npos);
  CHECK_THROWS_AS(parse_sdimacs_file("/nonexistent/path.sdimacs"), ParseError);
}
