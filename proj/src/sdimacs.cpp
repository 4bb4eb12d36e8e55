#include "fairssat/sdimacs.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "fairssat/errors.hpp"
#include "fairssat/text.hpp"

namespace fairssat {

namespace {

[[noreturn]] void fail(int lineno, const std::string& msg) {
  throw ParseError("line " + std::to_string(lineno) + ": " + msg);
}

}  // namespace

SsatFormula parse_sdimacs(std::istream& in) {
  bool have_header = false;
  Var num_vars = 0;
  std::size_t declared_clauses = 0;
  std::size_t clauses_read = 0;
  std::vector<PrefixEntry> prefix;
  std::vector<char> quantified;
  std::optional<CnfFormula> matrix;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "c") continue;

    if (tok == "p") {
      if (have_header) fail(lineno, "duplicate 'p cnf' header");
      std::string fmt, vars_tok, clauses_tok, extra;
      if (!(ls >> fmt >> vars_tok >> clauses_tok) || fmt != "cnf") {
        fail(lineno, "malformed header; expected 'p cnf <vars> <clauses>'");
      }
      auto v = parse_int(vars_tok);
      auto c = parse_int(clauses_tok);
      if (!v || !c || *v < 0 || *c < 0 || (ls >> extra)) {
        fail(lineno, "malformed header; expected 'p cnf <vars> <clauses>'");
      }
      num_vars = static_cast<Var>(*v);
      declared_clauses = static_cast<std::size_t>(*c);
      quantified.assign(num_vars + 1, 0);
      matrix.emplace(num_vars);
      have_header = true;
      continue;
    }
    if (!have_header) fail(lineno, "expected 'p cnf' header before this line");

    if (tok == "e" || tok == "r") {
      double prob = 0.0;
      if (tok == "r") {
        std::string prob_tok;
        if (!(ls >> prob_tok)) fail(lineno, "'r' line is missing its probability");
        auto p = parse_double(prob_tok);
        if (!p) fail(lineno, "cannot parse probability '" + prob_tok + "'");
        if (!(*p >= 0.0 && *p <= 1.0)) {
          fail(lineno, "probability " + prob_tok + " is outside [0, 1]");
        }
        prob = *p;
      }
      bool terminated = false;
      std::size_t listed = 0;
      std::string var_tok;
      while (ls >> var_tok) {
        if (terminated) fail(lineno, "tokens after the terminating 0");
        auto v = parse_int(var_tok);
        if (!v) fail(lineno, "cannot parse variable '" + var_tok + "'");
        if (*v == 0) {
          terminated = true;
          continue;
        }
        if (*v < 0 || static_cast<Var>(*v) > num_vars) {
          fail(lineno, "variable " + var_tok + " is outside the declared range 1.." +
                           std::to_string(num_vars));
        }
        const Var var = static_cast<Var>(*v);
        if (quantified[var]) {
          fail(lineno, "variable " + var_tok + " is quantified twice");
        }
        quantified[var] = 1;
        prefix.emplace_back(var, tok == "e" ? Quantifier::exists() : Quantifier::random(prob));
        ++listed;
      }
      if (!terminated) fail(lineno, "quantifier line is missing its terminating 0");
      if (listed == 0) fail(lineno, "quantifier line lists no variables");
      continue;
    }

    // Clause line; `tok` already holds the first literal.
    std::vector<Lit> lits;
    bool terminated = false;
    for (;;) {
      auto v = parse_int(tok);
      if (!v) fail(lineno, "cannot parse literal '" + tok + "'");
      if (*v == 0) {
        terminated = true;
        if (ls >> tok) fail(lineno, "tokens after the terminating 0");
        break;
      }
      const long long mag = *v < 0 ? -*v : *v;
      if (mag > static_cast<long long>(num_vars)) {
        fail(lineno, "literal " + tok + " is outside the declared range");
      }
      lits.push_back(Lit::from_dimacs(static_cast<std::int32_t>(*v)));
      if (!(ls >> tok)) break;
    }
    if (!terminated) fail(lineno, "clause line is missing its terminating 0");
    matrix->add_clause(Clause(std::move(lits)));
    ++clauses_read;
  }

  if (!have_header) throw ParseError("missing 'p cnf' header");
  if (clauses_read != declared_clauses) {
    throw ParseError("header declares " + std::to_string(declared_clauses) +
                     " clauses but " + std::to_string(clauses_read) + " were given");
  }
  for (const Clause& c : matrix->clauses()) {
    for (Lit l : c.literals()) {
      if (!quantified[l.var()]) {
        throw ParseError("variable " + std::to_string(l.var()) +
                         " is used in a clause but never quantified");
      }
    }
  }
  return SsatFormula(std::move(prefix), std::move(*matrix));
}

SsatFormula parse_sdimacs(const std::string& text) {
  std::istringstream in(text);
  return parse_sdimacs(in);
}

SsatFormula parse_sdimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return parse_sdimacs(in);
}

void write_sdimacs(std::ostream& out, const SsatFormula& formula,
                   std::span<const std::string> comments) {
  for (const std::string& c : comments) out << "c " << c << "\n";
  out << "p cnf " << formula.matrix().num_vars() << " " << formula.matrix().num_clauses()
      << "\n";
  const auto& prefix = formula.prefix();
  std::size_t i = 0;
  while (i < prefix.size()) {
    if (prefix[i].second.is_exists()) {
      out << "e";
      while (i < prefix.size() && prefix[i].second.is_exists()) {
        out << ' ' << prefix[i].first;
        ++i;
      }
      out << " 0\n";
    } else {
      out << "r " << format_double(prefix[i].second.prob()) << ' ' << prefix[i].first
          << " 0\n";
      ++i;
    }
  }
  for (const Clause& c : formula.matrix().clauses()) {
    for (Lit l : c.literals()) out << l.dimacs() << ' ';
    out << "0\n";
  }
}

std::string write_sdimacs(const SsatFormula& formula, std::span<const std::string> comments) {
  std::ostringstream out;
  write_sdimacs(out, formula, comments);
  return out.str();
}

}  // namespace fairssat
