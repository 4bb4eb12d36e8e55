#ifndef FAIRSSAT_CNF_HPP
#define FAIRSSAT_CNF_HPP

#include <compare>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

namespace fairssat {

// Variables are positive 1-based ids; 0 is reserved as the DIMACS terminator.
using Var = std::uint32_t;

// A literal stored as its signed DIMACS code (v or -v, never 0).
class Lit {
public:
  Lit() = default;
  Lit(Var var, bool negated) : code_(negated ? -static_cast<std::int32_t>(var)
                                             : static_cast<std::int32_t>(var)) {}
  static Lit from_dimacs(std::int32_t code);

  Var var() const { return static_cast<Var>(code_ < 0 ? -code_ : code_); }
  bool negated() const { return code_ < 0; }
  std::int32_t dimacs() const { return code_; }
  Lit operator~() const { return from_dimacs(-code_); }

  friend auto operator<=>(const Lit&, const Lit&) = default;

private:
  std::int32_t code_ = 0;
};

// Orders literals by variable id, negative polarity first on the same id.
struct LitOrder {
  bool operator()(Lit a, Lit b) const {
    if (a.var() != b.var()) return a.var() < b.var();
    return a.negated() && !b.negated();
  }
};

// Disjunction of literals. Construction sorts by variable id and drops exact
// duplicates; the empty clause is the FALSE constant. A clause holding both
// polarities of a variable is tautological and is rejected by CnfFormula.
class Clause {
public:
  Clause() = default;
  explicit Clause(std::vector<Lit> lits);

  bool empty() const { return lits_.empty(); }
  std::size_t size() const { return lits_.size(); }
  bool tautological() const { return tautological_; }
  bool contains(Lit l) const;
  const std::vector<Lit>& literals() const { return lits_; }
  auto begin() const { return lits_.begin(); }
  auto end() const { return lits_.end(); }

  friend auto operator<=>(const Clause& a, const Clause& b) { return a.lits_ <=> b.lits_; }
  friend bool operator==(const Clause& a, const Clause& b) { return a.lits_ == b.lits_; }

private:
  std::vector<Lit> lits_;
  bool tautological_ = false;
};

// CNF over variables 1..num_vars. No clauses means TRUE; any empty clause
// means FALSE. Tautological clauses are dropped at insertion.
class CnfFormula {
public:
  CnfFormula() = default;
  explicit CnfFormula(Var num_vars) : num_vars_(num_vars) {}
  static CnfFormula constant(bool value, Var num_vars = 0);

  void add_clause(Clause clause);
  void add_clause(std::initializer_list<std::int32_t> dimacs_lits);
  // Appends every clause of `other`; num_vars grows to cover both.
  void append(const CnfFormula& other);

  Var num_vars() const { return num_vars_; }
  // Grows the variable universe; shrinking below a used id is an error.
  void set_num_vars(Var n);
  Var add_var() { return ++num_vars_; }

  bool is_true() const { return clauses_.empty(); }
  bool is_false() const;
  std::size_t num_clauses() const { return clauses_.size(); }
  const std::vector<Clause>& clauses() const { return clauses_; }

  // Evaluates the formula under a full assignment (index 1..num_vars).
  bool satisfied_by(const std::vector<bool>& assignment) const;

  // Clauses sorted lexicographically, for structural comparison in tests.
  std::vector<Clause> canonical_clauses() const;

  std::string to_string() const;

private:
  std::vector<Clause> clauses_;
  Var num_vars_ = 0;
};

}  // namespace fairssat

#endif
