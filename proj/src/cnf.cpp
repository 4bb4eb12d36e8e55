#include "fairssat/cnf.hpp"

#include <algorithm>
#include <sstream>

#include "fairssat/errors.hpp"

namespace fairssat {

Lit Lit::from_dimacs(std::int32_t code) {
  if (code == 0) throw StructuralError("literal code 0 is reserved");
  Lit l;
  l.code_ = code;
  return l;
}

Clause::Clause(std::vector<Lit> lits) : lits_(std::move(lits)) {
  std::sort(lits_.begin(), lits_.end(), LitOrder{});
  lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
  for (std::size_t i = 1; i < lits_.size(); ++i) {
    if (lits_[i].var() == lits_[i - 1].var()) {
      tautological_ = true;
      return;
    }
  }
}

bool Clause::contains(Lit l) const {
  return std::binary_search(lits_.begin(), lits_.end(), l, LitOrder{});
}

CnfFormula CnfFormula::constant(bool value, Var num_vars) {
  CnfFormula f(num_vars);
  if (!value) f.clauses_.emplace_back();
  return f;
}

void CnfFormula::add_clause(Clause clause) {
  if (clause.tautological()) return;
  for (Lit l : clause) {
    if (l.var() > num_vars_)
      throw StructuralError("clause uses variable " + std::to_string(l.var()) +
                            " beyond num_vars=" + std::to_string(num_vars_));
  }
  clauses_.push_back(std::move(clause));
}

void CnfFormula::add_clause(std::initializer_list<std::int32_t> dimacs_lits) {
  std::vector<Lit> lits;
  lits.reserve(dimacs_lits.size());
  for (std::int32_t code : dimacs_lits) lits.push_back(Lit::from_dimacs(code));
  add_clause(Clause(std::move(lits)));
}

void CnfFormula::append(const CnfFormula& other) {
  if (other.num_vars_ > num_vars_) num_vars_ = other.num_vars_;
  for (const Clause& c : other.clauses_) add_clause(c);
}

void CnfFormula::set_num_vars(Var n) {
  for (const Clause& c : clauses_)
    for (Lit l : c)
      if (l.var() > n)
        throw StructuralError("cannot shrink num_vars below used variable " +
                              std::to_string(l.var()));
  num_vars_ = n;
}

bool CnfFormula::is_false() const {
  return std::any_of(clauses_.begin(), clauses_.end(),
                     [](const Clause& c) { return c.empty(); });
}

bool CnfFormula::satisfied_by(const std::vector<bool>& assignment) const {
  for (const Clause& c : clauses_) {
    bool sat = false;
    for (Lit l : c) {
      if (assignment.at(l.var()) != l.negated()) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

std::vector<Clause> CnfFormula::canonical_clauses() const {
  std::vector<Clause> out = clauses_;
  std::sort(out.begin(), out.end());
  return out;
}

std::string CnfFormula::to_string() const {
  std::ostringstream os;
  if (clauses_.empty()) return "TRUE";
  bool first_clause = true;
  for (const Clause& c : clauses_) {
    if (!first_clause) os << " & ";
    first_clause = false;
    os << "(";
    bool first = true;
    for (Lit l : c) {
      if (!first) os << " | ";
      first = false;
      if (l.negated()) os << "-";
      os << l.var();
    }
    os << ")";
  }
  return os.str();
}

}  // namespace fairssat
