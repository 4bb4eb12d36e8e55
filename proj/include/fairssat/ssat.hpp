#ifndef FAIRSSAT_SSAT_HPP
#define FAIRSSAT_SSAT_HPP

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fairssat/cnf.hpp"

namespace fairssat {

// Exists or Random(p). Universal quantifiers are never stored; solve_ur
// dualizes them away before any formula is built.
class Quantifier {
public:
  enum class Kind { kExists, kRandom };

  static Quantifier exists() { return Quantifier(Kind::kExists, 0.0); }
  static Quantifier random(double p);  // validates p in [0,1]

  Kind kind() const { return kind_; }
  bool is_exists() const { return kind_ == Kind::kExists; }
  bool is_random() const { return kind_ == Kind::kRandom; }
  double prob() const { return prob_; }

private:
  Quantifier(Kind kind, double prob) : kind_(kind), prob_(prob) {}
  Kind kind_;
  double prob_;
};

using PrefixEntry = std::pair<Var, Quantifier>;
using Assignment = std::vector<std::pair<Var, bool>>;

// Quantifier prefix plus CNF matrix. The prefix order is significant and is
// preserved; every variable of the matrix must be covered exactly once (the
// prefix may quantify additional variables that the matrix never mentions).
class SsatFormula {
public:
  SsatFormula(std::vector<PrefixEntry> prefix, CnfFormula matrix);

  const std::vector<PrefixEntry>& prefix() const { return prefix_; }
  const CnfFormula& matrix() const { return matrix_; }

  std::optional<Quantifier> quantifier_of(Var v) const;

  // Variables of the leading maximal existential block, in prefix order.
  std::vector<Var> leading_exists_block() const;

private:
  std::vector<PrefixEntry> prefix_;
  CnfFormula matrix_;
};

// The witness covers the leading maximal existential block (maximizing choice
// per variable, ties broken toward FALSE). Existential variables deeper in the
// prefix are included only when a unit clause of the original matrix forces
// them, which is how the group-selection literals of an RE instance surface.
struct SolveResult {
  double probability = 0.0;
  Assignment witness;

  std::optional<bool> witness_value(Var v) const;
};

// Exact satisfying probability by quantifier elimination in strict prefix
// order, with unit propagation and memoization on the canonical residual
// matrix. Double-precision arithmetic throughout.
SolveResult evaluate(const SsatFormula& formula);

// Substitutes the assignment: satisfied clauses vanish, falsified literals are
// deleted, assigned variables leave the prefix. Producing an empty clause
// collapses the matrix to the FALSE constant. Assigning a variable not in the
// prefix is a StructuralError.
SsatFormula condition(const SsatFormula& formula, std::span<const std::pair<Var, bool>> assignment);

// Per-variable probability of being 1, keyed by variable id.
using ProbMap = std::map<Var, double>;

// Randomized-only specialization of evaluate: the probability-weighted count
// of satisfying assignments. Every variable of `matrix` needs an entry in
// `probs` (ValidationError otherwise).
double weighted_model_count(const CnfFormula& matrix, const ProbMap& probs);

// CNF equisatisfiable with the negation of `matrix`: one fresh auxiliary
// variable per clause, defined as that clause's negation, plus one clause
// asserting that some auxiliary holds. The auxiliaries are value-forced by any
// assignment of the original variables, so quantifying them existentially
// innermost leaves satisfying probabilities unchanged.
std::pair<CnfFormula, std::vector<Var>> negate_tseitin(const CnfFormula& matrix);

// Universal block over A-variables followed by a randomized tail.
struct UrFormula {
  std::vector<Var> universal;
  std::vector<std::pair<Var, double>> randomized;
  CnfFormula matrix;
};

// Pr of a UR formula via duality: 1 minus the exist-random probability of the
// negated matrix. The witness is the dual's maximizing assignment, i.e. the
// universal assignment minimizing the randomized count. When the caller has a
// direct CNF for the negated matrix (e.g. a negative-class classifier
// encoding) it is used as-is; otherwise negate_tseitin supplies one, with the
// auxiliaries appended as innermost existentials.
SolveResult solve_ur(const UrFormula& formula);
SolveResult solve_ur(const UrFormula& formula, const CnfFormula& negated_matrix,
                     std::span<const Var> negated_aux);

}  // namespace fairssat

#endif
