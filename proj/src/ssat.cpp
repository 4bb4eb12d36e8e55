#include "fairssat/ssat.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>

#include "fairssat/errors.hpp"

namespace fairssat {

Quantifier Quantifier::random(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("randomized quantifier probability " + std::to_string(p) +
                          " is outside [0, 1]");
  }
  return Quantifier(Kind::kRandom, p);
}

SsatFormula::SsatFormula(std::vector<PrefixEntry> prefix, CnfFormula matrix)
    : prefix_(std::move(prefix)), matrix_(std::move(matrix)) {
  std::vector<char> quantified(matrix_.num_vars() + 1, 0);
  for (const auto& [v, q] : prefix_) {
    if (v == 0 || v > matrix_.num_vars()) {
      throw StructuralError("prefix variable " + std::to_string(v) +
                            " is outside the matrix variable range 1.." +
                            std::to_string(matrix_.num_vars()));
    }
    if (quantified[v]) {
      throw StructuralError("variable " + std::to_string(v) + " is quantified twice");
    }
    quantified[v] = 1;
  }
  for (const Clause& c : matrix_.clauses()) {
    for (Lit l : c.literals()) {
      if (!quantified[l.var()]) {
        throw StructuralError("variable " + std::to_string(l.var()) +
                              " appears in the matrix but is not quantified");
      }
    }
  }
}

std::optional<Quantifier> SsatFormula::quantifier_of(Var v) const {
  for (const auto& [u, q] : prefix_) {
    if (u == v) return q;
  }
  return std::nullopt;
}

std::vector<Var> SsatFormula::leading_exists_block() const {
  std::vector<Var> block;
  for (const auto& [v, q] : prefix_) {
    if (!q.is_exists()) break;
    block.push_back(v);
  }
  return block;
}

std::optional<bool> SolveResult::witness_value(Var v) const {
  for (const auto& [u, b] : witness) {
    if (u == v) return b;
  }
  return std::nullopt;
}

namespace {

// Clauses as vectors of DIMACS codes, kept in the order CnfFormula stores
// literals (variable id ascending, negative polarity first).
using RawClause = std::vector<std::int32_t>;
using RawMatrix = std::vector<RawClause>;

Var var_of(std::int32_t code) { return static_cast<Var>(code < 0 ? -code : code); }

RawMatrix to_raw(const CnfFormula& matrix) {
  RawMatrix raw;
  raw.reserve(matrix.num_clauses());
  for (const Clause& c : matrix.clauses()) {
    RawClause rc;
    rc.reserve(c.size());
    for (Lit l : c.literals()) rc.push_back(l.dimacs());
    raw.push_back(std::move(rc));
  }
  return raw;
}

// Cofactor under v := b. Satisfied clauses vanish, falsified literals are
// removed; nullopt signals an empty clause (the cofactor is FALSE).
std::optional<RawMatrix> cofactor(const RawMatrix& m, Var v, bool b) {
  const std::int32_t sat = b ? static_cast<std::int32_t>(v) : -static_cast<std::int32_t>(v);
  RawMatrix out;
  out.reserve(m.size());
  for (const RawClause& c : m) {
    bool satisfied = false;
    for (std::int32_t code : c) {
      if (code == sat) {
        satisfied = true;
        break;
      }
    }
    if (satisfied) continue;
    RawClause nc;
    nc.reserve(c.size());
    for (std::int32_t code : c) {
      if (code != -sat) nc.push_back(code);
    }
    if (nc.empty()) return std::nullopt;
    out.push_back(std::move(nc));
  }
  return out;
}

struct KeyHash {
  std::size_t operator()(const std::vector<std::int32_t>& key) const {
    std::size_t h = 1469598103934665603ull;
    for (std::int32_t x : key) {
      auto u = static_cast<std::uint32_t>(x);
      for (int i = 0; i < 4; ++i) {
        h ^= (u >> (8 * i)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
    return h;
  }
};

// Prefix-order elimination with unit propagation and memoization keyed on the
// canonicalized residual matrix. A variable that has disappeared from the
// residual matrix contributes a factor of one under either quantifier, so the
// matrix alone identifies the subproblem value and entries can be shared
// across branches that assigned different outer variables.
class Evaluator {
 public:
  explicit Evaluator(const SsatFormula& f) : root_(to_raw(f.matrix())) {
    const Var n = f.matrix().num_vars();
    exists_.assign(n + 1, false);
    prob_.assign(n + 1, 0.0);
    position_.assign(n + 1, 0);
    for (const auto& [v, q] : f.prefix()) {
      order_.push_back(v);
      position_[v] = order_.size();  // 1-based; 0 means unquantified
      exists_[v] = q.is_exists();
      if (q.is_random()) prob_[v] = q.prob();
    }
  }

  const RawMatrix& root() const { return root_; }
  bool is_exists(Var v) const { return exists_[v]; }
  std::size_t position(Var v) const { return position_[v]; }

  double eval_cofactor(const RawMatrix& m, Var v, bool b) {
    auto next = cofactor(m, v, b);
    return next ? eval(std::move(*next)) : 0.0;
  }

  double eval(RawMatrix m) {
    // Unit propagation to fixpoint. An existential unit forces its branch
    // (the opposing cofactor is FALSE); a randomized unit does the same and
    // scales the result by its branch probability. The branch probabilities
    // are multiplied in sorted order: the propagation closure is a set, so
    // this keeps the result bit-identical no matter which units fire first
    // (e.g. before vs after conditioning on a witness).
    std::vector<double> unit_weights;
    for (;;) {
      const RawClause* unit = nullptr;
      for (const RawClause& c : m) {
        if (c.empty()) return 0.0;
        if (c.size() == 1 && unit == nullptr) unit = &c;
      }
      if (unit == nullptr) break;
      const std::int32_t code = (*unit)[0];
      const Var v = var_of(code);
      const bool b = code > 0;
      if (!exists_[v]) {
        const double f = b ? prob_[v] : 1.0 - prob_[v];
        if (f == 0.0) return 0.0;
        unit_weights.push_back(f);
      }
      auto next = cofactor(m, v, b);
      if (!next) return 0.0;
      m = std::move(*next);
    }
    double weight = 1.0;
    std::sort(unit_weights.begin(), unit_weights.end());
    for (double f : unit_weights) weight *= f;
    if (m.empty()) return weight;

    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    std::vector<std::int32_t> key;
    key.reserve(m.size() * 4);
    for (const RawClause& c : m) {
      key.insert(key.end(), c.begin(), c.end());
      key.push_back(0);
    }
    if (auto it = memo_.find(key); it != memo_.end()) return weight * it->second;

    // Branch on the outermost quantified variable that still occurs.
    Var branch = 0;
    {
      std::vector<char> occurs(exists_.size(), 0);
      for (const RawClause& c : m) {
        for (std::int32_t code : c) occurs[var_of(code)] = 1;
      }
      for (Var v : order_) {
        if (occurs[v]) {
          branch = v;
          break;
        }
      }
    }
    assert(branch != 0);

    double sub = 0.0;
    if (exists_[branch]) {
      sub = std::max(eval_cofactor(m, branch, true), eval_cofactor(m, branch, false));
    } else {
      const double p = prob_[branch];
      if (p > 0.0) sub += p * eval_cofactor(m, branch, true);
      if (p < 1.0) sub += (1.0 - p) * eval_cofactor(m, branch, false);
    }
    memo_.emplace(std::move(key), sub);
    return weight * sub;
  }

 private:
  RawMatrix root_;
  std::vector<Var> order_;
  std::vector<char> exists_;
  std::vector<double> prob_;
  std::vector<std::size_t> position_;
  std::unordered_map<std::vector<std::int32_t>, double, KeyHash> memo_;
};

}  // namespace

SolveResult evaluate(const SsatFormula& formula) {
  Evaluator ev(formula);
  const RawMatrix& root = ev.root();

  Assignment witness;
  std::vector<char> assigned(formula.matrix().num_vars() + 1, 0);

  // Maximizing descent over the leading existential block. Ties choose FALSE,
  // so an inconsequential leading variable reports as 0.
  RawMatrix cur = root;
  for (Var v : formula.leading_exists_block()) {
    const double p1 = ev.eval_cofactor(cur, v, true);
    const double p0 = ev.eval_cofactor(cur, v, false);
    const bool value = p1 > p0;
    witness.emplace_back(v, value);
    assigned[v] = 1;
    auto next = cofactor(cur, v, value);
    cur = next ? std::move(*next) : RawMatrix{RawClause{}};
  }

  // Existential variables deeper in the prefix whose values the matrix forces
  // through unit propagation. Every satisfying assignment agrees with them,
  // so adding them to the witness never changes the probability.
  {
    Assignment forced;
    RawMatrix m = root;
    for (;;) {
      const RawClause* unit = nullptr;
      bool conflict = false;
      for (const RawClause& c : m) {
        if (c.empty()) {
          conflict = true;
          break;
        }
        if (c.size() == 1 && unit == nullptr) unit = &c;
      }
      if (conflict || unit == nullptr) break;
      const std::int32_t code = (*unit)[0];
      const Var v = var_of(code);
      const bool b = code > 0;
      if (ev.is_exists(v) && !assigned[v]) {
        forced.emplace_back(v, b);
        assigned[v] = 1;
      }
      auto next = cofactor(m, v, b);
      if (!next) break;
      m = std::move(*next);
    }
    std::sort(forced.begin(), forced.end(), [&ev](const auto& a, const auto& b) {
      return ev.position(a.first) < ev.position(b.first);
    });
    witness.insert(witness.end(), forced.begin(), forced.end());
  }

  // Evaluating under the witness reproduces the reported probability exactly;
  // conditioning on it is how callers should interpret the result.
  SolveResult result;
  {
    RawMatrix m = root;
    bool conflict = false;
    for (const auto& [v, b] : witness) {
      auto next = cofactor(m, v, b);
      if (!next) {
        conflict = true;
        break;
      }
      m = std::move(*next);
    }
    result.probability = conflict ? 0.0 : ev.eval(std::move(m));
  }
  result.witness = std::move(witness);
  return result;
}

SsatFormula condition(const SsatFormula& formula,
                      std::span<const std::pair<Var, bool>> assignment) {
  std::map<Var, bool> values;
  for (const auto& [v, b] : assignment) {
    if (!formula.quantifier_of(v)) {
      throw StructuralError("cannot condition on variable " + std::to_string(v) +
                            ": it is not in the prefix");
    }
    if (!values.emplace(v, b).second) {
      throw StructuralError("variable " + std::to_string(v) +
                            " is assigned twice in the conditioning assignment");
    }
  }

  std::vector<PrefixEntry> prefix;
  prefix.reserve(formula.prefix().size());
  for (const auto& entry : formula.prefix()) {
    if (!values.count(entry.first)) prefix.push_back(entry);
  }

  const Var n = formula.matrix().num_vars();
  CnfFormula matrix(n);
  for (const Clause& c : formula.matrix().clauses()) {
    bool satisfied = false;
    std::vector<Lit> kept;
    for (Lit l : c.literals()) {
      auto it = values.find(l.var());
      if (it == values.end()) {
        kept.push_back(l);
      } else if (it->second != l.negated()) {
        satisfied = true;
        break;
      }
    }
    if (satisfied) continue;
    if (kept.empty()) {
      return SsatFormula(std::move(prefix), CnfFormula::constant(false, n));
    }
    matrix.add_clause(Clause(std::move(kept)));
  }
  return SsatFormula(std::move(prefix), std::move(matrix));
}

double weighted_model_count(const CnfFormula& matrix, const ProbMap& probs) {
  std::set<Var> vars;
  for (const Clause& c : matrix.clauses()) {
    for (Lit l : c.literals()) vars.insert(l.var());
  }
  std::vector<PrefixEntry> prefix;
  prefix.reserve(vars.size());
  for (Var v : vars) {
    auto it = probs.find(v);
    if (it == probs.end()) {
      throw ValidationError("no probability given for variable " + std::to_string(v));
    }
    prefix.emplace_back(v, Quantifier::random(it->second));
  }
  return evaluate(SsatFormula(std::move(prefix), matrix)).probability;
}

std::pair<CnfFormula, std::vector<Var>> negate_tseitin(const CnfFormula& matrix) {
  const Var n = matrix.num_vars();
  if (matrix.is_false()) return {CnfFormula::constant(true, n), {}};
  if (matrix.num_clauses() == 0) return {CnfFormula::constant(false, n), {}};

  CnfFormula out(n + static_cast<Var>(matrix.num_clauses()));
  std::vector<Var> aux;
  aux.reserve(matrix.num_clauses());
  std::vector<Lit> some_aux;
  some_aux.reserve(matrix.num_clauses());
  Var next = n;
  for (const Clause& c : matrix.clauses()) {
    const Var t = ++next;
    aux.push_back(t);
    some_aux.emplace_back(t, false);
    // t <-> the clause is falsified.
    std::vector<Lit> reverse;
    reverse.reserve(c.size() + 1);
    reverse.emplace_back(t, false);
    for (Lit l : c.literals()) {
      out.add_clause(Clause({Lit(t, true), ~l}));
      reverse.push_back(l);
    }
    out.add_clause(Clause(std::move(reverse)));
  }
  out.add_clause(Clause(std::move(some_aux)));
  return {std::move(out), std::move(aux)};
}

SolveResult solve_ur(const UrFormula& formula) {
  auto [negated, aux] = negate_tseitin(formula.matrix);
  return solve_ur(formula, negated, aux);
}

SolveResult solve_ur(const UrFormula& formula, const CnfFormula& negated_matrix,
                     std::span<const Var> negated_aux) {
  std::vector<PrefixEntry> prefix;
  prefix.reserve(formula.universal.size() + formula.randomized.size() + negated_aux.size());
  for (Var v : formula.universal) prefix.emplace_back(v, Quantifier::exists());
  for (const auto& [v, p] : formula.randomized) prefix.emplace_back(v, Quantifier::random(p));
  for (Var v : negated_aux) prefix.emplace_back(v, Quantifier::exists());

  const SolveResult dual = evaluate(SsatFormula(std::move(prefix), negated_matrix));

  SolveResult result;
  result.probability = 1.0 - dual.probability;
  std::set<Var> universal(formula.universal.begin(), formula.universal.end());
  for (const auto& [v, b] : dual.witness) {
    if (universal.count(v)) result.witness.emplace_back(v, b);
  }
  return result;
}

}  // namespace fairssat
