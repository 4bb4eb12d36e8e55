#include "fairssat/encode.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>

#include "fairssat/errors.hpp"
#include "fairssat/ssat.hpp"

namespace fairssat {

namespace {

void collect_paths(const DecisionTreeModel& tree, int index, bool target_label,
                   std::vector<Lit>& path, CnfFormula& out) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(index)];
  if (n.is_leaf()) {
    if (*n.label == target_label) {
      // Negate the path conjunction: one clause of flipped path literals.
      std::vector<Lit> clause;
      clause.reserve(path.size());
      for (Lit l : path) clause.push_back(~l);
      out.add_clause(Clause(std::move(clause)));
    }
    return;
  }
  path.emplace_back(n.feature, false);
  collect_paths(tree, n.yes, target_label, path, out);
  path.back() = Lit(n.feature, true);
  collect_paths(tree, n.no, target_label, path, out);
  path.pop_back();
}

CnfFormula encode_tree(const DecisionTreeModel& tree, Var num_vars, bool excluded_label) {
  tree.validate();
  for (const TreeNode& n : tree.nodes) {
    if (!n.is_leaf() && n.feature > num_vars) {
      throw StructuralError("tree feature variable " + std::to_string(n.feature) +
                            " exceeds the variable count " + std::to_string(num_vars));
    }
  }
  CnfFormula out(num_vars);
  std::vector<Lit> path;
  collect_paths(tree, 0, excluded_label, path, out);
  return out;
}

}  // namespace

CnfFormula encode_tree_positive(const DecisionTreeModel& tree, Var num_vars) {
  return encode_tree(tree, num_vars, false);
}

CnfFormula encode_tree_negative(const DecisionTreeModel& tree, Var num_vars) {
  return encode_tree(tree, num_vars, true);
}

PseudoBooleanConstraint quantize_linear(const LinearModel& model, int scale, double lambda) {
  if (scale < 1) throw ValidationError("scale must be a positive integer");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");

  std::vector<std::pair<Var, double>> kept;
  for (const auto& [v, w] : model.weights) {
    if (std::abs(w) > lambda) kept.emplace_back(v, w);
  }

  PseudoBooleanConstraint c;
  if (kept.empty()) {
    c.degenerate = model.bias >= 0.0 ? PseudoBooleanConstraint::Degenerate::kTrue
                                     : PseudoBooleanConstraint::Degenerate::kFalse;
    return c;
  }

  double max_abs = std::abs(model.bias);
  for (const auto& [v, w] : kept) max_abs = std::max(max_abs, std::abs(w));
  std::int64_t scaled_bias = std::llround(model.bias / max_abs * scale);
  for (const auto& [v, w] : kept) {
    const std::int64_t coeff = std::llround(w / max_abs * scale);
    if (coeff != 0) c.terms.emplace_back(Lit(v, false), coeff);
  }
  if (c.terms.empty()) {
    c.degenerate = scaled_bias >= 0 ? PseudoBooleanConstraint::Degenerate::kTrue
                                    : PseudoBooleanConstraint::Degenerate::kFalse;
    return c;
  }
  c.cmp = PseudoBooleanConstraint::Cmp::kAtLeast;
  c.bound = -scaled_bias;
  return c;
}

namespace {

// Nonconstant results are the defining auxiliary variable of a BDD node.
struct NodeRef {
  enum class Kind { kTrue, kFalse, kVar } kind;
  Var var = 0;
};

struct PbBuilder {
  const std::vector<std::pair<Lit, std::int64_t>>& terms;  // positive coefficients, descending
  std::vector<std::int64_t> suffix;                        // suffix[i] = sum of coeffs i..end
  CnfFormula& cnf;
  std::vector<Var>& aux;
  std::map<std::pair<std::size_t, std::int64_t>, NodeRef> memo;

  // d <-> [sum_{j >= i} c_j l_j >= k], reached only with 0 < k <= suffix[i].
  NodeRef build(std::size_t i, std::int64_t k) {
    if (k <= 0) return {NodeRef::Kind::kTrue};
    if (suffix[i] < k) return {NodeRef::Kind::kFalse};
    const auto key = std::make_pair(i, k);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    const Lit l = terms[i].first;
    const NodeRef hi = build(i + 1, k - terms[i].second);
    const NodeRef lo = build(i + 1, k);
    // At a reachable node, taking the literal cannot make things worse and
    // skipping it cannot already win: hi is never FALSE, lo never TRUE.
    assert(hi.kind != NodeRef::Kind::kFalse && lo.kind != NodeRef::Kind::kTrue);

    const Var d = cnf.add_var();
    aux.push_back(d);
    const Lit dl(d, false);
    if (hi.kind == NodeRef::Kind::kTrue) {
      cnf.add_clause(Clause({dl, ~l}));
    } else {
      const Lit h(hi.var, false);
      cnf.add_clause(Clause({~dl, ~l, h}));
      cnf.add_clause(Clause({dl, ~l, ~h}));
    }
    if (lo.kind == NodeRef::Kind::kFalse) {
      cnf.add_clause(Clause({~dl, l}));
    } else {
      const Lit m(lo.var, false);
      cnf.add_clause(Clause({~dl, l, m}));
      cnf.add_clause(Clause({dl, l, ~m}));
    }
    const NodeRef ref{NodeRef::Kind::kVar, d};
    memo.emplace(key, ref);
    return ref;
  }
};

}  // namespace

PbEncoding pb_to_cnf(const PseudoBooleanConstraint& constraint, Var first_fresh_var) {
  if (first_fresh_var == 0) throw StructuralError("first fresh variable must be >= 1");
  const Var base = first_fresh_var - 1;
  using Degenerate = PseudoBooleanConstraint::Degenerate;
  if (constraint.degenerate == Degenerate::kTrue) {
    return {CnfFormula::constant(true, base), {}};
  }
  if (constraint.degenerate == Degenerate::kFalse) {
    return {CnfFormula::constant(false, base), {}};
  }

  // Normalize to at-least over positive coefficients.
  std::int64_t bound = constraint.bound;
  std::map<Lit, std::int64_t, LitOrder> by_lit;
  for (const auto& [l, c] : constraint.terms) {
    if (l.var() > base) {
      throw StructuralError("constraint variable " + std::to_string(l.var()) +
                            " is not below the first fresh variable");
    }
    by_lit[l] += constraint.cmp == PseudoBooleanConstraint::Cmp::kAtMost ? -c : c;
  }
  if (constraint.cmp == PseudoBooleanConstraint::Cmp::kAtMost) bound = -bound;

  // Combine opposite polarities of one variable: a.v + b.!v = b + (a-b).v.
  std::vector<std::pair<Lit, std::int64_t>> terms;
  for (auto it = by_lit.begin(); it != by_lit.end();) {
    const auto next = std::next(it);
    if (it->first.negated() && next != by_lit.end() && next->first.var() == it->first.var()) {
      bound -= it->second;
      const std::int64_t combined = next->second - it->second;
      if (combined != 0) terms.emplace_back(next->first, combined);
      it = std::next(next);
    } else {
      if (it->second != 0) terms.emplace_back(it->first, it->second);
      ++it;
    }
  }
  // Flip negative coefficients onto the opposite literal.
  for (auto& [l, c] : terms) {
    if (c < 0) {
      l = ~l;
      bound += -c;
      c = -c;
    }
  }

  std::int64_t total = 0;
  for (const auto& [l, c] : terms) total += c;

  if (bound <= 0) return {CnfFormula::constant(true, base), {}};
  if (total < bound) return {CnfFormula::constant(false, base), {}};

  CnfFormula cnf(base);
  if (total == bound) {
    for (const auto& [l, c] : terms) cnf.add_clause(Clause({l}));
    return {std::move(cnf), {}};
  }
  if (bound == 1) {
    std::vector<Lit> clause;
    clause.reserve(terms.size());
    for (const auto& [l, c] : terms) clause.push_back(l);
    cnf.add_clause(Clause(std::move(clause)));
    return {std::move(cnf), {}};
  }

  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return LitOrder{}(a.first, b.first);
  });
  std::vector<Var> aux;
  PbBuilder builder{terms, std::vector<std::int64_t>(terms.size() + 1, 0), cnf, aux, {}};
  for (std::size_t i = terms.size(); i-- > 0;) {
    builder.suffix[i] = builder.suffix[i + 1] + terms[i].second;
  }
  const NodeRef root = builder.build(0, bound);
  assert(root.kind == NodeRef::Kind::kVar);
  cnf.add_clause(Clause({Lit(root.var, false)}));
  return {std::move(cnf), std::move(aux)};
}

PbEncoding encode_linear(const LinearModel& model, int scale, double lambda,
                         Polarity polarity, Var num_vars) {
  PseudoBooleanConstraint q = quantize_linear(model, scale, lambda);
  if (polarity == Polarity::kNegative) {
    using Degenerate = PseudoBooleanConstraint::Degenerate;
    if (q.degenerate == Degenerate::kTrue) {
      q.degenerate = Degenerate::kFalse;
    } else if (q.degenerate == Degenerate::kFalse) {
      q.degenerate = Degenerate::kTrue;
    } else {
      q.cmp = PseudoBooleanConstraint::Cmp::kAtMost;
      q.bound -= 1;
    }
  }
  return pb_to_cnf(q, num_vars + 1);
}

std::vector<std::pair<Var, Var>> implication_pairs(const std::vector<std::vector<Var>>& chains) {
  std::vector<std::pair<Var, Var>> pairs;
  for (const auto& chain : chains) {
    for (std::size_t i = 1; i < chain.size(); ++i) {
      pairs.emplace_back(chain[i - 1], chain[i]);
    }
  }
  return pairs;
}

CnfFormula add_bin_implications(const CnfFormula& cnf,
                                const std::vector<std::vector<Var>>& chains) {
  CnfFormula out = cnf;
  for (const auto& [stronger, weaker] : implication_pairs(chains)) {
    out.add_clause(Clause({Lit(stronger, true), Lit(weaker, false)}));
  }
  return out;
}

namespace {

// CNF whose existential-auxiliary projection is NOT (classifier AND impl):
// a selector picks either the classifier's negative encoding or a violated
// implication pair. Auxiliaries need not be value-forced here; they are
// quantified existentially innermost, where multiplicity is harmless.
void negate_with_implications(ClassifierEncoding& e,
                              const std::vector<std::pair<Var, Var>>& pairs) {
  CnfFormula out = e.negative;
  const Var selector = out.add_var();
  e.negative_aux.push_back(selector);
  {
    // Guard every clause of the negative encoding behind the selector.
    CnfFormula guarded(out.num_vars());
    for (const Clause& c : e.negative.clauses()) {
      std::vector<Lit> lits = c.literals();
      lits.emplace_back(selector, true);
      guarded.add_clause(Clause(std::move(lits)));
    }
    out = std::move(guarded);
  }
  std::vector<Lit> some_violation{Lit(selector, false)};
  for (const auto& [stronger, weaker] : pairs) {
    const Var w = out.add_var();
    e.negative_aux.push_back(w);
    out.add_clause(Clause({Lit(w, true), Lit(stronger, false)}));
    out.add_clause(Clause({Lit(w, true), Lit(weaker, true)}));
    some_violation.emplace_back(w, false);
  }
  out.add_clause(Clause(std::move(some_violation)));
  e.negative = std::move(out);
}

}  // namespace

ClassifierEncoding encode_classifier(const ClassifierModel& model, const FeatureMap& map,
                                     const EncodeOptions& options) {
  const Var n = map.num_vars();
  ClassifierEncoding e{CnfFormula(n), {}, CnfFormula(n), {}};
  if (const auto* tree = std::get_if<DecisionTreeModel>(&model)) {
    e.positive = encode_tree_positive(*tree, n);
    e.negative = encode_tree_negative(*tree, n);
  } else if (const auto* linear = std::get_if<LinearModel>(&model)) {
    PbEncoding pos = encode_linear(*linear, options.scale, options.lambda, Polarity::kPositive, n);
    PbEncoding neg = encode_linear(*linear, options.scale, options.lambda, Polarity::kNegative, n);
    e.positive = std::move(pos.cnf);
    e.positive_aux = std::move(pos.aux);
    e.negative = std::move(neg.cnf);
    e.negative_aux = std::move(neg.aux);
  } else {
    const auto& cnf = std::get<CnfRuleModel>(model);
    e.positive = cnf.positive;
    if (e.positive.num_vars() < n) e.positive.set_num_vars(n);
    auto [neg, aux] = negate_tseitin(e.positive);
    e.negative = std::move(neg);
    e.negative_aux = std::move(aux);
  }

  if (options.bin_implications) {
    const auto pairs = implication_pairs(map.threshold_chains());
    if (!pairs.empty()) {
      e.positive = add_bin_implications(e.positive, map.threshold_chains());
      negate_with_implications(e, pairs);
    }
  }
  return e;
}

}  // namespace fairssat
