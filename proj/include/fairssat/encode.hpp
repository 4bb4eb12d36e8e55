#ifndef FAIRSSAT_ENCODE_HPP
#define FAIRSSAT_ENCODE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "fairssat/cnf.hpp"
#include "fairssat/dataset.hpp"
#include "fairssat/model.hpp"

namespace fairssat {

// One clause per root-to-leaf path with a label-0 leaf (each such path's
// conjunction, negated by De Morgan), so the CNF is satisfied exactly by the
// assignments the tree maps to label 1.
CnfFormula encode_tree_positive(const DecisionTreeModel& tree, Var num_vars);

// Same over label-1 leaves: satisfied exactly where the tree predicts 0.
CnfFormula encode_tree_negative(const DecisionTreeModel& tree, Var num_vars);

// Integer at-least/at-most constraint over literals. `degenerate` marks
// constraints whose truth no variable can change.
struct PseudoBooleanConstraint {
  enum class Cmp { kAtLeast, kAtMost };
  enum class Degenerate { kNone, kTrue, kFalse };

  Cmp cmp = Cmp::kAtLeast;
  std::vector<std::pair<Lit, std::int64_t>> terms;
  std::int64_t bound = 0;
  Degenerate degenerate = Degenerate::kNone;
};

// Zeroes weights with |w| <= lambda, normalizes weights and bias by their
// max absolute value, scales and rounds half-away-from-zero, and returns
// sum c_i x_i >= -c_b, the quantized form of W.X + b >= 0 (score ties
// classify as 1).
PseudoBooleanConstraint quantize_linear(const LinearModel& model, int scale, double lambda);

struct PbEncoding {
  CnfFormula cnf;
  std::vector<Var> aux;
};

// BDD-style decomposition with one defined auxiliary per reachable
// (term index, residual bound) pair. Auxiliaries are biconditionally defined,
// so every assignment of the original variables forces them: projections onto
// the originals are exactly the constraint's models, each with a unique
// auxiliary extension.
PbEncoding pb_to_cnf(const PseudoBooleanConstraint& constraint, Var first_fresh_var);

enum class Polarity { kPositive, kNegative };

// Positive: the at-least encoding of W.X + b >= 0. Negative: the at-most
// encoding of its strict complement (<= bound - 1). The two model sets
// partition the assignments over the original variables.
PbEncoding encode_linear(const LinearModel& model, int scale, double lambda,
                         Polarity polarity, Var num_vars);

// (stronger threshold, weaker threshold) pairs for adjacent entries of each
// descending chain.
std::vector<std::pair<Var, Var>> implication_pairs(const std::vector<std::vector<Var>>& chains);

// Appends one clause (-stronger | weaker) per adjacent pair of each chain
// (thresholds descending), removing probability mass from impossible
// threshold combinations.
CnfFormula add_bin_implications(const CnfFormula& cnf,
                                const std::vector<std::vector<Var>>& chains);

struct EncodeOptions {
  int scale = 64;
  double lambda = 0.0;
  bool bin_implications = false;
};

// Both polarities of a classifier over the map's variables. The negative
// side always projects onto the original variables as the exact complement
// of the positive side, with auxiliaries safe to quantify existentially
// innermost. With bin implications the positive side becomes
// classifier AND implications and the negative side its complement.
struct ClassifierEncoding {
  CnfFormula positive;
  std::vector<Var> positive_aux;
  CnfFormula negative;
  std::vector<Var> negative_aux;
};

ClassifierEncoding encode_classifier(const ClassifierModel& model, const FeatureMap& map,
                                     const EncodeOptions& options = {});

}  // namespace fairssat

#endif
