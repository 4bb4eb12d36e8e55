#ifndef FAIRSSAT_MODEL_HPP
#define FAIRSSAT_MODEL_HPP

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fairssat/cnf.hpp"
#include "fairssat/dataset.hpp"

namespace fairssat {

// Binary decision tree over Boolean feature variables. Internal nodes branch
// on a variable (yes = variable true); leaves carry the predicted label.
struct TreeNode {
  std::optional<bool> label;  // set iff leaf
  Var feature = 0;
  int yes = -1;
  int no = -1;

  bool is_leaf() const { return label.has_value(); }
};

struct DecisionTreeModel {
  std::vector<TreeNode> nodes;  // root at index 0
  bool predict(const std::vector<bool>& bits) const;  // bits[v - 1]
  // At least one leaf; every root-to-leaf path tests a variable at most once.
  void validate() const;
};

// Decision rule: sum of weights over true variables plus bias >= 0 => label 1.
struct LinearModel {
  std::vector<std::pair<Var, double>> weights;
  double bias = 0.0;

  bool predict(const std::vector<bool>& bits) const;
};

// The classifier as a CNF over feature variables, satisfied iff label 1.
struct CnfRuleModel {
  CnfFormula positive;
};

using ClassifierModel = std::variant<DecisionTreeModel, LinearModel, CnfRuleModel>;

// Model JSON: {"type": "tree"|"linear"|"cnf", ...}.
//   tree:   {"type":"tree","root":{"feature":name,"threshold":t|"category":c,
//            "yes":node,"no":node} | {"leaf":0|1}}
//   linear: {"type":"linear","weights":{feature-name: w, ...},"bias": b}
//   cnf:    {"type":"cnf","clauses":[[signed feature-name, ...], ...]}
// Feature names are FeatureMap predicate names ("income>=0.69", "sex=male",
// "age in [20,30)"); a leading '-' in CNF literals negates.
class ModelSpec {
 public:
  static ModelSpec from_json(const nlohmann::json& j);
  static ModelSpec from_json_file(const std::string& path);

  const std::string& type() const { return type_; }

  // Thresholds per attribute name harvested from tree nodes and from
  // "attr>=t" feature names in linear/cnf models, so the feature map can
  // allocate matching threshold variables.
  ThresholdMap numeric_thresholds() const;

  // Maps feature names to variables; unresolvable names are ValidationErrors.
  ClassifierModel resolve(const FeatureMap& map) const;

 private:
  std::string type_;
  nlohmann::json body_;
};

}  // namespace fairssat

#endif
