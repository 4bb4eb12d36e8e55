#include "fairssat/model.hpp"

#include <fstream>
#include <set>

#include "fairssat/errors.hpp"
#include "fairssat/text.hpp"

namespace fairssat {

bool DecisionTreeModel::predict(const std::vector<bool>& bits) const {
  int i = 0;
  for (;;) {
    const TreeNode& n = nodes.at(static_cast<std::size_t>(i));
    if (n.is_leaf()) return *n.label;
    i = bits[n.feature - 1] ? n.yes : n.no;
  }
}

namespace {

void validate_tree_node(const DecisionTreeModel& tree, int index, std::set<Var>& path) {
  if (index < 0 || static_cast<std::size_t>(index) >= tree.nodes.size()) {
    throw StructuralError("decision tree branch index " + std::to_string(index) +
                          " is out of range");
  }
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(index)];
  if (n.is_leaf()) return;
  if (n.feature == 0) throw StructuralError("decision tree internal node without a feature");
  if (!path.insert(n.feature).second) {
    throw StructuralError("decision tree tests variable " + std::to_string(n.feature) +
                          " twice on one path");
  }
  validate_tree_node(tree, n.yes, path);
  validate_tree_node(tree, n.no, path);
  path.erase(n.feature);
}

}  // namespace

void DecisionTreeModel::validate() const {
  if (nodes.empty()) throw StructuralError("decision tree has no nodes");
  std::set<Var> path;
  validate_tree_node(*this, 0, path);
}

bool LinearModel::predict(const std::vector<bool>& bits) const {
  double score = bias;
  for (const auto& [v, w] : weights) {
    if (bits[v - 1]) score += w;
  }
  return score >= 0.0;
}

namespace {

[[noreturn]] void model_fail(const std::string& msg) { throw ParseError("model JSON: " + msg); }

void check_tree_json(const nlohmann::json& node) {
  if (!node.is_object()) model_fail("tree node must be a JSON object");
  if (node.contains("leaf")) {
    const auto& leaf = node.at("leaf");
    if (leaf.is_boolean()) return;
    if (leaf.is_number_integer()) {
      const auto v = leaf.get<long long>();
      if (v == 0 || v == 1) return;
    }
    model_fail("leaf label must be 0 or 1");
  }
  if (!node.contains("feature") || !node.at("feature").is_string()) {
    model_fail("internal tree node needs a \"feature\" name");
  }
  const bool has_threshold = node.contains("threshold");
  const bool has_category = node.contains("category");
  if (has_threshold == has_category) {
    model_fail("internal tree node needs exactly one of \"threshold\" or \"category\"");
  }
  if (has_threshold && !node.at("threshold").is_number()) {
    model_fail("tree node threshold must be a number");
  }
  if (has_category && !node.at("category").is_string()) {
    model_fail("tree node category must be a string");
  }
  if (!node.contains("yes") || !node.contains("no")) {
    model_fail("internal tree node needs \"yes\" and \"no\" branches");
  }
  check_tree_json(node.at("yes"));
  check_tree_json(node.at("no"));
}

bool leaf_label(const nlohmann::json& leaf) {
  return leaf.is_boolean() ? leaf.get<bool>() : leaf.get<long long>() == 1;
}

// Feature names one tree node stands for, matching FeatureDef::name().
std::string tree_node_feature_name(const nlohmann::json& node) {
  const std::string attr = node.at("feature").get<std::string>();
  if (node.contains("threshold")) {
    return attr + ">=" + format_double(node.at("threshold").get<double>());
  }
  return attr + "=" + node.at("category").get<std::string>();
}

void collect_tree_thresholds(const nlohmann::json& node, ThresholdMap& out) {
  if (node.contains("leaf")) return;
  if (node.contains("threshold")) {
    out[node.at("feature").get<std::string>()].push_back(node.at("threshold").get<double>());
  }
  collect_tree_thresholds(node.at("yes"), out);
  collect_tree_thresholds(node.at("no"), out);
}

// "attr>=0.69" -> (attr, 0.69); nullopt when the tail is not a number.
void collect_name_threshold(const std::string& name, ThresholdMap& out) {
  const std::size_t pos = name.rfind(">=");
  if (pos == std::string::npos || pos == 0) return;
  auto t = parse_double(std::string_view(name).substr(pos + 2));
  if (!t) return;
  out[name.substr(0, pos)].push_back(*t);
}

int build_tree(const nlohmann::json& node, const FeatureMap& map, DecisionTreeModel& tree) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (node.contains("leaf")) {
    tree.nodes[index].label = leaf_label(node.at("leaf"));
    return index;
  }
  const std::string name = tree_node_feature_name(node);
  auto var = map.find(name);
  if (!var) {
    throw ValidationError("unresolvable feature '" + name +
                          "': no matching variable in the feature map");
  }
  tree.nodes[index].feature = *var;
  tree.nodes[index].yes = build_tree(node.at("yes"), map, tree);
  tree.nodes[index].no = build_tree(node.at("no"), map, tree);
  return index;
}

}  // namespace

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  ModelSpec spec;
  try {
    spec.type_ = j.at("type").get<std::string>();
    if (spec.type_ == "tree") {
      check_tree_json(j.at("root"));
    } else if (spec.type_ == "linear") {
      const auto& weights = j.at("weights");
      if (!weights.is_object()) model_fail("\"weights\" must map feature names to numbers");
      for (const auto& [name, w] : weights.items()) {
        if (name.empty() || !w.is_number()) {
          model_fail("\"weights\" must map feature names to numbers");
        }
      }
      if (!j.at("bias").is_number()) model_fail("\"bias\" must be a number");
    } else if (spec.type_ == "cnf") {
      const auto& clauses = j.at("clauses");
      if (!clauses.is_array()) model_fail("\"clauses\" must be an array of literal arrays");
      for (const auto& clause : clauses) {
        if (!clause.is_array()) model_fail("\"clauses\" must be an array of literal arrays");
        for (const auto& lit : clause) {
          if (!lit.is_string() || lit.get<std::string>().empty() ||
              lit.get<std::string>() == "-") {
            model_fail("CNF literals are feature names with an optional leading '-'");
          }
        }
      }
    } else {
      model_fail("unknown model type '" + spec.type_ + "'");
    }
    spec.body_ = j;
  } catch (const nlohmann::json::exception& e) {
    model_fail(e.what());
  }
  return spec;
}

ModelSpec ModelSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return from_json(j);
}

ThresholdMap ModelSpec::numeric_thresholds() const {
  ThresholdMap out;
  if (type_ == "tree") {
    collect_tree_thresholds(body_.at("root"), out);
  } else if (type_ == "linear") {
    for (const auto& [name, w] : body_.at("weights").items()) {
      collect_name_threshold(name, out);
    }
  } else {
    for (const auto& clause : body_.at("clauses")) {
      for (const auto& lit : clause) {
        std::string name = lit.get<std::string>();
        if (name.front() == '-') name.erase(0, 1);
        collect_name_threshold(name, out);
      }
    }
  }
  return out;
}

ClassifierModel ModelSpec::resolve(const FeatureMap& map) const {
  if (type_ == "tree") {
    DecisionTreeModel tree;
    build_tree(body_.at("root"), map, tree);
    tree.validate();
    return tree;
  }
  if (type_ == "linear") {
    LinearModel linear;
    linear.bias = body_.at("bias").get<double>();
    for (const auto& [name, w] : body_.at("weights").items()) {
      auto var = map.find(name);
      if (!var) {
        throw ValidationError("unresolvable feature '" + name +
                              "': no matching variable in the feature map");
      }
      linear.weights.emplace_back(*var, w.get<double>());
    }
    return linear;
  }
  CnfRuleModel cnf{CnfFormula(map.num_vars())};
  for (const auto& clause : body_.at("clauses")) {
    std::vector<Lit> lits;
    for (const auto& lit : clause) {
      std::string name = lit.get<std::string>();
      const bool negated = name.front() == '-';
      if (negated) name.erase(0, 1);
      auto var = map.find(name);
      if (!var) {
        throw ValidationError("unresolvable feature '" + name +
                              "': no matching variable in the feature map");
      }
      lits.emplace_back(*var, negated);
    }
    cnf.positive.add_clause(Clause(std::move(lits)));
  }
  return cnf;
}

}  // namespace fairssat
