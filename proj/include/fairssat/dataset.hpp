#ifndef FAIRSSAT_DATASET_HPP
#define FAIRSSAT_DATASET_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fairssat/cnf.hpp"
#include "fairssat/ssat.hpp"

namespace fairssat {

enum class AttrKind { kNumeric, kCategorical };

// One column of the schema. Numeric attributes carry either explicit interior
// bin edges or an equal-width bin count; categorical attributes list their
// categories. Protected attributes must be categorical (numeric ones are
// pre-binned into categories, as with age groups).
struct AttributeSpec {
  std::string name;
  AttrKind kind = AttrKind::kNumeric;
  bool is_protected = false;
  std::vector<std::string> categories;
  std::vector<double> edges;
  std::optional<int> bin_count;
};

// Schema JSON: {"label": name, "attributes": [{name, kind, protected,
// bins|categories}]} where "bins" is an integer count or an array of strictly
// increasing interior edges.
class AttributeSchema {
 public:
  AttributeSchema(std::string label, std::vector<AttributeSpec> attributes);

  static AttributeSchema from_json(const nlohmann::json& j);
  static AttributeSchema from_json_file(const std::string& path);

  const std::string& label() const { return label_; }
  const std::vector<AttributeSpec>& attributes() const { return attributes_; }
  const AttributeSpec* find(const std::string& name) const;

 private:
  std::string label_;
  std::vector<AttributeSpec> attributes_;
};

// Comma-separated, header row required, UTF-8. Fields may be double-quoted
// (with "" as an escaped quote); unquoted fields are trimmed of surrounding
// whitespace. Quoted fields may not span lines.
struct RawDataset {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  static RawDataset from_csv(std::istream& in);
  static RawDataset from_csv_file(const std::string& path);

  std::optional<std::size_t> column_index(const std::string& name) const;
};

// The predicate a Boolean variable stands for.
struct FeatureDef {
  enum class Pred { kThreshold, kInterval, kCategory };

  std::string attribute;
  Pred pred = Pred::kCategory;
  double threshold = 0.0;  // kThreshold: value >= threshold
  double lo = 0.0;         // kInterval: lo <= value < hi; +-infinity opens an end
  double hi = 0.0;
  std::string category;  // kCategory: value == category
  bool is_protected = false;

  std::string name() const;
  bool matches(double value) const;
  bool matches(const std::string& value) const;
};

// A protected attribute and its Boolean variables: one variable per category
// (one-hot), or a single variable whose two truth values name the categories
// (hand-built binary maps; `categories[1]` is the variable's TRUE meaning).
struct ProtectedAttribute {
  std::string name;
  std::vector<std::string> categories;
  std::vector<Var> vars;
  bool binary = false;

  bool single_var() const { return binary; }
};

// Bijection between Boolean variable ids (1-based, dense) and predicates.
class FeatureMap {
 public:
  Var add_feature(FeatureDef def);
  Var add_protected_category(const std::string& attribute, const std::string& category);
  Var add_protected_binary(const std::string& attribute, const std::string& false_category,
                           const std::string& true_category);

  Var num_vars() const { return static_cast<Var>(defs_.size()); }
  const FeatureDef& def(Var v) const;
  const std::vector<FeatureDef>& defs() const { return defs_; }
  const std::vector<ProtectedAttribute>& protected_attributes() const { return protected_; }

  std::optional<Var> find(const std::string& feature_name) const;
  std::vector<Var> non_protected_vars() const;

  // Threshold variables grouped per numeric attribute, thresholds descending,
  // for nested-threshold implication clauses. Only attributes with at least
  // two thresholds appear; attribute name order.
  std::vector<std::vector<Var>> threshold_chains() const;

 private:
  std::vector<FeatureDef> defs_;  // index var - 1
  std::vector<ProtectedAttribute> protected_;
  std::map<std::string, Var> by_name_;
};

// Bit matrix over FeatureMap variables plus the label bit per row.
struct BooleanDataset {
  Var num_vars = 0;
  std::vector<std::vector<bool>> rows;  // rows[i][v - 1]
  std::vector<bool> labels;

  std::size_t size() const { return rows.size(); }
};

// Full assignment to all protected Boolean variables, e.g. one-hot
// "race=Asian" sets the Asian variable and clears the other race variables.
struct CompoundGroup {
  std::string name;  // "age=geq40,sex=male" (attribute name order)
  Assignment values;
};

// Estimated probabilities per non-protected variable, with the conditioning
// context recorded for report provenance.
struct ProbabilityTable {
  ProbMap probs;
  std::string context;
};

// What to condition on: nothing, a protected group, a label class, or both.
struct Context {
  std::optional<CompoundGroup> group;
  std::optional<bool> label;

  std::string describe() const;
};

// Tree/CNF-supplied threshold predicates per numeric attribute name; these
// take precedence over interval binning for the attributes they cover.
using ThresholdMap = std::map<std::string, std::vector<double>>;

// Builds the variable layout in schema order: numeric attributes get one
// threshold variable per model-supplied threshold (ascending), otherwise
// interval one-hots (explicit edges, else equal-width over the data range);
// categorical attributes get one variable per category. `data` may be null
// only if no attribute needs a data-derived range.
FeatureMap build_feature_map(const AttributeSchema& schema, const ThresholdMap& thresholds,
                             std::optional<int> bins_override, const RawDataset* data);

// Applies the map's predicates to every row; rejects missing values,
// non-numeric text in numeric columns, unknown categories, and non-binary
// labels.
BooleanDataset booleanize(const RawDataset& data, const AttributeSchema& schema,
                          const FeatureMap& map);

std::pair<BooleanDataset, FeatureMap> discretize(const RawDataset& data,
                                                 const AttributeSchema& schema,
                                                 const ThresholdMap& thresholds = {},
                                                 std::optional<int> bins_override = {});

// p_i = (rows in context with X_i = 1) / (rows in context) per non-protected
// variable; plain relative frequency, no smoothing. Throws EmptyGroupError
// when the context selects no rows (the caller decides skip vs abort).
ProbabilityTable estimate_probs(const BooleanDataset& data, const FeatureMap& map,
                                const Context& context);

// Cartesian product of categories across protected attributes, attribute name
// then category name lexicographic.
std::vector<CompoundGroup> enumerate_groups(const FeatureMap& map);

// One unit clause per protected Boolean variable: positive where the group
// sets it, negative elsewhere.
std::vector<Clause> group_to_unit_clauses(const CompoundGroup& group);

// Reproducibility dump of an estimated table, stable key and entry order.
nlohmann::ordered_json probability_table_to_json(const ProbabilityTable& table,
                                                 const FeatureMap& map);

}  // namespace fairssat

#endif
