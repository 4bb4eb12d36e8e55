#include "fairssat/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "fairssat/errors.hpp"
#include "fairssat/text.hpp"

namespace fairssat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void row_fail(std::size_t row, const std::string& msg) {
  throw ValidationError("data row " + std::to_string(row) + ": " + msg);
}

double numeric_cell(const std::string& cell, const std::string& column, std::size_t row) {
  if (cell.empty()) row_fail(row, "missing value in column '" + column + "'");
  auto v = parse_double(cell);
  if (!v) {
    row_fail(row, "non-numeric value '" + cell + "' in numeric column '" + column + "'");
  }
  return *v;
}

}  // namespace

AttributeSchema::AttributeSchema(std::string label, std::vector<AttributeSpec> attributes)
    : label_(std::move(label)), attributes_(std::move(attributes)) {
  if (label_.empty()) throw ValidationError("schema has no label column name");
  std::set<std::string> names;
  bool any_protected = false;
  for (const AttributeSpec& a : attributes_) {
    if (a.name.empty()) throw ValidationError("schema attribute with an empty name");
    if (a.name == label_) {
      throw ValidationError("label column '" + label_ + "' cannot also be an attribute");
    }
    if (!names.insert(a.name).second) {
      throw ValidationError("duplicate attribute '" + a.name + "'");
    }
    if (a.is_protected) {
      any_protected = true;
      if (a.kind != AttrKind::kCategorical) {
        throw ValidationError("protected attribute '" + a.name +
                              "' must be categorical; pre-bin numeric values into "
                              "categories (e.g. age groups)");
      }
    }
    if (a.kind == AttrKind::kCategorical) {
      if (a.categories.empty()) {
        throw ValidationError("categorical attribute '" + a.name + "' lists no categories");
      }
      std::set<std::string> cats;
      for (const std::string& c : a.categories) {
        if (c.empty()) {
          throw ValidationError("attribute '" + a.name + "' has an empty category name");
        }
        if (!cats.insert(c).second) {
          throw ValidationError("attribute '" + a.name + "' repeats category '" + c + "'");
        }
      }
    } else {
      for (std::size_t i = 1; i < a.edges.size(); ++i) {
        if (!(a.edges[i - 1] < a.edges[i])) {
          throw ValidationError("attribute '" + a.name +
                                "': bin edges must be strictly increasing");
        }
      }
      if (a.bin_count && *a.bin_count < 1) {
        throw ValidationError("attribute '" + a.name + "': bin count must be >= 1");
      }
    }
  }
  if (!any_protected) throw ValidationError("schema declares no protected attribute");
}

const AttributeSpec* AttributeSchema::find(const std::string& name) const {
  for (const AttributeSpec& a : attributes_) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

AttributeSchema AttributeSchema::from_json(const nlohmann::json& j) {
  std::string label;
  std::vector<AttributeSpec> attrs;
  try {
    label = j.at("label").get<std::string>();
    for (const auto& aj : j.at("attributes")) {
      AttributeSpec s;
      s.name = aj.at("name").get<std::string>();
      const std::string kind = aj.at("kind").get<std::string>();
      s.is_protected = aj.value("protected", false);
      if (kind == "categorical") {
        s.kind = AttrKind::kCategorical;
        s.categories = aj.at("categories").get<std::vector<std::string>>();
      } else if (kind == "numeric") {
        s.kind = AttrKind::kNumeric;
        if (aj.contains("bins")) {
          const auto& bins = aj.at("bins");
          if (bins.is_number_integer()) {
            s.bin_count = bins.get<int>();
          } else if (bins.is_array()) {
            s.edges = bins.get<std::vector<double>>();
          } else {
            throw ParseError("attribute '" + s.name +
                             "': \"bins\" must be an integer count or an edge array");
          }
        }
      } else {
        throw ParseError("attribute '" + s.name + "': unknown kind '" + kind + "'");
      }
      attrs.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema JSON: ") + e.what());
  }
  return AttributeSchema(std::move(label), std::move(attrs));
}

AttributeSchema AttributeSchema::from_json_file(const std::string& path) {
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

namespace {

std::vector<std::string> parse_csv_line(const std::string& s, int lineno) {
  std::vector<std::string> fields;
  const std::size_t n = s.size();
  std::size_t i = 0;
  for (;;) {
    std::size_t j = i;
    while (j < n && (s[j] == ' ' || s[j] == '\t')) ++j;
    std::string field;
    if (j < n && s[j] == '"') {
      ++j;
      bool closed = false;
      while (j < n) {
        if (s[j] == '"') {
          if (j + 1 < n && s[j + 1] == '"') {
            field += '"';
            j += 2;
          } else {
            ++j;
            closed = true;
            break;
          }
        } else {
          field += s[j];
          ++j;
        }
      }
      if (!closed) {
        throw ParseError("line " + std::to_string(lineno) + ": unterminated quoted field");
      }
      while (j < n && (s[j] == ' ' || s[j] == '\t')) ++j;
      if (j < n && s[j] != ',') {
        throw ParseError("line " + std::to_string(lineno) +
                         ": unexpected text after a closing quote");
      }
    } else {
      std::size_t end = s.find(',', j);
      if (end == std::string::npos) end = n;
      std::size_t last = end;
      while (last > j && (s[last - 1] == ' ' || s[last - 1] == '\t')) --last;
      field = s.substr(j, last - j);
      j = end;
    }
    fields.push_back(std::move(field));
    if (j >= n) break;
    i = j + 1;  // past the comma
  }
  return fields;
}

}  // namespace

RawDataset RawDataset::from_csv(std::istream& in) {
  RawDataset d;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) {
      line.erase(0, 3);  // UTF-8 byte-order mark
    }
    if (line.empty()) continue;
    auto fields = parse_csv_line(line, lineno);
    if (!have_header) {
      d.columns = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != d.columns.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(d.columns.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    d.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ParseError("CSV input has no header row");
  return d;
}

RawDataset RawDataset::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return from_csv(in);
}

std::optional<std::size_t> RawDataset::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

std::string FeatureDef::name() const {
  switch (pred) {
    case Pred::kThreshold:
      return attribute + ">=" + format_double(threshold);
    case Pred::kInterval:
      if (lo == -kInf) return attribute + "<" + format_double(hi);
      if (hi == kInf) return attribute + ">=" + format_double(lo);
      return attribute + " in [" + format_double(lo) + "," + format_double(hi) + ")";
    case Pred::kCategory:
      return attribute + "=" + category;
  }
  return attribute;
}

bool FeatureDef::matches(double value) const {
  switch (pred) {
    case Pred::kThreshold:
      return value >= threshold;
    case Pred::kInterval:
      return (lo == -kInf || value >= lo) && (hi == kInf || value < hi);
    case Pred::kCategory:
      return false;
  }
  return false;
}

bool FeatureDef::matches(const std::string& value) const {
  return pred == Pred::kCategory && value == category;
}

Var FeatureMap::add_feature(FeatureDef def) {
  if (def.attribute.empty()) throw StructuralError("feature with an empty attribute name");
  if (def.is_protected) {
    throw StructuralError("protected features must be added via add_protected_category or "
                          "add_protected_binary");
  }
  const std::string name = def.name();
  const Var v = static_cast<Var>(defs_.size() + 1);
  if (!by_name_.emplace(name, v).second) {
    throw StructuralError("duplicate feature '" + name + "'");
  }
  defs_.push_back(std::move(def));
  return v;
}

Var FeatureMap::add_protected_category(const std::string& attribute,
                                       const std::string& category) {
  if (attribute.empty() || category.empty()) {
    throw StructuralError("protected category features need attribute and category names");
  }
  FeatureDef def;
  def.attribute = attribute;
  def.pred = FeatureDef::Pred::kCategory;
  def.category = category;
  def.is_protected = true;
  const std::string name = def.name();
  const Var v = static_cast<Var>(defs_.size() + 1);
  if (!by_name_.emplace(name, v).second) {
    throw StructuralError("duplicate feature '" + name + "'");
  }
  defs_.push_back(std::move(def));

  for (ProtectedAttribute& p : protected_) {
    if (p.name != attribute) continue;
    if (p.binary) {
      throw StructuralError("protected attribute '" + attribute +
                            "' is already registered as a single-variable binary");
    }
    p.categories.push_back(category);
    p.vars.push_back(v);
    return v;
  }
  protected_.push_back(ProtectedAttribute{attribute, {category}, {v}, false});
  return v;
}

Var FeatureMap::add_protected_binary(const std::string& attribute,
                                     const std::string& false_category,
                                     const std::string& true_category) {
  if (attribute.empty() || false_category.empty() || true_category.empty() ||
      false_category == true_category) {
    throw StructuralError("binary protected attribute '" + attribute +
                          "' needs two distinct category names");
  }
  for (const ProtectedAttribute& p : protected_) {
    if (p.name == attribute) {
      throw StructuralError("protected attribute '" + attribute + "' registered twice");
    }
  }
  FeatureDef def;
  def.attribute = attribute;
  def.pred = FeatureDef::Pred::kCategory;
  def.category = true_category;
  def.is_protected = true;
  const std::string name = def.name();
  const Var v = static_cast<Var>(defs_.size() + 1);
  if (!by_name_.emplace(name, v).second) {
    throw StructuralError("duplicate feature '" + name + "'");
  }
  defs_.push_back(std::move(def));
  protected_.push_back(ProtectedAttribute{attribute, {false_category, true_category}, {v}, true});
  return v;
}

const FeatureDef& FeatureMap::def(Var v) const {
  if (v == 0 || v > defs_.size()) {
    throw StructuralError("variable " + std::to_string(v) + " is not in the feature map");
  }
  return defs_[v - 1];
}

std::optional<Var> FeatureMap::find(const std::string& feature_name) const {
  auto it = by_name_.find(feature_name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::vector<Var> FeatureMap::non_protected_vars() const {
  std::vector<Var> vars;
  for (Var v = 1; v <= num_vars(); ++v) {
    if (!defs_[v - 1].is_protected) vars.push_back(v);
  }
  return vars;
}

std::vector<std::vector<Var>> FeatureMap::threshold_chains() const {
  std::map<std::string, std::vector<Var>> per_attr;
  for (Var v = 1; v <= num_vars(); ++v) {
    const FeatureDef& d = defs_[v - 1];
    if (d.pred == FeatureDef::Pred::kThreshold) per_attr[d.attribute].push_back(v);
  }
  std::vector<std::vector<Var>> chains;
  for (auto& [attr, vars] : per_attr) {
    if (vars.size() < 2) continue;
    std::sort(vars.begin(), vars.end(), [this](Var a, Var b) {
      return defs_[a - 1].threshold > defs_[b - 1].threshold;
    });
    chains.push_back(std::move(vars));
  }
  return chains;
}

FeatureMap build_feature_map(const AttributeSchema& schema, const ThresholdMap& thresholds,
                             std::optional<int> bins_override, const RawDataset* data) {
  FeatureMap map;
  for (const AttributeSpec& a : schema.attributes()) {
    if (a.kind == AttrKind::kCategorical) {
      for (const std::string& cat : a.categories) {
        if (a.is_protected) {
          map.add_protected_category(a.name, cat);
        } else {
          FeatureDef def;
          def.attribute = a.name;
          def.pred = FeatureDef::Pred::kCategory;
          def.category = cat;
          map.add_feature(std::move(def));
        }
      }
      continue;
    }

    // Numeric: model thresholds win, then explicit edges, then equal width.
    if (auto it = thresholds.find(a.name); it != thresholds.end() && !it->second.empty()) {
      std::vector<double> ts = it->second;
      std::sort(ts.begin(), ts.end());
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
      for (double t : ts) {
        FeatureDef def;
        def.attribute = a.name;
        def.pred = FeatureDef::Pred::kThreshold;
        def.threshold = t;
        map.add_feature(std::move(def));
      }
      continue;
    }

    std::vector<double> interior = a.edges;
    if (interior.empty()) {
      const int bins = a.bin_count.value_or(bins_override.value_or(4));
      if (bins < 1) {
        throw ValidationError("attribute '" + a.name + "': bin count must be >= 1");
      }
      if (data == nullptr) {
        throw ValidationError("attribute '" + a.name +
                              "': equal-width binning needs data; supply explicit bin "
                              "edges in the schema or model thresholds");
      }
      if (data->rows.empty()) throw ValidationError("dataset has no rows");
      auto col = data->column_index(a.name);
      if (!col) {
        throw ValidationError("column '" + a.name +
                              "' required by the schema is missing from the CSV");
      }
      double lo = kInf, hi = -kInf;
      for (std::size_t r = 0; r < data->rows.size(); ++r) {
        const double v = numeric_cell(data->rows[r][*col], a.name, r + 1);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      for (int i = 1; i < bins; ++i) {
        interior.push_back(lo + (hi - lo) * i / bins);
      }
    }
    for (std::size_t j = 0; j <= interior.size(); ++j) {
      FeatureDef def;
      def.attribute = a.name;
      def.pred = FeatureDef::Pred::kInterval;
      def.lo = j == 0 ? -kInf : interior[j - 1];
      def.hi = j == interior.size() ? kInf : interior[j];
      map.add_feature(std::move(def));
    }
  }
  return map;
}

BooleanDataset booleanize(const RawDataset& data, const AttributeSchema& schema,
                          const FeatureMap& map) {
  if (data.rows.empty()) throw ValidationError("dataset has no rows");

  auto label_col = data.column_index(schema.label());
  if (!label_col) {
    throw ValidationError("label column '" + schema.label() + "' is missing from the CSV");
  }

  // Per attribute used by the map: its schema entry, CSV column, variables.
  struct AttrPlan {
    const AttributeSpec* spec;
    std::size_t column;
    std::vector<Var> vars;
  };
  std::vector<AttrPlan> plans;
  std::map<std::string, std::size_t> plan_of;
  for (Var v = 1; v <= map.num_vars(); ++v) {
    const FeatureDef& d = map.def(v);
    auto it = plan_of.find(d.attribute);
    if (it == plan_of.end()) {
      const AttributeSpec* spec = schema.find(d.attribute);
      if (spec == nullptr) {
        throw StructuralError("feature map attribute '" + d.attribute +
                              "' is not in the schema");
      }
      auto col = data.column_index(d.attribute);
      if (!col) {
        throw ValidationError("column '" + d.attribute +
                              "' required by the schema is missing from the CSV");
      }
      it = plan_of.emplace(d.attribute, plans.size()).first;
      plans.push_back(AttrPlan{spec, *col, {}});
    }
    plans[it->second].vars.push_back(v);
  }

  BooleanDataset out;
  out.num_vars = map.num_vars();
  out.rows.reserve(data.rows.size());
  out.labels.reserve(data.rows.size());
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const auto& row = data.rows[r];
    std::vector<bool> bits(out.num_vars, false);
    for (const AttrPlan& plan : plans) {
      const std::string& cell = row[plan.column];
      if (cell.empty()) {
        row_fail(r + 1, "missing value in column '" + plan.spec->name + "'");
      }
      if (plan.spec->kind == AttrKind::kNumeric) {
        const double value = numeric_cell(cell, plan.spec->name, r + 1);
        for (Var v : plan.vars) bits[v - 1] = map.def(v).matches(value);
      } else {
        if (std::find(plan.spec->categories.begin(), plan.spec->categories.end(), cell) ==
            plan.spec->categories.end()) {
          row_fail(r + 1, "unknown category '" + cell + "' in column '" + plan.spec->name + "'");
        }
        for (Var v : plan.vars) bits[v - 1] = map.def(v).matches(cell);
      }
    }
    const std::string& label_cell = row[*label_col];
    bool label = false;
    if (label_cell == "1" || label_cell == "true") {
      label = true;
    } else if (label_cell == "0" || label_cell == "false") {
      label = false;
    } else {
      row_fail(r + 1, "label must be one of 0/1/true/false, got '" + label_cell + "'");
    }
    out.rows.push_back(std::move(bits));
    out.labels.push_back(label);
  }
  return out;
}

std::pair<BooleanDataset, FeatureMap> discretize(const RawDataset& data,
                                                 const AttributeSchema& schema,
                                                 const ThresholdMap& thresholds,
                                                 std::optional<int> bins_override) {
  FeatureMap map = build_feature_map(schema, thresholds, bins_override, &data);
  BooleanDataset rows = booleanize(data, schema, map);
  return {std::move(rows), std::move(map)};
}

std::string Context::describe() const {
  std::string s;
  if (group) s = "group " + group->name;
  if (label) {
    if (!s.empty()) s += ", ";
    s += "label=";
    s += *label ? '1' : '0';
  }
  return s.empty() ? "none" : s;
}

ProbabilityTable estimate_probs(const BooleanDataset& data, const FeatureMap& map,
                                const Context& context) {
  if (data.num_vars != map.num_vars()) {
    throw StructuralError("dataset width " + std::to_string(data.num_vars) +
                          " does not match the feature map (" +
                          std::to_string(map.num_vars()) + " variables)");
  }
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (context.label && data.labels[i] != *context.label) continue;
    bool in_group = true;
    if (context.group) {
      for (const auto& [v, b] : context.group->values) {
        if (data.rows[i][v - 1] != b) {
          in_group = false;
          break;
        }
      }
    }
    if (in_group) selected.push_back(i);
  }
  if (selected.empty()) throw EmptyGroupError(context.describe());

  ProbabilityTable table;
  table.context = context.describe();
  const double total = static_cast<double>(selected.size());
  for (Var v : map.non_protected_vars()) {
    std::size_t count = 0;
    for (std::size_t i : selected) {
      if (data.rows[i][v - 1]) ++count;
    }
    table.probs[v] = static_cast<double>(count) / total;
  }
  return table;
}

std::vector<CompoundGroup> enumerate_groups(const FeatureMap& map) {
  std::vector<ProtectedAttribute> attrs = map.protected_attributes();
  if (attrs.empty()) {
    throw StructuralError("the feature map declares no protected attributes");
  }
  std::sort(attrs.begin(), attrs.end(),
            [](const ProtectedAttribute& a, const ProtectedAttribute& b) {
              return a.name < b.name;
            });
  std::vector<std::vector<std::string>> categories;
  categories.reserve(attrs.size());
  for (const ProtectedAttribute& a : attrs) {
    std::vector<std::string> cats = a.categories;
    std::sort(cats.begin(), cats.end());
    categories.push_back(std::move(cats));
  }

  std::vector<CompoundGroup> groups;
  std::vector<std::size_t> idx(attrs.size(), 0);
  for (;;) {
    CompoundGroup g;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      const ProtectedAttribute& a = attrs[i];
      const std::string& chosen = categories[i][idx[i]];
      if (!g.name.empty()) g.name += ',';
      g.name += a.name + "=" + chosen;
      if (a.single_var()) {
        g.values.emplace_back(a.vars[0], chosen == a.categories[1]);
      } else {
        for (std::size_t c = 0; c < a.vars.size(); ++c) {
          g.values.emplace_back(a.vars[c], a.categories[c] == chosen);
        }
      }
    }
    groups.push_back(std::move(g));

    std::size_t k = attrs.size();
    while (k > 0 && ++idx[k - 1] == categories[k - 1].size()) {
      idx[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return groups;
}

std::vector<Clause> group_to_unit_clauses(const CompoundGroup& group) {
  std::vector<Clause> clauses;
  clauses.reserve(group.values.size());
  for (const auto& [v, b] : group.values) {
    clauses.push_back(Clause({Lit(v, !b)}));
  }
  return clauses;
}

nlohmann::ordered_json probability_table_to_json(const ProbabilityTable& table,
                                                 const FeatureMap& map) {
  nlohmann::ordered_json j;
  j["context"] = table.context;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& [v, p] : table.probs) {
    nlohmann::ordered_json e;
    e["var"] = v;
    e["feature"] = map.def(v).name();
    e["p"] = p;
    entries.push_back(std::move(e));
  }
  j["probabilities"] = std::move(entries);
  return j;
}

}  // namespace fairssat
