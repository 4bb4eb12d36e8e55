#include "fairssat/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fairssat/errors.hpp"

namespace fairssat {

namespace {

std::vector<Var> protected_vars(const FeatureMap& map) {
  std::vector<Var> vars;
  for (Var v = 1; v <= map.num_vars(); ++v) {
    if (map.def(v).is_protected) vars.push_back(v);
  }
  return vars;
}

double prob_for(const ProbMap& probs, const FeatureMap& map, Var v) {
  auto it = probs.find(v);
  if (it == probs.end()) {
    throw ValidationError("no probability estimate for variable " + std::to_string(v) + " (" +
                          map.def(v).name() + ")");
  }
  return it->second;
}

// Runs body(0..count-1) on up to `jobs` threads. `body` must not throw; the
// call sites trap their own exceptions per index.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers =
      jobs < 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

// Protected-variable assignment read back from a solver witness, rendered the
// same way enumerated groups are named. Invalid when the witness does not
// select exactly one category per one-hot attribute (possible only when every
// group's probability is zero and the maximizing tie broke toward all-false).
struct WitnessGroup {
  std::string name;
  Assignment values;
  bool valid = false;
};

WitnessGroup interpret_protected_witness(const FeatureMap& map, const SolveResult& result) {
  std::vector<const ProtectedAttribute*> attrs;
  for (const ProtectedAttribute& a : map.protected_attributes()) attrs.push_back(&a);
  std::sort(attrs.begin(), attrs.end(),
            [](const ProtectedAttribute* a, const ProtectedAttribute* b) { return a->name < b->name; });

  WitnessGroup out;
  out.valid = true;
  for (const ProtectedAttribute* attr : attrs) {
    std::size_t chosen = attr->categories.size();
    if (attr->single_var()) {
      const std::optional<bool> b = result.witness_value(attr->vars[0]);
      if (!b) {
        out.valid = false;
        break;
      }
      chosen = *b ? 1 : 0;
      out.values.emplace_back(attr->vars[0], *b);
    } else {
      std::size_t set_count = 0;
      for (std::size_t i = 0; i < attr->vars.size(); ++i) {
        const std::optional<bool> b = result.witness_value(attr->vars[i]);
        if (!b) {
          out.valid = false;
          break;
        }
        if (*b) {
          ++set_count;
          chosen = i;
        }
        out.values.emplace_back(attr->vars[i], *b);
      }
      if (!out.valid || set_count != 1) {
        out.valid = false;
        break;
      }
    }
    if (!out.name.empty()) out.name += ',';
    out.name += attr->name + "=" + attr->categories[chosen];
  }
  if (!out.valid) {
    out.name.clear();
    out.values.clear();
  }
  return out;
}

WitnessGroup witness_from_group(const CompoundGroup& group) {
  return WitnessGroup{group.name, group.values, true};
}

void append_exactly_one_per_attribute(CnfFormula& matrix, const FeatureMap& map) {
  for (const ProtectedAttribute& attr : map.protected_attributes()) {
    if (attr.single_var()) continue;  // a single variable always names a category
    std::vector<Lit> at_least_one;
    at_least_one.reserve(attr.vars.size());
    for (Var v : attr.vars) at_least_one.emplace_back(v, false);
    matrix.add_clause(Clause(at_least_one));
    for (std::size_t i = 0; i < attr.vars.size(); ++i) {
      for (std::size_t j = i + 1; j < attr.vars.size(); ++j) {
        matrix.add_clause(Clause({Lit(attr.vars[i], true), Lit(attr.vars[j], true)}));
      }
    }
  }
}

struct LearnSolve {
  SsatFormula formula;
  SolveResult result;
};

LearnSolve solve_learn_side(const CnfFormula& side, std::span<const Var> aux,
                            const FeatureMap& map, const ProbMap& probs) {
  SsatFormula formula = build_learn_formula(side, aux, map, probs);
  SolveResult result = evaluate(formula);
  return LearnSolve{std::move(formula), std::move(result)};
}

void attach_metrics(FairnessReport& report, const ClassifierModel& classifier,
                    const BooleanDataset& data, const FeatureMap& map,
                    const VerifyOptions& options) {
  if (options.metric_di) {
    report.disparate_impact = disparate_impact(report.min_ppv, report.max_ppv);
    if (report.max_ppv == 0.0) {
      report.warnings.push_back("all group PPVs are zero; disparate impact defaults to 1.0");
    }
  }
  if (options.metric_sp) {
    report.statistical_parity = statistical_parity(report.min_ppv, report.max_ppv);
  }
  if (options.metric_eo) {
    EoResult eo = equalized_odds(classifier, data, map, report.mode, options);
    report.solve_count += eo.solves;
    for (const std::string& w : eo.warnings) report.warnings.push_back(w);
    report.equalized_odds = std::move(eo);
  }
}

// Max and min PPV across groups for one conditioning label (or none), shared
// by the PPV table and the equalized-odds gaps.
struct GroupSweep {
  std::vector<PpvRecord> records;  // non-skipped, group enumeration order
  std::vector<std::string> warnings;
  std::size_t solves = 0;
};

GroupSweep sweep_groups(const ClassifierEncoding& enc, const BooleanDataset& data,
                        const FeatureMap& map, const VerifyOptions& options,
                        std::optional<bool> label) {
  const std::vector<CompoundGroup> groups = enumerate_groups(map);
  std::optional<ProbabilityTable> shared;
  if (options.unconditioned_probs) {
    shared = estimate_probs(data, map, Context{std::nullopt, label});
  }

  struct Slot {
    bool ok = false;
    std::string warning;
    std::string error;
    PpvRecord rec;
  };
  std::vector<Slot> slots(groups.size());
  parallel_for(groups.size(), options.jobs, [&](std::size_t i) {
    Slot& slot = slots[i];
    try {
      const ProbabilityTable table =
          shared ? *shared : estimate_probs(data, map, Context{groups[i], label});
      const SsatFormula formula =
          build_enum_formula(enc.positive, enc.positive_aux, map, table.probs, groups[i]);
      slot.rec = PpvRecord{groups[i].name, evaluate(formula).probability, table.context,
                           groups[i].values};
      slot.ok = true;
    } catch (const EmptyGroupError&) {
      const Context ctx{groups[i], label};
      slot.warning = "no data rows for " + ctx.describe() + "; group skipped";
    } catch (const std::exception& e) {
      slot.error = "group " + groups[i].name + ": " + e.what();
    }
  });

  GroupSweep sweep;
  for (const Slot& slot : slots) {
    if (!slot.error.empty()) throw Error(slot.error);
  }
  for (const Slot& slot : slots) {
    if (slot.ok) {
      sweep.records.push_back(slot.rec);
      ++sweep.solves;
    } else {
      sweep.warnings.push_back(slot.warning);
    }
  }
  if (sweep.records.empty()) {
    const Context ctx{std::nullopt, label};
    throw ValidationError("every protected group is empty under conditioning '" + ctx.describe() +
                          "'; nothing to analyze");
  }
  return sweep;
}

void set_extremes(FairnessReport& report) {
  std::size_t max_i = 0;
  std::size_t min_i = 0;
  for (std::size_t i = 1; i < report.groups.size(); ++i) {
    if (report.groups[i].ppv > report.groups[max_i].ppv) max_i = i;
    if (report.groups[i].ppv < report.groups[min_i].ppv) min_i = i;
  }
  report.favored = report.groups[max_i];
  report.unfavored = report.groups[min_i];
  report.max_ppv = report.favored.ppv;
  report.min_ppv = report.unfavored.ppv;
}

}  // namespace

SsatFormula build_enum_formula(const CnfFormula& classifier_cnf, std::span<const Var> aux,
                               const FeatureMap& map, const ProbMap& probs,
                               const CompoundGroup& group) {
  CnfFormula matrix = classifier_cnf;
  if (matrix.num_vars() < map.num_vars()) matrix.set_num_vars(map.num_vars());
  for (const Clause& c : group_to_unit_clauses(group)) matrix.add_clause(c);

  std::vector<PrefixEntry> prefix;
  for (Var v : map.non_protected_vars()) {
    prefix.emplace_back(v, Quantifier::random(prob_for(probs, map, v)));
  }
  for (Var v : protected_vars(map)) prefix.emplace_back(v, Quantifier::exists());
  for (Var v : aux) prefix.emplace_back(v, Quantifier::exists());
  return SsatFormula(std::move(prefix), std::move(matrix));
}

SsatFormula build_learn_formula(const CnfFormula& classifier_cnf, std::span<const Var> aux,
                                const FeatureMap& map, const ProbMap& probs) {
  CnfFormula matrix = classifier_cnf;
  if (matrix.num_vars() < map.num_vars()) matrix.set_num_vars(map.num_vars());
  append_exactly_one_per_attribute(matrix, map);

  std::vector<PrefixEntry> prefix;
  for (Var v : protected_vars(map)) prefix.emplace_back(v, Quantifier::exists());
  for (Var v : map.non_protected_vars()) {
    prefix.emplace_back(v, Quantifier::random(prob_for(probs, map, v)));
  }
  for (Var v : aux) prefix.emplace_back(v, Quantifier::exists());
  return SsatFormula(std::move(prefix), std::move(matrix));
}

FairnessReport justicia_enum(const ClassifierModel& classifier, const BooleanDataset& data,
                             const FeatureMap& map, const VerifyOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  FairnessReport report;
  report.mode = "enum";

  const ClassifierEncoding enc = encode_classifier(classifier, map, options.encode);
  GroupSweep sweep = sweep_groups(enc, data, map, options, std::nullopt);
  report.groups = std::move(sweep.records);
  report.warnings = std::move(sweep.warnings);
  report.solve_count = sweep.solves;
  set_extremes(report);

  attach_metrics(report, classifier, data, map, options);
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

FairnessReport justicia_learn(const ClassifierModel& classifier, const BooleanDataset& data,
                              const FeatureMap& map, const VerifyOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  FairnessReport report;
  report.mode = "learn";

  const ClassifierEncoding enc = encode_classifier(classifier, map, options.encode);
  const ProbabilityTable table = estimate_probs(data, map, Context{});

  // Favored group: maximize Pr[classifier = 1] over the protected assignment.
  const LearnSolve best = solve_learn_side(enc.positive, enc.positive_aux, map, table.probs);
  WitnessGroup favored = interpret_protected_witness(map, best.result);
  if (!favored.valid) {
    // Every group has probability zero and the tie broke toward an assignment
    // that names no group; report the first group, which attains the same 0.
    favored = witness_from_group(enumerate_groups(map).front());
  }
  // Reported PPVs are re-derived from the witness by direct conditioning, so
  // substituting the witness back reproduces them bit for bit.
  const double max_ppv = evaluate(condition(best.formula, favored.values)).probability;

  // Unfavored group: minimize via the complement encoding,
  // min Pr[phi] = 1 - max Pr[not phi].
  const LearnSolve worst = solve_learn_side(enc.negative, enc.negative_aux, map, table.probs);
  WitnessGroup unfavored = interpret_protected_witness(map, worst.result);
  if (!unfavored.valid) {
    unfavored = witness_from_group(enumerate_groups(map).front());
  }
  double min_ppv = 1.0 - evaluate(condition(worst.formula, unfavored.values)).probability;
  if (min_ppv < 0.0) min_ppv = 0.0;
  if (min_ppv > max_ppv) min_ppv = max_ppv;  // guards metric ranges against rounding dust

  report.favored = PpvRecord{favored.name, max_ppv, table.context, favored.values};
  report.unfavored = PpvRecord{unfavored.name, min_ppv, table.context, unfavored.values};
  report.max_ppv = max_ppv;
  report.min_ppv = min_ppv;
  report.solve_count = 2;

  attach_metrics(report, classifier, data, map, options);
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

double disparate_impact(double ppv_min, double ppv_max) {
  if (ppv_min > ppv_max) {
    throw ValidationError("ppv_min exceeds ppv_max");
  }
  if (ppv_min < 0.0 || ppv_max > 1.0 + 1e-9) {
    throw ValidationError("PPVs must lie in [0, 1]");
  }
  if (ppv_max == 0.0) return 1.0;  // no group is ever favored: parity by convention
  return std::min(ppv_min / ppv_max, 1.0);
}

double statistical_parity(double ppv_min, double ppv_max) {
  if (ppv_min > ppv_max) {
    throw ValidationError("ppv_min exceeds ppv_max");
  }
  if (ppv_min < 0.0 || ppv_max > 1.0 + 1e-9) {
    throw ValidationError("PPVs must lie in [0, 1]");
  }
  return std::min(ppv_max - ppv_min, 1.0);
}

EoResult equalized_odds(const ClassifierModel& classifier, const BooleanDataset& data,
                        const FeatureMap& map, const std::string& mode,
                        const VerifyOptions& options) {
  if (mode != "enum" && mode != "learn") {
    throw ValidationError("unknown analysis mode '" + mode + "' (expected enum or learn)");
  }
  bool has_positive = false;
  bool has_negative = false;
  for (bool label : data.labels) {
    (label ? has_positive : has_negative) = true;
  }
  if (!has_positive || !has_negative) {
    throw ValidationError(std::string("equalized odds needs both label classes; no rows with label=") +
                          (has_positive ? "0" : "1"));
  }

  const ClassifierEncoding enc = encode_classifier(classifier, map, options.encode);
  EoResult out;
  for (const bool label : {true, false}) {
    double max_ppv = 0.0;
    double min_ppv = 0.0;
    if (mode == "enum") {
      GroupSweep sweep = sweep_groups(enc, data, map, options, label);
      out.solves += sweep.solves;
      for (std::string& w : sweep.warnings) out.warnings.push_back(std::move(w));
      max_ppv = min_ppv = sweep.records.front().ppv;
      for (const PpvRecord& rec : sweep.records) {
        max_ppv = std::max(max_ppv, rec.ppv);
        min_ppv = std::min(min_ppv, rec.ppv);
      }
    } else {
      const ProbabilityTable table = estimate_probs(data, map, Context{std::nullopt, label});
      max_ppv = evaluate(build_learn_formula(enc.positive, enc.positive_aux, map, table.probs))
                    .probability;
      min_ppv = 1.0 -
                evaluate(build_learn_formula(enc.negative, enc.negative_aux, map, table.probs))
                    .probability;
      out.solves += 2;
      if (min_ppv < 0.0) min_ppv = 0.0;
      if (min_ppv > max_ppv) min_ppv = max_ppv;
    }
    const double gap = std::max(max_ppv - min_ppv, 0.0);
    (label ? out.tpr_gap : out.fpr_gap) = gap;
  }
  out.eo = std::max(out.tpr_gap, out.fpr_gap);
  return out;
}

double sample_size_bound(const SampleSizeQuery& query) {
  if (query.n < 0) throw ValidationError("variable count n must be nonnegative");
  if (query.m < 2) throw ValidationError("resolution m must be at least 2");
  if (!(query.epsilon0 > 1.0)) {
    throw ValidationError("epsilon0 must be greater than 1");
  }
  if (!(query.delta > 0.0) || query.delta > 1.0) {
    throw ValidationError("delta must be in (0, 1]");
  }
  return (static_cast<double>(query.n) + std::log(1.0 / query.delta)) *
         std::log(static_cast<double>(query.m)) / std::log(query.epsilon0);
}

long long required_sample_size(const SampleSizeQuery& query) {
  return static_cast<long long>(std::ceil(sample_size_bound(query)));
}

nlohmann::ordered_json report_to_json(const FairnessReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = report.mode;
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (const PpvRecord& rec : report.groups) {
    groups.push_back({{"group", rec.group}, {"ppv", rec.ppv}});
  }
  j["groups"] = std::move(groups);
  j["favored"] = {{"group", report.favored.group}, {"ppv", report.favored.ppv}};
  j["unfavored"] = {{"group", report.unfavored.group}, {"ppv", report.unfavored.ppv}};
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  if (report.disparate_impact) metrics["di"] = *report.disparate_impact;
  if (report.statistical_parity) metrics["sp"] = *report.statistical_parity;
  if (report.equalized_odds) {
    metrics["eo"] = {{"tpr_gap", report.equalized_odds->tpr_gap},
                     {"fpr_gap", report.equalized_odds->fpr_gap},
                     {"value", report.equalized_odds->eo}};
  }
  j["metrics"] = std::move(metrics);
  j["warnings"] = report.warnings;
  j["stats"] = {{"solves", report.solve_count}};
  return j;
}

}  // namespace fairssat
