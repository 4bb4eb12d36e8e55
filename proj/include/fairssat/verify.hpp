#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairssat/dataset.hpp"
#include "fairssat/encode.hpp"
#include "fairssat/model.hpp"
#include "fairssat/ssat.hpp"

namespace fairssat {

// PPV of the classifier for one protected group (or, in learn mode, for the
// group picked by the solver's witness).
struct PpvRecord {
  std::string group;
  double ppv = 0.0;
  // Human-readable description of the conditioning the probabilities were
  // estimated under ("group age=geq40", "none", ...).
  std::string conditioning;
  // Assignment to the protected variables realizing this group.
  Assignment witness;
};

struct EoResult {
  double tpr_gap = 0.0;
  double fpr_gap = 0.0;
  double eo = 0.0;
  std::size_t solves = 0;
  std::vector<std::string> warnings;
};

struct FairnessReport {
  std::string mode;  // "enum" or "learn"
  // Per-group PPVs in group enumeration order (enum mode only).
  std::vector<PpvRecord> groups;
  PpvRecord favored;
  PpvRecord unfavored;
  double max_ppv = 0.0;
  double min_ppv = 0.0;
  std::optional<double> disparate_impact;
  std::optional<double> statistical_parity;
  std::optional<EoResult> equalized_odds;
  std::vector<std::string> warnings;
  std::size_t solve_count = 0;
  // Wall-clock time of the analysis. Deliberately left out of the JSON
  // report so that reports are byte-identical across runs.
  double wall_ms = 0.0;
};

struct VerifyOptions {
  EncodeOptions encode;
  // Worker threads for the per-group solves. Results are assembled in group
  // order, so the report does not depend on this value.
  int jobs = 1;
  bool metric_di = true;
  bool metric_sp = true;
  bool metric_eo = true;
  // Use whole-population feature probabilities for every group instead of
  // group-conditional ones. With these probabilities the enum extremes match
  // the learn extremes, which is what `--mode both` cross-checks.
  bool unconditioned_probs = false;
};

// Enumeration pipeline: one stochastic-SAT solve per protected group, with
// feature probabilities estimated conditionally on that group. Groups with no
// data rows are skipped with a warning; if every group is empty the analysis
// aborts.
FairnessReport justicia_enum(const ClassifierModel& classifier,
                             const BooleanDataset& data, const FeatureMap& map,
                             const VerifyOptions& options = {});

// Optimization pipeline: two solves total. The favored group maximizes
//   max_protected Pr[classifier = 1]
// directly; the unfavored group minimizes it through the complement encoding
// (min Pr[phi] = 1 - max Pr[not phi]). Feature probabilities are
// whole-population estimates.
FairnessReport justicia_learn(const ClassifierModel& classifier,
                              const BooleanDataset& data,
                              const FeatureMap& map,
                              const VerifyOptions& options = {});

// Ratio of the least to the most favored group's PPV, in [0, 1] (1 = parity).
// By convention 0/0 yields 1.0; callers add a warning when that fires.
double disparate_impact(double ppv_min, double ppv_max);

// Largest PPV spread across groups, in [0, 1] (0 = parity).
double statistical_parity(double ppv_min, double ppv_max);

// Runs the selected pipeline twice, conditioning the data on true labels
// (label=1 rows give the TPR gap, label=0 rows the FPR gap); eo is the larger
// gap. `mode` is "enum" or "learn". Throws if either label class is absent.
EoResult equalized_odds(const ClassifierModel& classifier,
                        const BooleanDataset& data, const FeatureMap& map,
                        const std::string& mode,
                        const VerifyOptions& options = {});

struct SampleSizeQuery {
  long long n = 0;        // count of protected Boolean variables
  long long m = 2;        // count of non-protected Boolean variables (>= 2)
  double epsilon0 = 0.0;  // multiplicative error bound, > 1
  double delta = 0.0;     // failure probability, in (0, 1]
};

// (n + ln(1/delta)) * ln(m) / ln(epsilon0), before rounding up.
double sample_size_bound(const SampleSizeQuery& query);

// Rows needed so that all estimated feature probabilities are within a factor
// epsilon0 of the truth with probability at least 1 - delta.
long long required_sample_size(const SampleSizeQuery& query);

// Formula builders, shared by both pipelines and reused in tests.
//
// Enumeration-shape formula: randomized non-protected variables (with the
// given probabilities), then existential protected variables that the group's
// unit clauses pin down, then existential encoder auxiliaries.
SsatFormula build_enum_formula(const CnfFormula& classifier_cnf,
                               std::span<const Var> aux, const FeatureMap& map,
                               const ProbMap& probs,
                               const CompoundGroup& group);

// Optimization-shape formula: existential protected variables first (the
// solver picks the group), then randomized non-protected variables, then
// existential encoder auxiliaries. One-hot protected attributes get
// exactly-one constraints so every witness names a real group.
SsatFormula build_learn_formula(const CnfFormula& classifier_cnf,
                                std::span<const Var> aux,
                                const FeatureMap& map, const ProbMap& probs);

nlohmann::ordered_json report_to_json(const FairnessReport& report);

}  // namespace fairssat
