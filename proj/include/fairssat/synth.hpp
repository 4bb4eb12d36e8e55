#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"

namespace fairssat {

// Synthetic health-insurance scenario: two age groups of equal mass whose
// fitness and income are normally distributed with group-dependent
// parameters, labeled by a fixed decision tree over fitness and income. The
// group-conditional probabilities of the tree's threshold predicates are
// calibrated to round numbers, so the exact per-group PPVs (and the fairness
// metrics) are known in closed form.
struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t rows = 10000;
};

struct SynthBundle {
  std::string csv;                // header: fitness,income,age,insured
  nlohmann::ordered_json schema;  // matching attribute schema (age protected)
  nlohmann::ordered_json model;   // the labeling decision tree
};

SynthBundle generate_insurance_bundle(const SynthConfig& config);

// Closed-form values the generated data converges to.
struct InsuranceTruth {
  double ppv_over40 = 0.0;
  double ppv_under40 = 0.0;
  double disparate_impact = 0.0;
  double statistical_parity = 0.0;
};

InsuranceTruth insurance_ground_truth();

}  // namespace fairssat
