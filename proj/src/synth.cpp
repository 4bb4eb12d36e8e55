#include "fairssat/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

namespace fairssat {

namespace {

// Standard normal quantiles for the calibrated exceedance probabilities.
constexpr double kZ99 = 2.3263478740408408;  // Phi(z) = 0.99
constexpr double kZ88 = 1.1749867920660904;  // Phi(z) = 0.88
constexpr double kZ82 = 0.9153650878428140;  // Phi(z) = 0.82

constexpr double kFitnessSplit = 0.61;
constexpr double kIncomeLow = 0.29;
constexpr double kIncomeHigh = 0.69;

struct Normal {
  double mu;
  double sigma;
};

// Group-conditional distributions, calibrated so that
//   over 40:  P(fitness >= 0.61) = 0.01, P(income >= 0.29) = 0.99,
//             P(income >= 0.69) = 0.18
//   under 40: P(fitness >= 0.61) = 0.82, P(income >= 0.29) = 0.88,
//             P(income >= 0.69) = 0.01
Normal fitness_dist(bool over40) {
  return over40 ? Normal{kFitnessSplit - kZ99 * 0.1, 0.1}
                : Normal{kFitnessSplit + kZ82 * 0.1, 0.1};
}

Normal income_dist(bool over40) {
  const double span = kIncomeHigh - kIncomeLow;
  if (over40) {
    const double sigma = span / (kZ82 + kZ99);
    return Normal{kIncomeLow + kZ99 * sigma, sigma};
  }
  const double sigma = span / (kZ88 + kZ99);
  return Normal{kIncomeLow + kZ88 * sigma, sigma};
}

// Uniform in (0, 1] from the engine's raw 64-bit output. Hand-rolled (and
// paired with Box-Muller below) because std::*_distribution output is
// implementation-defined, which would break cross-platform reproducibility.
double next_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

double next_normal(std::mt19937_64& rng, const Normal& dist) {
  const double u1 = next_uniform(rng);
  const double u2 = next_uniform(rng);
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  return dist.mu + dist.sigma * z;
}

bool tree_label(double fitness, double income) {
  if (fitness >= kFitnessSplit) return income >= kIncomeLow;
  return income >= kIncomeHigh;
}

std::string format_fixed(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

}  // namespace

SynthBundle generate_insurance_bundle(const SynthConfig& config) {
  SynthBundle bundle;

  std::mt19937_64 rng(config.seed);
  std::string csv = "fitness,income,age,insured\n";
  for (std::size_t i = 0; i < config.rows; ++i) {
    const double age = 20.0 + 40.0 * next_uniform(rng);
    const bool over40 = age >= 40.0;
    const double fitness = next_normal(rng, fitness_dist(over40));
    const double income = next_normal(rng, income_dist(over40));
    csv += format_fixed(fitness);
    csv += ',';
    csv += format_fixed(income);
    csv += ',';
    csv += over40 ? "geq40" : "lt40";
    csv += ',';
    csv += tree_label(fitness, income) ? '1' : '0';
    csv += '\n';
  }
  bundle.csv = std::move(csv);

  bundle.schema = nlohmann::ordered_json{
      {"label", "insured"},
      {"attributes",
       {nlohmann::ordered_json{{"name", "fitness"}, {"kind", "numeric"}},
        nlohmann::ordered_json{{"name", "income"}, {"kind", "numeric"}},
        nlohmann::ordered_json{{"name", "age"},
                               {"kind", "categorical"},
                               {"protected", true},
                               {"categories", {"geq40", "lt40"}}}}}};

  bundle.model = nlohmann::ordered_json{
      {"type", "tree"},
      {"root",
       nlohmann::ordered_json{
           {"feature", "fitness"},
           {"threshold", kFitnessSplit},
           {"yes", nlohmann::ordered_json{{"feature", "income"},
                                          {"threshold", kIncomeLow},
                                          {"yes", nlohmann::ordered_json{{"leaf", 1}}},
                                          {"no", nlohmann::ordered_json{{"leaf", 0}}}}},
           {"no", nlohmann::ordered_json{{"feature", "income"},
                                         {"threshold", kIncomeHigh},
                                         {"yes", nlohmann::ordered_json{{"leaf", 1}}},
                                         {"no", nlohmann::ordered_json{{"leaf", 0}}}}}}}};

  return bundle;
}

InsuranceTruth insurance_ground_truth() {
  InsuranceTruth t;
  t.ppv_over40 = 0.01 * 0.99 + 0.99 * 0.18;   // 0.1881
  t.ppv_under40 = 0.82 * 0.88 + 0.18 * 0.01;  // 0.7234
  t.disparate_impact = t.ppv_over40 / t.ppv_under40;
  t.statistical_parity = t.ppv_under40 - t.ppv_over40;
  return t;
}

}  // namespace fairssat
