#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fairssat/dataset.hpp"
#include "fairssat/encode.hpp"
#include "fairssat/errors.hpp"
#include "fairssat/model.hpp"
#include "fairssat/ssat.hpp"
#include "fairssat/verify.hpp"
#include "oracle.hpp"

using namespace fairssat;

namespace {

constexpr double kE = 2.718281828459045;

FeatureDef threshold_def(const std::string& attr, double t) {
  FeatureDef d;
  d.attribute = attr;
  d.pred = FeatureDef::Pred::kThreshold;
  d.threshold = t;
  return d;
}

// k binary protected attributes a0..a{k-1} (vars 1..k), then f feature
// variables (vars k+1..k+f).
FeatureMap binary_protected_map(int k, int f) {
  FeatureMap map;
  for (int i = 0; i < k; ++i) {
    map.add_protected_binary("a" + std::to_string(i), "n", "y");
  }
  for (int i = 0; i < f; ++i) {
    map.add_feature(threshold_def("x" + std::to_string(i), 0.5));
  }
  return map;
}

bool row_in_group(const std::vector<bool>& row, const CompoundGroup& group) {
  for (const auto& [v, b] : group.values) {
    if (row[v - 1] != b) return false;
  }
  return true;
}

// Test-side PPV: enumerate feature assignments, weight each by the product of
// per-variable frequencies among the context rows, and keep those satisfying
// the classifier CNF with the protected variables pinned to the group.
double brute_group_ppv(const CnfFormula& classifier, const FeatureMap& map,
                       const BooleanDataset& data, const CompoundGroup& group,
                       std::optional<bool> label, bool unconditioned) {
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (label && data.labels[i] != *label) continue;
    if (!unconditioned && !row_in_group(data.rows[i], group)) continue;
    selected.push_back(i);
  }
  REQUIRE(!selected.empty());
  const std::vector<Var> features = map.non_protected_vars();
  std::vector<double> freq(features.size(), 0.0);
  for (std::size_t j = 0; j < features.size(); ++j) {
    std::size_t count = 0;
    for (std::size_t i : selected) {
      if (data.rows[i][features[j] - 1]) ++count;
    }
    freq[j] = static_cast<double>(count) / static_cast<double>(selected.size());
  }

  double total = 0.0;
  std::vector<bool> bits(map.num_vars() + 1, false);
  for (const auto& [v, b] : group.values) bits[v] = b;
  for (std::size_t mask = 0; mask < (std::size_t{1} << features.size()); ++mask) {
    double weight = 1.0;
    for (std::size_t j = 0; j < features.size(); ++j) {
      const bool b = (mask >> j) & 1U;
      bits[features[j]] = b;
      weight *= b ? freq[j] : 1.0 - freq[j];
    }
    if (classifier.satisfied_by(bits)) total += weight;
  }
  return total;
}

CnfRuleModel rule_model(const CnfFormula& cnf) {
  CnfRuleModel m;
  m.positive = cnf;
  return m;
}

// Rows covering every protected group `copies` times with random features and
// the given (or random) labels.
BooleanDataset cover_groups(std::mt19937_64& rng, const FeatureMap& map, int copies,
                            std::optional<bool> fixed_label = {}) {
  BooleanDataset data;
  data.num_vars = map.num_vars();
  for (const CompoundGroup& g : enumerate_groups(map)) {
    for (int c = 0; c < copies; ++c) {
      std::vector<bool> row(map.num_vars(), false);
      for (const auto& [v, b] : g.values) row[v - 1] = b;
      for (Var v : map.non_protected_vars()) row[v - 1] = oracle::rand_bool(rng);
      data.rows.push_back(std::move(row));
      data.labels.push_back(fixed_label ? *fixed_label : oracle::rand_bool(rng));
    }
  }
  return data;
}

VerifyOptions no_eo() {
  VerifyOptions o;
  o.metric_eo = false;
  return o;
}

}  // namespace

TEST_CASE("formula builders put quantifiers in the documented order") {
  FeatureMap map;
  map.add_protected_binary("p", "n", "y");           // var 1
  const Var x = map.add_feature(threshold_def("x", 0.5));  // var 2
  const Var y = map.add_feature(threshold_def("y", 0.5));  // var 3
  CnfFormula cnf(3);
  cnf.add_clause({-1, 2});
  const ProbMap probs{{x, 0.25}, {y, 0.5}};
  const CompoundGroup group{"p=y", {{1, true}}};

  SUBCASE("enumeration shape: randomized features, then pinned protected") {
    const SsatFormula f = build_enum_formula(cnf, {}, map, probs, group);
    REQUIRE(f.prefix().size() == 3);
    CHECK(f.prefix()[0].first == x);
    CHECK(f.prefix()[0].second.is_random());
    CHECK(f.prefix()[0].second.prob() == 0.25);
    CHECK(f.prefix()[1].first == y);
    CHECK(f.prefix()[1].second.prob() == 0.5);
    CHECK(f.prefix()[2].first == Var{1});
    CHECK(f.prefix()[2].second.is_exists());
    // The group's unit clause joins the matrix.
    CHECK(f.matrix().num_clauses() == 2);
    CHECK(f.matrix().clauses()[1] == Clause({Lit(1, false)}));
  }
  SUBCASE("optimization shape: existential protected first, auxiliaries last") {
    CnfFormula with_aux = cnf;
    with_aux.set_num_vars(4);
    const std::vector<Var> aux{4};
    const SsatFormula f = build_learn_formula(with_aux, aux, map, probs);
    REQUIRE(f.prefix().size() == 4);
    CHECK(f.prefix()[0].first == Var{1});
    CHECK(f.prefix()[0].second.is_exists());
    CHECK(f.prefix()[1].first == x);
    CHECK(f.prefix()[1].second.is_random());
    CHECK(f.prefix()[2].first == y);
    CHECK(f.prefix()[3].first == Var{4});
    CHECK(f.prefix()[3].second.is_exists());
    // Binary protected attributes need no exactly-one constraints.
    CHECK(f.matrix().num_clauses() == 1);
  }
  SUBCASE("one-hot attributes gain exactly-one constraints in learn shape") {
    FeatureMap onehot;
    onehot.add_protected_category("race", "a");  // 1
    onehot.add_protected_category("race", "b");  // 2
    onehot.add_protected_category("race", "c");  // 3
    const Var z = onehot.add_feature(threshold_def("z", 0.5));  // 4
    CnfFormula body(4);
    body.add_clause({1, 4});
    const SsatFormula f = build_learn_formula(body, {}, onehot, ProbMap{{z, 0.5}});
    // 1 classifier clause + 1 at-least-one + 3 pairwise at-most-one.
    CHECK(f.matrix().num_clauses() == 5);
    const SsatFormula e =
        build_enum_formula(body, {}, onehot, ProbMap{{z, 0.5}},
                           CompoundGroup{"race=a", {{1, true}, {2, false}, {3, false}}});
    // Enumeration pins the group with units instead: 1 clause + 3 units.
    CHECK(e.matrix().num_clauses() == 4);
  }
  SUBCASE("a feature without a probability estimate is rejected") {
    const std::string message = [&] {
      try {
        build_enum_formula(cnf, {}, map, ProbMap{{x, 0.25}}, group);
      } catch (const ValidationError& e) {
        return std::string(e.what());
      }
      return std::string();
    }();
    CHECK(message.find("no probability estimate") != std::string::npos);
    CHECK(message.find("y>=0.5") != std::string::npos);
  }
}

TEST_CASE("enumeration PPVs equal direct weighted counts per group") {
  std::mt19937_64 rng(90210);
  for (int round = 0; round < 24; ++round) {
    FeatureMap map;
    if (round % 2 == 0) {
      map = binary_protected_map(3, 4);  // 8 groups
    } else {
      map.add_protected_category("race", "a");
      map.add_protected_category("race", "b");
      map.add_protected_category("race", "c");
      map.add_protected_binary("sex", "f", "m");
      for (int i = 0; i < 3; ++i) map.add_feature(threshold_def("x" + std::to_string(i), 0.5));
    }
    const int n = static_cast<int>(map.num_vars());
    const CnfFormula classifier =
        oracle::to_formula(oracle::random_cnf(rng, n, oracle::rand_int(rng, 1, 6), 3),
                           static_cast<Var>(n));
    const BooleanDataset data = cover_groups(rng, map, 3);

    const FairnessReport report = justicia_enum(rule_model(classifier), data, map, no_eo());
    const std::vector<CompoundGroup> groups = enumerate_groups(map);
    REQUIRE(report.groups.size() == groups.size());
    CHECK(report.solve_count == groups.size());

    double best = -1.0;
    double worst = 2.0;
    std::size_t best_i = 0;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const double expected = brute_group_ppv(classifier, map, data, groups[i], {}, false);
      CHECK(report.groups[i].group == groups[i].name);
      CHECK(report.groups[i].witness == groups[i].values);
      CHECK(std::fabs(report.groups[i].ppv - expected) <= 1e-12);
      if (expected > best) {
        best = expected;
        best_i = i;
      }
      if (expected < worst) {
        worst = expected;
        worst_i = i;
      }
    }
    // Extremes and metrics follow the per-group values; ties break to the
    // first group in enumeration order.
    CHECK(report.favored.group == groups[best_i].name);
    CHECK(report.unfavored.group == groups[worst_i].name);
    CHECK(std::fabs(*report.disparate_impact -
                    disparate_impact(report.min_ppv, report.max_ppv)) == 0.0);
    CHECK(std::fabs(*report.statistical_parity - (report.max_ppv - report.min_ppv)) <= 1e-15);
    CHECK_FALSE(report.equalized_odds.has_value());
  }
}

TEST_CASE("groups without data rows are skipped with a warning") {
  std::mt19937_64 rng(11);
  const FeatureMap map = binary_protected_map(3, 2);
  CnfFormula cnf(static_cast<Var>(map.num_vars()));
  cnf.add_clause({4, 5});

  BooleanDataset data = cover_groups(rng, map, 2);
  // Remove every row of the last group (a0=y,a1=y,a2=y).
  const CompoundGroup gone = enumerate_groups(map).back();
  for (std::size_t i = data.rows.size(); i-- > 0;) {
    if (row_in_group(data.rows[i], gone)) {
      data.rows.erase(data.rows.begin() + static_cast<std::ptrdiff_t>(i));
      data.labels.erase(data.labels.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }

  const FairnessReport report = justicia_enum(rule_model(cnf), data, map, no_eo());
  CHECK(report.groups.size() == 7);
  CHECK(report.solve_count == 7);
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].find("no data rows for group a0=y,a1=y,a2=y") != std::string::npos);
  CHECK(report.warnings[0].find("skipped") != std::string::npos);
  for (const PpvRecord& rec : report.groups) CHECK(rec.group != gone.name);

  BooleanDataset empty;
  empty.num_vars = map.num_vars();
  CHECK_THROWS_AS(justicia_enum(rule_model(cnf), empty, map, no_eo()), ValidationError);
}

TEST_CASE("degenerate classifiers give the boundary metric values") {
  std::mt19937_64 rng(12);
  const FeatureMap map = binary_protected_map(1, 2);
  BooleanDataset data = cover_groups(rng, map, 4, true);
  for (std::size_t i = 0; i < data.labels.size(); i += 2) data.labels[i] = false;

  SUBCASE("constant-1 classifier: full parity at PPV 1") {
    const CnfFormula always(static_cast<Var>(map.num_vars()));
    for (const std::string& mode : {std::string("enum"), std::string("learn")}) {
      const FairnessReport r = mode == "enum"
                                   ? justicia_enum(rule_model(always), data, map)
                                   : justicia_learn(rule_model(always), data, map);
      CHECK(r.max_ppv == 1.0);
      CHECK(r.min_ppv == 1.0);
      CHECK(*r.disparate_impact == 1.0);
      CHECK(*r.statistical_parity == 0.0);
      REQUIRE(r.equalized_odds.has_value());
      CHECK(r.equalized_odds->eo == 0.0);
      CHECK(r.warnings.empty());
    }
  }
  SUBCASE("constant-0 classifier: zero PPVs fall back to parity with a warning") {
    CnfFormula never(static_cast<Var>(map.num_vars()));
    never.add_clause(std::initializer_list<std::int32_t>{});
    for (const std::string& mode : {std::string("enum"), std::string("learn")}) {
      const FairnessReport r = mode == "enum"
                                   ? justicia_enum(rule_model(never), data, map)
                                   : justicia_learn(rule_model(never), data, map);
      CHECK(r.max_ppv == 0.0);
      CHECK(r.min_ppv == 0.0);
      CHECK(*r.disparate_impact == 1.0);
      CHECK(*r.statistical_parity == 0.0);
      CHECK(r.equalized_odds->eo == 0.0);
      REQUIRE(!r.warnings.empty());
      CHECK(r.warnings[0].find("all group PPVs are zero") != std::string::npos);
    }
  }
  SUBCASE("learn witnesses snap to a real group when everything is zero") {
    FeatureMap onehot;
    onehot.add_protected_category("race", "a");
    onehot.add_protected_category("race", "b");
    onehot.add_protected_category("race", "c");
    onehot.add_feature(threshold_def("z", 0.5));
    BooleanDataset d = cover_groups(rng, onehot, 2, true);
    d.labels[0] = false;
    CnfFormula never(static_cast<Var>(onehot.num_vars()));
    never.add_clause(std::initializer_list<std::int32_t>{});
    const FairnessReport r = justicia_learn(rule_model(never), d, onehot, no_eo());
    CHECK(r.max_ppv == 0.0);
    CHECK(r.min_ppv == 0.0);
    // Favored side: the all-false tie names no category, so it snaps to the
    // first enumerated group. Unfavored side: the exactly-one constraints make
    // every witness a real group; ties toward false leave the last category
    // unit-forced true.
    CHECK(r.favored.group == "race=a");
    CHECK(r.favored.witness == enumerate_groups(onehot).front().values);
    CHECK(r.unfavored.group == "race=c");
  }
}

TEST_CASE("equalized odds hand case") {
  FeatureMap map;
  map.add_protected_binary("g", "n", "y");  // var 1, y = true
  map.add_feature(threshold_def("x", 0.5));  // var 2

  // Classifier: g=y -> x, g=n -> always positive.
  CnfFormula cnf(2);
  cnf.add_clause({-1, 2});
  const ClassifierModel model = rule_model(cnf);

  BooleanDataset data;
  data.num_vars = 2;
  auto add = [&](bool g, bool x, bool label, int copies) {
    for (int i = 0; i < copies; ++i) {
      data.rows.push_back({g, x});
      data.labels.push_back(label);
    }
  };
  add(false, true, true, 3);   // TPR(n): x freq 3/4
  add(false, false, true, 1);
  add(true, true, true, 1);    // TPR(y): x freq 1/4
  add(true, false, true, 3);
  add(false, true, false, 1);  // FPR(n): x freq 1/5
  add(false, false, false, 4);
  add(true, true, false, 2);   // FPR(y): x freq 2/5
  add(true, false, false, 3);

  SUBCASE("enumeration gaps use group-and-label conditioned frequencies") {
    const EoResult eo = equalized_odds(model, data, map, "enum");
    // Group n is always positive (PPV 1); group y follows x.
    CHECK(eo.tpr_gap == doctest::Approx(1.0 - 0.25).epsilon(1e-12));
    CHECK(eo.fpr_gap == doctest::Approx(1.0 - 0.4).epsilon(1e-12));
    CHECK(eo.eo == eo.tpr_gap);
    CHECK(eo.solves == 4);
  }
  SUBCASE("optimization gaps use label-conditioned population frequencies") {
    const EoResult eo = equalized_odds(model, data, map, "learn");
    // P(x | label=1) = 1/2, P(x | label=0) = 3/10; the solver picks g freely.
    CHECK(eo.tpr_gap == doctest::Approx(1.0 - 0.5).epsilon(1e-12));
    CHECK(eo.fpr_gap == doctest::Approx(1.0 - 0.3).epsilon(1e-12));
    CHECK(eo.eo == eo.fpr_gap);
    CHECK(eo.solves == 4);
  }
  SUBCASE("both label classes are required") {
    BooleanDataset ones = data;
    std::fill(ones.labels.begin(), ones.labels.end(), true);
    const std::string message = [&] {
      try {
        equalized_odds(model, ones, map, "enum");
      } catch (const ValidationError& e) {
        return std::string(e.what());
      }
      return std::string();
    }();
    CHECK(message.find("no rows with label=0") != std::string::npos);
    CHECK_THROWS_AS(equalized_odds(model, data, map, "fast"), ValidationError);
  }
}

TEST_CASE("equalized odds agrees with direct weighted counts") {
  std::mt19937_64 rng(5150);
  for (int round = 0; round < 20; ++round) {
    const FeatureMap map = binary_protected_map(2, 3);
    const int n = static_cast<int>(map.num_vars());
    const CnfFormula classifier =
        oracle::to_formula(oracle::random_cnf(rng, n, oracle::rand_int(rng, 1, 5), 3),
                           static_cast<Var>(n));
    // Both labels in every group so no (group, label) cell is empty.
    BooleanDataset data = cover_groups(rng, map, 3, true);
    const BooleanDataset zeros = cover_groups(rng, map, 3, false);
    data.rows.insert(data.rows.end(), zeros.rows.begin(), zeros.rows.end());
    data.labels.insert(data.labels.end(), zeros.labels.begin(), zeros.labels.end());

    const EoResult eo = equalized_odds(rule_model(classifier), data, map, "enum");
    double gaps[2] = {0.0, 0.0};
    for (const bool label : {true, false}) {
      double lo = 2.0;
      double hi = -1.0;
      for (const CompoundGroup& g : enumerate_groups(map)) {
        const double p = brute_group_ppv(classifier, map, data, g, label, false);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
      gaps[label ? 0 : 1] = hi - lo;
    }
    CHECK(std::fabs(eo.tpr_gap - gaps[0]) <= 1e-12);
    CHECK(std::fabs(eo.fpr_gap - gaps[1]) <= 1e-12);
    CHECK(eo.eo == std::max(eo.tpr_gap, eo.fpr_gap));
    CHECK(eo.solves == 8);
  }
}

TEST_CASE("metric formulas and their guard rails") {
  CHECK(disparate_impact(0.1881, 0.7234) == doctest::Approx(0.1881 / 0.7234).epsilon(1e-15));
  CHECK(statistical_parity(0.1881, 0.7234) == doctest::Approx(0.5353).epsilon(1e-12));
  CHECK(disparate_impact(0.0, 0.0) == 1.0);
  CHECK(statistical_parity(0.0, 0.0) == 0.0);
  CHECK(disparate_impact(0.5, 0.5) == 1.0);
  // A whisker of floating-point dust above 1 is tolerated and clamped.
  CHECK(disparate_impact(1.0, 1.0 + 1e-10) <= 1.0);
  CHECK(statistical_parity(0.0, 1.0 + 1e-10) <= 1.0);
  CHECK_THROWS_AS(disparate_impact(0.7, 0.3), ValidationError);
  CHECK_THROWS_AS(statistical_parity(0.7, 0.3), ValidationError);
  CHECK_THROWS_AS(disparate_impact(-0.1, 0.3), ValidationError);
  CHECK_THROWS_AS(disparate_impact(0.1, 1.1), ValidationError);
}

TEST_CASE("sample size bound") {
  CHECK(required_sample_size({2, 16, kE, 1.0 / kE}) == 9);
  CHECK(sample_size_bound({2, 16, kE, 1.0 / kE}) ==
        doctest::Approx(3.0 * std::log(16.0)).epsilon(1e-15));
  CHECK(required_sample_size({0, 16, kE, 1.0}) == 0);  // nothing demanded

  // ln m doubles when m is squared; the n term is linear.
  const SampleSizeQuery q{5, 100, 1.5, 0.25};
  CHECK(sample_size_bound({5, 10000, 1.5, 0.25}) ==
        doctest::Approx(2.0 * sample_size_bound(q)).epsilon(1e-12));
  const double per_var = std::log(100.0) / std::log(1.5);
  CHECK(sample_size_bound({6, 100, 1.5, 0.25}) - sample_size_bound(q) ==
        doctest::Approx(per_var).epsilon(1e-12));

  CHECK_THROWS_AS(required_sample_size({-1, 16, kE, 0.5}), ValidationError);
  CHECK_THROWS_AS(required_sample_size({2, 1, kE, 0.5}), ValidationError);
  CHECK_THROWS_AS(required_sample_size({2, 16, 1.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(required_sample_size({2, 16, kE, 0.0}), ValidationError);
  CHECK_THROWS_AS(required_sample_size({2, 16, kE, 1.5}), ValidationError);
}

TEST_CASE("optimization extremes match enumeration under shared probabilities") {
  std::mt19937_64 rng(777);
  for (int round = 0; round < 40; ++round) {
    FeatureMap map;
    const int shape = oracle::rand_int(rng, 0, 2);
    if (shape == 0) {
      map = binary_protected_map(oracle::rand_int(rng, 1, 3), oracle::rand_int(rng, 1, 4));
    } else if (shape == 1) {
      map.add_protected_category("race", "a");
      map.add_protected_category("race", "b");
      map.add_protected_category("race", "c");
      const int features = oracle::rand_int(rng, 1, 3);
      for (int i = 0; i < features; ++i) {
        map.add_feature(threshold_def("x" + std::to_string(i), 0.5));
      }
    } else {
      map.add_protected_category("race", "a");
      map.add_protected_category("race", "b");
      map.add_protected_binary("sex", "f", "m");
      map.add_feature(threshold_def("x", 0.5));
      map.add_feature(threshold_def("y", 0.5));
    }
    const int n = static_cast<int>(map.num_vars());
    const CnfFormula classifier =
        oracle::to_formula(oracle::random_cnf(rng, n, oracle::rand_int(rng, 1, 6), 3),
                           static_cast<Var>(n));
    const ClassifierModel model = rule_model(classifier);
    const BooleanDataset data = cover_groups(rng, map, 2);

    VerifyOptions shared = no_eo();
    shared.unconditioned_probs = true;
    const FairnessReport en = justicia_enum(model, data, map, shared);
    const FairnessReport learn = justicia_learn(model, data, map, no_eo());

    CHECK(std::fabs(en.max_ppv - learn.max_ppv) <= 1e-9);
    CHECK(std::fabs(en.min_ppv - learn.min_ppv) <= 1e-9);
    CHECK(learn.solve_count == 2);

    // The witness names a real group whose enumerated PPV attains the extreme.
    auto group_ppv = [&](const std::string& name) {
      for (const PpvRecord& rec : en.groups) {
        if (rec.group == name) return rec.ppv;
      }
      FAIL("learn witness names unknown group '" << name << "'");
      return -1.0;
    };
    CHECK(std::fabs(group_ppv(learn.favored.group) - learn.max_ppv) <= 1e-9);
    CHECK(std::fabs(group_ppv(learn.unfavored.group) - learn.min_ppv) <= 1e-9);

    // Substituting the reported witnesses back reproduces the PPVs bit for
    // bit, because the reported values are themselves derived that way.
    const ClassifierEncoding enc = encode_classifier(model, map, {});
    const ProbMap probs = estimate_probs(data, map, {}).probs;
    const SsatFormula pos = build_learn_formula(enc.positive, enc.positive_aux, map, probs);
    CHECK(evaluate(condition(pos, learn.favored.witness)).probability == learn.max_ppv);
    const SsatFormula neg = build_learn_formula(enc.negative, enc.negative_aux, map, probs);
    double replayed_min = 1.0 - evaluate(condition(neg, learn.unfavored.witness)).probability;
    replayed_min = std::min(std::max(replayed_min, 0.0), learn.max_ppv);
    CHECK(replayed_min == learn.min_ppv);
    CHECK(learn.favored.ppv == learn.max_ppv);
    CHECK(learn.unfavored.ppv == learn.min_ppv);
  }
}

TEST_CASE("optimization-mode equalized odds matches shared-probability sweeps") {
  std::mt19937_64 rng(9999);
  for (int round = 0; round < 10; ++round) {
    const FeatureMap map = binary_protected_map(2, 2);
    const int n = static_cast<int>(map.num_vars());
    const CnfFormula classifier =
        oracle::to_formula(oracle::random_cnf(rng, n, oracle::rand_int(rng, 1, 5), 3),
                           static_cast<Var>(n));
    BooleanDataset data = cover_groups(rng, map, 3, true);
    const BooleanDataset zeros = cover_groups(rng, map, 3, false);
    data.rows.insert(data.rows.end(), zeros.rows.begin(), zeros.rows.end());
    data.labels.insert(data.labels.end(), zeros.labels.begin(), zeros.labels.end());

    const EoResult eo = equalized_odds(rule_model(classifier), data, map, "learn");
    for (const bool label : {true, false}) {
      double lo = 2.0;
      double hi = -1.0;
      for (const CompoundGroup& g : enumerate_groups(map)) {
        const double p = brute_group_ppv(classifier, map, data, g, label, true);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
      CHECK(std::fabs((label ? eo.tpr_gap : eo.fpr_gap) - (hi - lo)) <= 1e-9);
    }
  }
}

TEST_CASE("reports do not depend on the worker count") {
  std::mt19937_64 rng(2026);
  const FeatureMap map = binary_protected_map(3, 3);
  const int n = static_cast<int>(map.num_vars());
  const CnfFormula classifier =
      oracle::to_formula(oracle::random_cnf(rng, n, 5, 3), static_cast<Var>(n));
  BooleanDataset data = cover_groups(rng, map, 2, true);
  const BooleanDataset zeros = cover_groups(rng, map, 2, false);
  data.rows.insert(data.rows.end(), zeros.rows.begin(), zeros.rows.end());
  data.labels.insert(data.labels.end(), zeros.labels.begin(), zeros.labels.end());

  VerifyOptions serial;
  serial.jobs = 1;
  VerifyOptions wide;
  wide.jobs = 8;
  const std::string a = report_to_json(justicia_enum(rule_model(classifier), data, map, serial)).dump();
  const std::string b = report_to_json(justicia_enum(rule_model(classifier), data, map, wide)).dump();
  CHECK(a == b);
  CHECK(a.find("\"solves\":24") != std::string::npos);  // 8 groups + 16 eo solves
}

TEST_CASE("report serialization shape") {
  FeatureMap map;
  map.add_protected_binary("g", "n", "y");
  map.add_feature(threshold_def("x", 0.5));
  CnfFormula cnf(2);
  cnf.add_clause({2});

  BooleanDataset data;
  data.num_vars = 2;
  data.rows = {{false, true}, {false, false}, {true, true}, {true, false}};
  data.labels = {true, false, true, false};

  const FairnessReport report = justicia_enum(rule_model(cnf), data, map);
  const std::string json = report_to_json(report).dump();
  CHECK(json ==
        R"({"mode":"enum","groups":[{"group":"g=n","ppv":0.5},{"group":"g=y","ppv":0.5}],)"
        R"("favored":{"group":"g=n","ppv":0.5},"unfavored":{"group":"g=n","ppv":0.5},)"
        R"("metrics":{"di":1.0,"sp":0.0,"eo":{"tpr_gap":0.0,"fpr_gap":0.0,"value":0.0}},)"
        R"("warnings":[],"stats":{"solves":6}})");
}
