#include "fairssat/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairssat/dataset.hpp"
#include "fairssat/encode.hpp"
#include "fairssat/errors.hpp"
#include "fairssat/model.hpp"
#include "fairssat/sdimacs.hpp"
#include "fairssat/ssat.hpp"
#include "fairssat/verify.hpp"

namespace fairssat {

namespace {

constexpr double kBothModeTolerance = 1e-6;

struct VerifyArgs {
  std::string data;
  std::string schema;
  std::string model;
  std::string mode = "enum";
  std::string metrics = "di,sp,eo";
  std::string out_path;
  int bins = 0;
  bool bins_set = false;
  int scale = 64;
  double lambda = 0.0;
  bool bin_implications = false;
  int jobs = 1;
};

struct EncodeArgs {
  std::string schema;
  std::string model;
  std::string out_path;
  int bins = 0;
  bool bins_set = false;
  int scale = 64;
  double lambda = 0.0;
  bool bin_implications = false;
};

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

void select_metrics(const std::string& csv, VerifyOptions& options) {
  options.metric_di = options.metric_sp = options.metric_eo = false;
  std::istringstream in(csv);
  std::string token;
  bool any = false;
  while (std::getline(in, token, ',')) {
    const auto begin = token.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const auto end = token.find_last_not_of(" \t");
    const std::string name = token.substr(begin, end - begin + 1);
    if (name == "di") {
      options.metric_di = true;
    } else if (name == "sp") {
      options.metric_sp = true;
    } else if (name == "eo") {
      options.metric_eo = true;
    } else {
      throw ValidationError("unknown metric '" + name + "' (expected di, sp, eo)");
    }
    any = true;
  }
  if (!any) throw ValidationError("--metrics selects no metric");
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw Error("cannot open output file " + out_path);
  file << text;
  if (!file) throw Error("cannot write output file " + out_path);
}

void summarize(std::ostream& err, const FairnessReport& r) {
  err << r.mode << " mode";
  if (!r.groups.empty()) err << " (" << r.groups.size() << " groups)";
  err << ": favored " << r.favored.group << " ppv=" << fixed(r.favored.ppv, 6) << ", unfavored "
      << r.unfavored.group << " ppv=" << fixed(r.unfavored.ppv, 6) << "\n";
  std::string metrics;
  if (r.disparate_impact) metrics += "  di=" + fixed(*r.disparate_impact, 6);
  if (r.statistical_parity) metrics += "  sp=" + fixed(*r.statistical_parity, 6);
  if (r.equalized_odds) {
    metrics += "  eo=" + fixed(r.equalized_odds->eo, 6) + " (tpr_gap=" +
               fixed(r.equalized_odds->tpr_gap, 6) + ", fpr_gap=" +
               fixed(r.equalized_odds->fpr_gap, 6) + ")";
  }
  if (!metrics.empty()) err << metrics << "\n";
  for (const std::string& w : r.warnings) err << "warning: " << w << "\n";
  err << "  " << r.solve_count << " solver calls, " << fixed(r.wall_ms, 1) << " ms\n";
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  const RawDataset raw = RawDataset::from_csv_file(args.data);
  const AttributeSchema schema = AttributeSchema::from_json_file(args.schema);
  const ModelSpec spec = ModelSpec::from_json_file(args.model);

  const std::optional<int> bins =
      args.bins_set ? std::optional<int>(args.bins) : std::nullopt;
  const auto [bits, map] = discretize(raw, schema, spec.numeric_thresholds(), bins);
  const ClassifierModel model = spec.resolve(map);

  VerifyOptions options;
  options.encode.scale = args.scale;
  options.encode.lambda = args.lambda;
  options.encode.bin_implications = args.bin_implications;
  options.jobs = args.jobs;
  select_metrics(args.metrics, options);

  nlohmann::ordered_json output;
  int exit_code = 0;
  if (args.mode == "enum") {
    const FairnessReport report = justicia_enum(model, bits, map, options);
    summarize(err, report);
    output = report_to_json(report);
  } else if (args.mode == "learn") {
    const FairnessReport report = justicia_learn(model, bits, map, options);
    summarize(err, report);
    output = report_to_json(report);
  } else {
    const FairnessReport by_group = justicia_enum(model, bits, map, options);
    const FairnessReport by_search = justicia_learn(model, bits, map, options);
    summarize(err, by_group);
    summarize(err, by_search);

    // Cross-check: with whole-population probabilities the enumerated
    // extremes must agree with the searched ones.
    VerifyOptions check = options;
    check.unconditioned_probs = true;
    check.metric_di = check.metric_sp = check.metric_eo = false;
    const FairnessReport reference = justicia_enum(model, bits, map, check);
    const double max_diff = std::fabs(by_search.max_ppv - reference.max_ppv);
    const double min_diff = std::fabs(by_search.min_ppv - reference.min_ppv);
    const bool consistent = max_diff <= kBothModeTolerance && min_diff <= kBothModeTolerance;

    output["mode"] = "both";
    output["enum"] = report_to_json(by_group);
    output["learn"] = report_to_json(by_search);
    output["consistency"] = {{"max_ppv_diff", max_diff},
                             {"min_ppv_diff", min_diff},
                             {"tolerance", kBothModeTolerance},
                             {"consistent", consistent}};
    err << "consistency check: max diff " << fixed(max_diff, 9) << ", min diff "
        << fixed(min_diff, 9) << (consistent ? " (ok)" : " (FAILED)") << "\n";
    if (!consistent) {
      err << "error: searched and enumerated PPV extremes disagree beyond "
          << fixed(kBothModeTolerance, 6) << "\n";
      exit_code = 2;
    }
  }

  emit(output.dump(2) + "\n", args.out_path, out);
  return exit_code;
}

int cmd_solve(const std::string& path, std::ostream& out) {
  const SsatFormula formula = parse_sdimacs_file(path);
  const SolveResult result = evaluate(formula);
  out << fixed(result.probability, 9) << "\n";
  out << "v";
  for (const Var v : formula.leading_exists_block()) {
    const std::optional<bool> b = result.witness_value(v);
    const auto sv = static_cast<long long>(v);
    out << ' ' << (b.value_or(false) ? sv : -sv);
  }
  out << " 0\n";
  return 0;
}

int cmd_encode(const EncodeArgs& args, std::ostream& out) {
  const AttributeSchema schema = AttributeSchema::from_json_file(args.schema);
  const ModelSpec spec = ModelSpec::from_json_file(args.model);

  const std::optional<int> bins =
      args.bins_set ? std::optional<int>(args.bins) : std::nullopt;
  // No dataset here: numeric attributes must be covered by model thresholds
  // or explicit schema edges (build_feature_map rejects data-derived ranges).
  const FeatureMap map = build_feature_map(schema, spec.numeric_thresholds(), bins, nullptr);
  const ClassifierModel model = spec.resolve(map);

  EncodeOptions options;
  options.scale = args.scale;
  options.lambda = args.lambda;
  options.bin_implications = args.bin_implications;
  const ClassifierEncoding enc = encode_classifier(model, map, options);

  std::ostringstream dump;
  dump << "c variable legend\n";
  for (Var v = 1; v <= map.num_vars(); ++v) {
    dump << "c v " << v << " = " << map.def(v).name()
         << (map.def(v).is_protected ? " [protected]" : "") << "\n";
  }
  const auto write_side = [&dump](const std::string& title, const CnfFormula& cnf,
                                  const std::vector<Var>& aux) {
    dump << "c " << title << "\n";
    for (const Var v : aux) dump << "c v " << v << " = encoder auxiliary\n";
    dump << "p cnf " << cnf.num_vars() << ' ' << cnf.clauses().size() << "\n";
    for (const Clause& c : cnf.clauses()) {
      for (const Lit l : c.literals()) dump << l.dimacs() << ' ';
      dump << "0\n";
    }
  };
  write_side("positive encoding: satisfied exactly where the classifier predicts 1",
             enc.positive, enc.positive_aux);
  write_side("negative encoding: satisfied exactly where the classifier predicts 0",
             enc.negative, enc.negative_aux);

  emit(dump.str(), args.out_path, out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact group-fairness auditing of binary classifiers via stochastic SAT"};
  app.name("fairssat");
  app.require_subcommand(1);

  VerifyArgs verify_args;
  unsigned long long seed = 1;  // reserved for the bundled data generator
  CLI::App* verify = app.add_subcommand("verify", "Audit a classifier's group fairness on a dataset");
  verify->add_option("--data", verify_args.data, "Dataset CSV (header row required)")->required();
  verify->add_option("--schema", verify_args.schema, "Attribute schema JSON")->required();
  verify->add_option("--model", verify_args.model, "Classifier model JSON")->required();
  verify->add_option("--mode", verify_args.mode, "Analysis mode")
      ->check(CLI::IsMember({"enum", "learn", "both"}))
      ->capture_default_str();
  verify->add_option("--metrics", verify_args.metrics, "Comma-separated subset of di,sp,eo")
      ->capture_default_str();
  CLI::Option* bins_opt =
      verify->add_option("--bins", verify_args.bins, "Equal-width bin count for numeric attributes")
          ->check(CLI::PositiveNumber);
  verify->add_option("--scale", verify_args.scale, "Integer scale for linear-model quantization")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--lambda", verify_args.lambda, "Drop linear weights with |w| <= lambda")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  verify->add_flag("--bin-implications", verify_args.bin_implications,
                   "Add nested-threshold implication clauses");
  verify->add_option("--jobs", verify_args.jobs, "Worker threads for per-group solves")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--seed", seed, "Accepted for interface symmetry; only the data generator uses it");
  verify->add_option("--out", verify_args.out_path, "Write the JSON report here instead of stdout");

  std::string solve_path;
  CLI::App* solve = app.add_subcommand("solve", "Solve a stochastic SAT instance in SDIMACS format");
  solve->add_option("file", solve_path, "SDIMACS input file")->required();

  EncodeArgs encode_args;
  CLI::App* encode =
      app.add_subcommand("encode", "Dump the classifier's CNF encodings with a variable legend");
  encode->add_option("--schema", encode_args.schema, "Attribute schema JSON")->required();
  encode->add_option("--model", encode_args.model, "Classifier model JSON")->required();
  CLI::Option* encode_bins_opt =
      encode->add_option("--bins", encode_args.bins, "Equal-width bin count for numeric attributes")
          ->check(CLI::PositiveNumber);
  encode->add_option("--scale", encode_args.scale, "Integer scale for linear-model quantization")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  encode->add_option("--lambda", encode_args.lambda, "Drop linear weights with |w| <= lambda")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  encode->add_flag("--bin-implications", encode_args.bin_implications,
                   "Add nested-threshold implication clauses");
  encode->add_option("--out", encode_args.out_path, "Write the dump here instead of stdout");

  SampleSizeQuery query;
  CLI::App* samplesize =
      app.add_subcommand("samplesize", "Rows needed for the requested estimation accuracy");
  samplesize->add_option("--n", query.n, "Number of protected Boolean variables")->required();
  samplesize->add_option("--m", query.m, "Number of non-protected Boolean variables (>= 2)")
      ->required();
  samplesize->add_option("--epsilon0", query.epsilon0, "Multiplicative error bound (> 1)")
      ->required();
  samplesize->add_option("--delta", query.delta, "Failure probability in (0, 1]")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    verify_args.bins_set = bins_opt->count() > 0;
    encode_args.bins_set = encode_bins_opt->count() > 0;
    if (verify->parsed()) return cmd_verify(verify_args, out, err);
    if (solve->parsed()) return cmd_solve(solve_path, out);
    if (encode->parsed()) return cmd_encode(encode_args, out);
    if (samplesize->parsed()) {
      const long long rows = required_sample_size(query);
      out << rows << "\n";
      err << "with " << rows
          << " rows, estimated probabilities (and the metrics derived from them) are within a "
             "multiplicative factor "
          << query.epsilon0 << " of the truth with confidence " << 1.0 - query.delta
          << "; order-of-magnitude guideline, not a guarantee\n";
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace fairssat
