// Writes a seeded synthetic health-insurance bundle (data.csv, schema.json,
// model.json) whose exact fairness metrics are known, for demos and tests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "fairssat/synth.hpp"

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic health-insurance example bundle"};
  app.name("fairssat-synth");

  fairssat::SynthConfig config;
  std::string out_dir;
  app.add_option("--rows", config.rows, "Number of data rows")->capture_default_str();
  app.add_option("--seed", config.seed, "Random seed")->capture_default_str();
  app.add_option("--out-dir", out_dir, "Directory for data.csv, schema.json, model.json")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const fairssat::SynthBundle bundle = fairssat::generate_insurance_bundle(config);
    write_file(dir / "data.csv", bundle.csv);
    write_file(dir / "schema.json", bundle.schema.dump(2) + "\n");
    write_file(dir / "model.json", bundle.model.dump(2) + "\n");
    std::cerr << "wrote " << config.rows << " rows to " << (dir / "data.csv").string()
              << " (seed " << config.seed << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
