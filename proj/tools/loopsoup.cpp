// loopsoup: verify identities, run Monte Carlo checks, stream samples.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "loopsoup/harness.hpp"

namespace {

using namespace loopsoup;
using namespace loopsoup::harness;

struct Options {
  std::string out;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::string what;
  std::size_t count = 1;
  double intensity = 1.0;
  std::string matrix_path;
  std::string graph_path;
};

RunConfig load_config(const Options& opt) {
  RunConfig config;
  bool seed_from_file = false;
  if (!opt.config_path.empty()) {
    const auto doc = io::read_json_file(opt.config_path);
    config = config_from_json(doc);
    seed_from_file = doc.is_object() && doc.contains("seed");
  }
  if (opt.seed) {
    config.seed = *opt.seed;
  } else if (!seed_from_file) {
    if (const char* env = std::getenv("LOOPSOUP_SEED"); env && *env) {
      try {
        config.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidInput, std::string("LOOPSOUP_SEED is not an integer: ") + env);
      }
    }
  }
  if (opt.samples) {
    config.samples = *opt.samples;
    config.wilson_samples = *opt.samples;
  }
  if (!opt.out.empty()) config.output = opt.out;
  config.validate();
  return config;
}

template <class Body>
int with_output(const RunConfig& config, Body body) {
  if (config.output.empty()) return body(std::cout);
  std::ofstream file(config.output);
  if (!file) throw Error(ErrorKind::InvalidInput, "cannot open output file " + config.output);
  return body(file);
}

int report_and_exit(const RunConfig& config, const std::vector<CheckReport>& reports) {
  return with_output(config, [&](std::ostream& out) {
    write_reports(reports, out);
    std::size_t failed = 0;
    std::size_t inconclusive = 0;
    for (const auto& r : reports) {
      failed += r.status == Status::Fail;
      inconclusive += r.status == Status::Inconclusive;
    }
    std::cerr << reports.size() << " checks, " << failed << " failed, " << inconclusive << " inconclusive\n";
    return exit_code(reports);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loop measures, loop soups and Gaussian free fields on finite state spaces"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--out", opt.out, "Write JSON-lines output to this file");

  auto* verify = app.add_subcommand("verify", "Run the deterministic identity suites");
  verify->add_option("--config", opt.config_path, "JSON run configuration")->check(CLI::ExistingFile);

  auto* mc = app.add_subcommand("mc", "Run the Monte Carlo suites");
  mc->add_option("--config", opt.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  mc->add_option("--seed", opt.seed, "Master seed (falls back to config, then LOOPSOUP_SEED, then 42)");
  mc->add_option("--samples", opt.samples, "Samples per suite");

  auto* sample = app.add_subcommand("sample", "Stream samples as JSON lines");
  sample->add_option("--what", opt.what, "soup | gff | tree | field")
      ->required()
      ->check(CLI::IsMember({"soup", "gff", "tree", "field"}));
  sample->add_option("--n", opt.count, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--t", opt.intensity, "Soup intensity")->check(CLI::PositiveNumber);
  sample->add_option("--matrix", opt.matrix_path, "Weight matrix JSON file")->check(CLI::ExistingFile);
  sample->add_option("--graph", opt.graph_path, "Graph JSON file")->check(CLI::ExistingFile);
  sample->add_option("--seed", opt.seed, "Master seed");
  sample->add_option("--config", opt.config_path, "JSON run configuration")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInputError;
  }

  try {
    const RunConfig config = load_config(opt);
    if (verify->parsed()) return report_and_exit(config, run_verify(config));
    if (mc->parsed()) return report_and_exit(config, run_mc(config));

    SampleRequest request;
    request.kind = *parse_sample_kind(opt.what);
    request.count = opt.count;
    request.intensity = opt.intensity;
    if (!opt.matrix_path.empty()) request.matrix_path = opt.matrix_path;
    if (!opt.graph_path.empty()) request.graph_path = opt.graph_path;
    return with_output(config, [&](std::ostream& out) {
      run_sample(config, request, out);
      return static_cast<int>(kPass);
    });
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return kInputError;
  } catch (const io::json::exception& e) {
    std::cerr << "error [InvalidInput]: " << e.what() << '\n';
    return kInputError;
  }
}
