// Command-line driver: run experiments, fetch benchmark datasets, and draw
// synthetic mixture samples.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dtenv/csv.hpp"
#include "dtenv/experiment.hpp"
#include "dtenv/fetch.hpp"
#include "dtenv/mixture.hpp"
#include "dtenv/report.hpp"

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string format = "markdown";
  std::string out;
  std::string trace;
  std::string tree_out;
  bool print_config = false;
  bool quiet = false;
};

struct FetchArgs {
  std::string id;
  std::vector<std::string> urls;
  std::string sha256;
  std::string dest;
  bool list = false;
};

struct SynthArgs {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

// Writes through a temporary file so a failed run leaves no partial output.
void write_file(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

int run_command(const RunArgs& args) {
  dtenv::ExperimentConfig config = dtenv::load_config(args.config);
  if (args.preset) dtenv::apply_preset(config, dtenv::parse_preset(*args.preset));
  if (args.seed) config.seed = *args.seed;
  if (args.threads) config.threads = *args.threads;
  const auto format = dtenv::parse_report_format(args.format);
  config.validate();
  if (args.print_config) {
    dtenv::write_config(std::cout, config);
    return 0;
  }

  std::ofstream trace;
  dtenv::RunOutputs outputs;
  if (!args.trace.empty()) {
    trace.open(args.trace);
    if (!trace) throw std::runtime_error("cannot open trace file " + args.trace);
    outputs.trace = &trace;
  }
  if (!args.quiet) outputs.log = &std::cerr;

  const auto start = std::chrono::steady_clock::now();
  const auto report = dtenv::run_experiment(config, outputs);
  const std::string text = dtenv::emit_report(report, format);
  if (args.out.empty())
    std::cout << text;
  else
    write_file(args.out, text);

  if (!args.tree_out.empty()) {
    std::string trees;
    for (const auto& t : report.techniques)
      if (t.representative) trees += "# " + std::string(dtenv::to_string(t.technique)) + "\n" + dtenv::to_text(*t.representative);
    write_file(args.tree_out, trees);
  }
  if (!args.quiet)
    std::cerr << "done in " << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
              << " s\n";
  return 0;
}

int fetch_command(const FetchArgs& args) {
  if (args.list) {
    for (const auto& d : dtenv::dataset_registry())
      std::cout << d.id << "\t" << d.title << "\tC=" << d.num_classes << " m=" << d.num_features
                << " train=" << d.train << " test=" << d.test << '\n';
    return 0;
  }
  if (args.id.empty()) throw std::invalid_argument("fetch: dataset id required; known: " + dtenv::known_dataset_ids());
  dtenv::FetchOptions options;
  options.urls = args.urls;
  options.sha256 = args.sha256;
  if (!args.dest.empty()) options.dest_dir = args.dest;
  const auto result = dtenv::fetch_dataset(args.id, options);
  std::cout << result.csv.string() << '\n';
  std::cerr << (result.from_cache ? "cached" : "downloaded") << (result.sha256.empty() ? "" : " sha256 " + result.sha256)
            << '\n';
  return 0;
}

int synth_command(const SynthArgs& args) {
  if (args.n == 0) throw std::invalid_argument("synth: --n must be positive");
  const auto data = dtenv::sample_mixture(dtenv::make_paper_mixture(), args.n, args.seed);
  std::ostringstream os;
  dtenv::write_csv(os, data);
  write_file(args.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized and Bayesian decision-tree ensembles with uncertainty envelopes"};
  app.name("dtenv");
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and emit a report");
  run_cmd->add_option("--config", run.config, "Experiment config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--preset", run.preset, "Scale preset applied after the config file")
      ->check(CLI::IsMember({"desk", "paper"}));
  run_cmd->add_option("--seed", run.seed, "Master seed (overrides the config)");
  run_cmd->add_option("--threads", run.threads, "Worker threads, 0 for all cores");
  run_cmd->add_option("--format", run.format, "Report format")->check(CLI::IsMember({"csv", "markdown"}));
  run_cmd->add_option("--out", run.out, "Report path (default: stdout)");
  run_cmd->add_option("--trace", run.trace, "Write the Bayesian chain trace to this CSV file");
  run_cmd->add_option("--tree-out", run.tree_out, "Write representative trees in text form to this file");
  run_cmd->add_flag("--print-config", run.print_config, "Print the resolved config and exit");
  run_cmd->add_flag("--quiet", run.quiet, "Suppress progress output");

  FetchArgs fetch;
  auto* fetch_cmd = app.add_subcommand("fetch", "Download and convert a benchmark dataset into the cache");
  fetch_cmd->add_option("dataset-id", fetch.id, "Dataset id");
  fetch_cmd->add_option("--url", fetch.urls, "Source URL(s) replacing the built-in ones (http, https or file)");
  fetch_cmd->add_option("--sha256", fetch.sha256, "Expected SHA-256 of the downloaded files");
  fetch_cmd->add_option("--dest", fetch.dest, std::string("Destination directory (default: $") + dtenv::kCacheDirEnv + ")");
  fetch_cmd->add_flag("--list", fetch.list, "List known datasets");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Sample the five-Gaussian mixture to CSV");
  synth_cmd->add_option("--n", synth.n, "Number of points")->required();
  synth_cmd->add_option("--seed", synth.seed, "Seed")->required();
  synth_cmd->add_option("--out", synth.out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "dtenv: error: " << e.what() << " (see --help)\n";
    return 2;
  }

  try {
    if (*run_cmd) return run_command(run);
    if (*fetch_cmd) return fetch_command(fetch);
    return synth_command(synth);
  } catch (const std::exception& e) {
    std::cerr << "dtenv: error: " << e.what() << '\n';
    return 1;
  }
}
