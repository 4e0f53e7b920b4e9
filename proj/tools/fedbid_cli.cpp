// fedbid: run competitive bidding markets and write their artifacts.
//
//   fedbid run <config.json> [--seed N] [--out DIR]
//   fedbid sweep <config-dir> [--seed N] [--out DIR] [--jobs N]
//   fedbid plot <artifacts-dir>

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedbid/config.hpp"
#include "fedbid/experiment.hpp"
#include "fedbid/plots.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

fedbid::RunConfig load(const fs::path& path, const Overrides& ov) {
  fedbid::RunConfig cfg = fedbid::parse_config_file(path);
  if (ov.seed) cfg.master_seed = *ov.seed;
  if (ov.out) cfg.output_dir = *ov.out;
  return cfg;
}

void print_summary(const fedbid::RunArtifacts& artifacts, const fs::path& dir) {
  std::cout << "wrote " << (dir / fedbid::kSummaryCsvName).string() << "\n";
  std::cout << artifacts.summary_csv;
}

int cmd_run(const fs::path& config_path, const Overrides& ov) {
  const fedbid::RunConfig cfg = load(config_path, ov);
  std::cout << "resolved config:\n" << fedbid::to_json(cfg).dump(2) << "\n";
  const auto artifacts = fedbid::run_experiment(cfg);
  fedbid::write_artifacts(artifacts, cfg.output_dir);
  print_summary(artifacts, cfg.output_dir);
  return 0;
}

int cmd_sweep(const fs::path& config_dir, const Overrides& ov, int jobs) {
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(config_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      configs.push_back(entry.path());
    }
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::cerr << "sweep: no *.json configs in " << config_dir.string() << "\n";
    return 1;
  }

  // Every config gets its own output directory, so runs share nothing.
  std::vector<fedbid::RunConfig> runs;
  for (const auto& path : configs) {
    fedbid::RunConfig cfg = load(path, {ov.seed, std::nullopt});
    const fs::path base = ov.out ? fs::path(*ov.out) : fs::path(cfg.output_dir);
    cfg.output_dir = (base / path.stem()).string();
    runs.push_back(std::move(cfg));
  }

  int failures = 0;
  for (std::size_t start = 0; start < runs.size(); start += static_cast<std::size_t>(jobs)) {
    const std::size_t stop = std::min(runs.size(), start + static_cast<std::size_t>(jobs));
    std::vector<std::future<fedbid::RunArtifacts>> pending;
    for (std::size_t i = start; i < stop; ++i) {
      pending.push_back(std::async(std::launch::async,
                                   [&cfg = runs[i]] { return fedbid::run_experiment(cfg); }));
    }
    for (std::size_t i = start; i < stop; ++i) {
      try {
        const auto artifacts = pending[i - start].get();
        fedbid::write_artifacts(artifacts, runs[i].output_dir);
        print_summary(artifacts, runs[i].output_dir);
      } catch (const std::exception& e) {
        std::cerr << configs[i].string() << ": " << e.what() << "\n";
        ++failures;
      }
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_plot(const fs::path& artifacts_dir) {
  const auto report = fedbid::emit_plots(artifacts_dir);
  for (const auto& notice : report.notices) std::cerr << "notice: " << notice << "\n";
  for (const auto& file : report.files) std::cout << "wrote " << file.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Competitive auction-based federated learning market simulator"};
  app.require_subcommand(1);

  Overrides ov;
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 1;
  std::string config_path, config_dir, artifacts_dir;

  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Override master_seed");
    sub->add_option("--out", out, "Override output_dir");
  };

  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", config_path, "Path to a JSON config")->required()->check(CLI::ExistingFile);
  add_overrides(run);

  auto* sweep = app.add_subcommand("sweep", "Run every *.json config in a directory");
  sweep->add_option("config-dir", config_dir, "Directory of JSON configs")
      ->required()
      ->check(CLI::ExistingDirectory);
  sweep->add_option("--jobs", jobs, "Experiments to run concurrently")->check(CLI::PositiveNumber);
  add_overrides(sweep);

  auto* plot = app.add_subcommand("plot", "Write bar charts for existing artifacts");
  plot->add_option("artifacts-dir", artifacts_dir, "Directory holding run artifacts")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* sub : {run, sweep}) {
    if (sub->parsed()) {
      if (sub->count("--seed")) ov.seed = seed;
      if (sub->count("--out")) ov.out = out;
    }
  }

  try {
    if (run->parsed()) return cmd_run(config_path, ov);
    if (sweep->parsed()) return cmd_sweep(config_dir, ov, jobs);
    if (plot->parsed()) return cmd_plot(artifacts_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
