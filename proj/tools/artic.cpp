// Command line front end: run, batch and gen-cloud.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "artic/config.hpp"
#include "artic/error.hpp"
#include "artic/harness.hpp"
#include "artic/oracle.hpp"

namespace fs = std::filesystem;

namespace {

void print_summary(const artic::RunSummary& s) {
  std::printf("%-16s success=%d opening=%.3f force_factors=%d solves=%d avg_ms=%.2f worst_ms=%.2f%s%s\n",
              s.name.c_str(), s.success ? 1 : 0, s.opening_fraction, s.n_force_factors,
              s.n_optimizations, s.avg_opt_ms, s.worst_opt_ms, s.error.empty() ? "" : " error=",
              s.error.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Articulation estimation and opening simulator"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int parallelism = 1;
  app.add_option("--seed", seed, "Override the run seed");
  app.add_option("--out-dir", out_dir, "Directory for traces and summaries");
  app.add_option("--parallelism", parallelism, "Worker threads for batch")->check(CLI::PositiveNumber);

  std::string run_cfg;
  auto* run = app.add_subcommand("run", "Run one scenario config");
  run->add_option("config", run_cfg, "Scenario file")->required()->check(CLI::ExistingFile);

  std::string batch_dir;
  auto* batch = app.add_subcommand("batch", "Run every *.toml / *.cfg file in a directory");
  batch->add_option("dir", batch_dir, "Directory of scenario files")->required()->check(CLI::ExistingDirectory);

  std::string cloud_cfg;
  std::string cloud_out;
  auto* gen = app.add_subcommand("gen-cloud", "Export the synthetic flow cloud of a scenario");
  gen->add_option("config", cloud_cfg, "Scenario file")->required()->check(CLI::ExistingFile);
  gen->add_option("out", cloud_out, "Output cloud file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out_dir);
    if (*run) {
      artic::ScenarioConfig cfg = artic::load_config(run_cfg);
      if (seed) cfg.seed = *seed;
      const artic::RunResult r = artic::run_scenario(cfg);
      artic::export_trace(r.trace, fs::path(out_dir) / (cfg.name + "_trace.csv"));
      artic::export_summary(r.summary, fs::path(out_dir) / (cfg.name + "_summary.json"));
      print_summary(r.summary);
      return r.summary.success ? 0 : 2;
    }
    if (*batch) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(batch_dir)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".toml" || ext == ".cfg")) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) {
        std::cerr << "no scenario files in " << batch_dir << '\n';
        return 1;
      }
      std::vector<artic::ScenarioConfig> configs;
      for (const auto& f : files) {
        configs.push_back(artic::load_config(f));
        if (seed) configs.back().seed = *seed;
      }
      const artic::BatchReport report = artic::run_batch(configs, parallelism);
      for (const auto& s : report.summaries) {
        print_summary(s);
        artic::export_summary(s, fs::path(out_dir) / (s.name + "_summary.json"));
      }
      artic::export_batch(report, fs::path(out_dir) / "batch.json");
      std::printf("success_rate=%.3f avg_ms=%.2f worst_ms=%.2f\n", report.success_rate,
                  report.avg_opt_ms, report.worst_opt_ms);
      return 0;
    }
    if (*gen) {
      artic::ScenarioConfig cfg = artic::load_config(cloud_cfg);
      if (seed) cfg.seed = *seed;
      const artic::FlowCloud cloud =
          artic::to_frame(artic::generate(artic::make_oracle_spec(cfg)), artic::grasp_frame(cfg));
      artic::save_flow_cloud(cloud, cloud_out);
      std::printf("wrote %zu points to %s\n", cloud.points.size(), cloud_out.c_str());
      return 0;
    }
  } catch (const artic::Error& e) {
    std::cerr << "error (" << artic::to_string(e.kind()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
