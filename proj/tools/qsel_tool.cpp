#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qsel/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  int jobs = 1;
  bool deterministic = false;
  bool no_plots = false;
};

int run_command(const std::string& command, const Common& c) {
  const qsel::ExperimentConfig cfg = qsel::load_config(c.config, command);
  const std::filesystem::path dir = c.out.empty() ? cfg.output : c.out;
  qsel::RunOptions opts;
  opts.jobs = c.jobs;
  opts.deterministic = c.deterministic;

  const auto start = std::chrono::steady_clock::now();
  qsel::log_info(command + ": running");
  const qsel::ExperimentOutput out = qsel::run_experiment(cfg, opts);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const qsel::RunManifest m = qsel::write_artifacts(cfg, out, dir, wall, !c.no_plots);
  qsel::log_info(command + ": wrote " + std::to_string(m.files.size() + 1) + " files to " +
                 dir.string());
  std::cout << m.summary.dump() << '\n';
  return 0;
}

int run_regression(const std::string& golden, const std::string& work, const Common& c) {
  qsel::RunOptions opts;
  opts.jobs = c.jobs;
  opts.deterministic = c.deterministic;
  const qsel::RegressionReport r = qsel::regression(golden, work, opts);
  for (const auto& d : r.diffs)
    std::cout << "DIFF " << d.case_name << " " << d.file << " " << d.field << ": expected "
              << d.expected << " got " << d.actual << " (rel tol " << d.tolerance << ")\n";
  std::cout << (r.passed() ? "PASS" : "FAIL") << " " << r.cases.size() << " cases, "
            << r.diffs.size() << " differing fields\n";
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical selection experiments"};
  app.set_version_flag("--version", std::string(qsel::kToolVersion));
  app.require_subcommand(1);

  Common common;
  std::string golden = "golden", work = "regression_out";
  std::string chosen;
  for (const auto& name : qsel::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", common.config, "Experiment config (JSON)")->required();
    sub->add_option("--out", common.out, "Output directory (overrides the config)");
    sub->add_option("--jobs", common.jobs, "Worker thread cap")->check(CLI::PositiveNumber);
    sub->add_flag("--deterministic", common.deterministic, "Single-threaded, reproducible run");
    sub->add_flag("--no-plots", common.no_plots, "Skip SVG output");
    sub->callback([&chosen, name] { chosen = name; });
  }
  CLI::App* reg = app.add_subcommand("regression", "Compare fresh runs against golden outputs");
  reg->add_option("--golden", golden, "Golden directory")->capture_default_str();
  reg->add_option("--out", work, "Scratch directory for fresh runs")->capture_default_str();
  reg->add_option("--jobs", common.jobs, "Worker thread cap")->check(CLI::PositiveNumber);
  reg->add_flag("--deterministic", common.deterministic, "Single-threaded, reproducible run");
  reg->callback([&chosen] { chosen = "regression"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (chosen == "regression") return run_regression(golden, work, common);
    return run_command(chosen, common);
  } catch (const qsel::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qsel::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
