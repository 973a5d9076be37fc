#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsel/error.hpp"
#include "qsel/output.hpp"

namespace qsel {

inline constexpr const char* kToolVersion = "1.0.0";

/// melin-quad, landscape-scan, spectrum, modelops-weyl, modelops-scaling, cover-demo.
const std::vector<std::string>& subcommands();

/// Parsed experiment. params is normalized: every field present, defaults filled in, so
/// parse -> serialize -> parse is a fixed point.
struct ExperimentConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::string output = "out";
  nlohmann::json params = nlohmann::json::object();
};

/// Schema check of the whole document. `command` may come from the command line; when the
/// file also names one they must agree. Throws InvalidInput (or a module validation error)
/// on unknown fields, wrong types or out-of-range values.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& command = "");
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& command = "");
nlohmann::json to_json(const ExperimentConfig& cfg);

struct RunOptions {
  int jobs = 1;
  bool deterministic = false;  // single worker thread
};

struct ExperimentOutput {
  std::vector<Table> tables;
  std::vector<Plot> plots;
  nlohmann::json result = nlohmann::json::object();   // written as result.json
  nlohmann::json summary = nlohmann::json::object();  // copied into the manifest
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct RunManifest {
  std::string config_hash;  // FNV-1a of the normalized config
  std::string tool_version;
  double wall_time = 0.0;  // seconds
  std::vector<std::string> files;
  nlohmann::json summary;

  nlohmann::json to_json() const;
};

/// Writes tables (CSV), result.json, plots (SVG, unless disabled) and manifest.json.
RunManifest write_artifacts(const ExperimentConfig& cfg, const ExperimentOutput& out,
                            const std::filesystem::path& dir, double wall_time,
                            bool plots = true);

/// 0 success, 2 validation error, 3 numeric failure.
int exit_code(ErrorKind kind);

struct FieldDiff {
  std::string case_name, file, field;
  std::string expected, actual;
  double tolerance = 0.0;  // relative; 0 means exact
};

struct RegressionReport {
  std::vector<std::string> cases;
  std::vector<FieldDiff> diffs;
  bool passed() const { return diffs.empty(); }
};

/// Each subdirectory of `golden` holding config.json is one case: the config is rerun into
/// work/<case> and every CSV and result.json shipped next to it is compared field by field.
/// Integers must match exactly, floats to 1e-8 relative unless tolerances.json in the case
/// directory overrides it ({"default": tol, "fields": {"file:column": tol}}).
/// Throws MissingGolden when the directory or a case is missing or incomplete.
RegressionReport regression(const std::filesystem::path& golden, const std::filesystem::path& work,
                            const RunOptions& opts = {});

}  // namespace qsel
