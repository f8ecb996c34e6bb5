#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace rough_transport {

/// One experiment. Every field has a per-scenario default; see default_config().
struct ScenarioConfig {
  std::string scenario_id;
  int dimension = 1;
  double T = 1.0;
  std::string field_id;
  std::string damping_id;
  std::string u0_id;
  int seeds_per_axis = 64;
  int steps = 1000;
  double box_radius = 4.0;
  /// Time intervals of the space-time quadrature used by weak-form diagnostics.
  int time_intervals = 64;
  std::vector<double> delta_list;
  std::vector<double> R_list;
  std::vector<double> lambda_list;
  std::vector<double> eps_list;
  std::vector<double> eta_list;
  /// Truncation radius around singular points of c.
  double eta = 0.0;
  double gamma_level = 1e-10;
  std::uint64_t rng_seed = 12345;
  std::string output_dir;
  std::vector<std::string> diagnostics;
};

struct ScenarioInfo {
  std::string id;
  std::string description;
};

/// Registry in display order.
const std::vector<ScenarioInfo>& scenario_registry();

/// Rows whose id or description contains `filter` (all rows when empty).
std::vector<ScenarioInfo> list_scenarios(const std::string& filter = "");

/// Full default configuration of a registered scenario; throws ValidationError
/// for unknown ids.
ScenarioConfig default_config(const std::string& scenario_id);

const std::vector<std::string>& diagnostic_names();

nlohmann::json to_json(const ScenarioConfig& config);

/// Parses JSON text: missing keys take the scenario's defaults. Throws ParseError
/// (with line and column) on malformed JSON, wrong value types or unknown keys,
/// and ValidationError listing every violated constraint.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Throws ValidationError listing every violation.
void validate(const ScenarioConfig& config);

struct DiagnosticResult {
  std::string name;
  std::string status;      ///< "pass", "fail" or "skipped"
  double measured = 0.0;
  double tolerance = 0.0;
  std::string comparison;  ///< "<=", ">=" or "=="
  std::string note;
  double wall_seconds = 0.0;
  std::vector<std::string> artifacts;
};

struct RunReport {
  ScenarioConfig config;
  std::vector<DiagnosticResult> diagnostics;
  double wall_seconds = 0.0;
  std::string version;

  bool passed() const;
  const DiagnosticResult* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// Runs the pipeline and the selected diagnostics. When output_dir is set,
/// writes one CSV per diagnostic, summary.csv and report.json there. Module
/// errors are rethrown as Error with the failing stage in the message.
RunReport run_scenario(const ScenarioConfig& config);

const char* version_string();

}  // namespace rough_transport
