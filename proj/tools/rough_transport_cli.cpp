#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rough_transport/errors.hpp"
#include "rough_transport/numerics.hpp"
#include "rough_transport/scenarios.hpp"

namespace rt = rough_transport;

namespace {

constexpr int kPass = 0;
constexpr int kContractFailure = 1;
constexpr int kUsageError = 2;

int run_command(const std::string& path, const std::string& output_dir, bool quiet) {
  rt::ScenarioConfig config;
  try {
    config = rt::load_config(path);
  } catch (const rt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  if (!output_dir.empty()) config.output_dir = output_dir;

  rt::RunReport report;
  try {
    report = rt::run_scenario(config);
  } catch (const rt::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const rt::Error& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kContractFailure;
  }

  if (!quiet) {
    std::printf("%-22s %-8s %-24s %s\n", "diagnostic", "status", "measured", "tolerance");
    for (const auto& d : report.diagnostics) {
      if (d.status == "skipped") {
        std::printf("%-22s %-8s %s\n", d.name.c_str(), d.status.c_str(), d.note.c_str());
        continue;
      }
      std::printf("%-22s %-8s %-24s %s %s\n", d.name.c_str(), d.status.c_str(), rt::format_double(d.measured).c_str(),
                  d.comparison.c_str(), rt::format_double(d.tolerance).c_str());
    }
    std::printf("scenario %s: %s (%.2f s)\n", config.scenario_id.c_str(), report.passed() ? "PASS" : "FAIL",
                report.wall_seconds);
    if (!config.output_dir.empty()) std::printf("artifacts in %s\n", config.output_dir.c_str());
  }
  return report.passed() ? kPass : kContractFailure;
}

int list_command(const std::string& filter) {
  for (const auto& row : rt::list_scenarios(filter)) std::printf("%-28s %s\n", row.id.c_str(), row.description.c_str());
  return kPass;
}

int defaults_command(const std::string& id) {
  try {
    std::cout << rt::to_json(rt::default_config(id)).dump(2) << '\n';
  } catch (const rt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regular Lagrangian flows and damped continuity equations: scenario runner"};
  app.set_version_flag("--version", std::string(rt::version_string()));
  app.require_subcommand(1);

  std::string config_path, output_dir, filter, scenario_id;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario from a JSON config");
  run->add_option("config", config_path, "Path to the config file")->required();
  run->add_option("-o,--output-dir", output_dir, "Override output_dir from the config");
  run->add_flag("-q,--quiet", quiet, "Only set the exit status");

  auto* list = app.add_subcommand("list", "List registered scenarios");
  list->add_option("filter", filter, "Substring filter on id or description");

  auto* defaults = app.add_subcommand("emit-defaults", "Print the default config of a scenario");
  defaults->add_option("scenario_id", scenario_id, "Scenario identifier")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsageError;
  }

  if (*run) return run_command(config_path, output_dir, quiet);
  if (*list) return list_command(filter);
  return defaults_command(scenario_id);
}
