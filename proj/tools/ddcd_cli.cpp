// Command-line front end; uses only the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "ddcd/ddcd.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitSelfCheck = 4;
constexpr int kExitOther = 1;

struct ScenarioDeleter {
  void operator()(ddcd_scenario* s) const { ddcd_scenario_free(s); }
};
using ScenarioPtr = std::unique_ptr<ddcd_scenario, ScenarioDeleter>;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { ddcd_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

int exit_code(ddcd_status st) {
  switch (st) {
    case DDCD_OK: return kExitOk;
    case DDCD_VALIDATION_ERROR: return kExitValidation;
    case DDCD_SOLVER_ERROR: return kExitSolver;
    case DDCD_SELF_CHECK_FAILED: return kExitSelfCheck;
    default: return kExitOther;
  }
}

int report(ddcd_status st) {
  if (st != DDCD_OK) std::cerr << "error: " << ddcd_last_error() << "\n";
  return exit_code(st);
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text << "\n";
  return static_cast<bool>(f);
}

int run_loaded(ddcd_scenario* sc, const std::string& out_dir, bool quiet) {
  OwnedString problems;
  if (ddcd_scenario_validate(sc, &problems.p) != DDCD_OK) return report(DDCD_VALIDATION_ERROR);
  OwnedString dir;
  if (out_dir.empty()) {
    if (auto st = ddcd_scenario_output_dir(sc, &dir.p); st != DDCD_OK) return report(st);
  }
  const std::string target = out_dir.empty() ? dir.str() : out_dir;
  OwnedString summary;
  const ddcd_status st = ddcd_run(sc, target.c_str(), &summary.p);
  if (!quiet && summary.p) std::cout << summary.str() << "\n";
  if (st == DDCD_OK) std::cerr << "wrote " << target << "\n";
  return report(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven dynamics of geometrically exact beams"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Do not print the run summary");

  std::string config;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run a scenario config and write its CSV/JSON output");
  run->add_option("config", config, "Scenario JSON file")->required();
  run->add_option("--out-dir", out_dir, "Output directory (default: from the config)");

  std::string preset_name;
  double dt = 0.0;
  double t_end = 0.0;
  bool print_config = false;
  auto* preset = app.add_subcommand("preset", "Run a built-in arc example");
  preset->add_option("name", preset_name, "ex1, ex2 or ex3")->required()->check(CLI::IsMember({"ex1", "ex2", "ex3"}));
  preset->add_option("--dt", dt, "Time step")->check(CLI::PositiveNumber);
  preset->add_option("--t-end", t_end, "End time")->check(CLI::PositiveNumber);
  preset->add_option("--out-dir", out_dir, "Output directory (default: out/<name>)");
  preset->add_flag("--print-config", print_config, "Print the preset as a config file and exit");

  double perturbation = 0.0;
  std::string report_path;
  auto* self_check = app.add_subcommand("self-check", "Finite-difference checks of all analytic derivatives");
  self_check->add_option("--perturb-strain-jacobian", perturbation, "Add this value to B inside its own check");
  self_check->add_option("--json", report_path, "Also write the report to this file");

  auto* dcnlp = app.add_subcommand("dcnlp", "Compare data-set solutions with the manifold solution");
  dcnlp->add_option("config", config, "Scenario JSON file with a dcnlp section")->required();
  dcnlp->add_option("--json", report_path, "Also write the report to this file");

  auto* validate = app.add_subcommand("validate", "Check a scenario config without running it");
  validate->add_option("config", config, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (run->parsed() || dcnlp->parsed() || validate->parsed()) {
    ddcd_scenario* raw = nullptr;
    if (auto st = ddcd_scenario_load(config.c_str(), &raw); st != DDCD_OK) return report(st);
    ScenarioPtr sc(raw);

    if (run->parsed()) return run_loaded(sc.get(), out_dir, quiet);

    if (validate->parsed()) {
      OwnedString problems;
      const ddcd_status st = ddcd_scenario_validate(sc.get(), &problems.p);
      if (st == DDCD_OK) std::cout << "ok: " << config << "\n";
      return report(st);
    }

    OwnedString json;
    const ddcd_status st = ddcd_dcnlp_study(sc.get(), &json.p);
    if (st != DDCD_OK) return report(st);
    std::cout << json.str() << "\n";
    if (!report_path.empty() && !write_file(report_path, json.str())) {
      std::cerr << "error: cannot write " << report_path << "\n";
      return kExitOther;
    }
    return kExitOk;
  }

  if (preset->parsed()) {
    ddcd_scenario* raw = nullptr;
    if (auto st = ddcd_scenario_preset(preset_name.c_str(), &raw); st != DDCD_OK) return report(st);
    ScenarioPtr sc(raw);
    ddcd_scenario_set_time(sc.get(), dt, t_end);
    if (print_config) {
      OwnedString json;
      if (auto st = ddcd_scenario_to_json(sc.get(), &json.p); st != DDCD_OK) return report(st);
      std::cout << json.str() << "\n";
      return kExitOk;
    }
    return run_loaded(sc.get(), out_dir, quiet);
  }

  if (self_check->parsed()) {
    OwnedString json;
    const ddcd_status st = ddcd_self_check(perturbation, &json.p);
    if (json.p) {
      std::cout << json.str() << "\n";
      if (!report_path.empty() && !write_file(report_path, json.str())) {
        std::cerr << "error: cannot write " << report_path << "\n";
        return kExitOther;
      }
    }
    return report(st);
  }
  return kExitOther;
}
