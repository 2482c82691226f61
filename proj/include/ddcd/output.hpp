#pragma once

// Scenario runs and their files:
//   trajectory.csv   t, then phi, d1, d2, d3 (12 columns) per node
//   elements.csv     t_{k-1/2}, then e1..e6, s1..s6 per selected element
//   diagnostics.csv  t, l, j_minus, j_plus, g_inf, newton_iterations, final_residual
//   summary.json     on success, failure.json on a solver failure
// Numbers are written with 17 significant digits, independent of locale.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ddcd/scenario.hpp"

namespace ddcd {

/// Shortest round-trip-exact text for a double (at most 17 significant
/// digits, '.' as decimal point).
std::string format_number(double x);

class CsvWriter {
 public:
  /// Creates `directory` if needed and truncates the three CSV files.
  CsvWriter(const std::filesystem::path& directory, int node_count, std::vector<int> elements, double dt);
  void write(const StepRecord& record);

 private:
  std::ofstream trajectory_, elements_, diagnostics_;
  std::vector<int> elements_sel_;  // zero-based
  double dt_;
};

struct RunSummary {
  std::string name;
  bool ok = true;
  int steps_total = 0;
  int steps_completed = 0;
  double dt = 0.0;
  double t_end = 0.0;
  double wall_time_s = 0.0;
  double mean_iterations = 0.0;
  int max_iterations = 0;
  double max_final_residual = 0.0;
  double max_relative_residual = 0.0;  // final / (1 + initial), worst step
  double max_constraint_norm = 0.0;
  Vec3 linear_momentum = Vec3::Zero();   // last record
  Vec3 angular_momentum_minus = Vec3::Zero();
  Vec3 angular_momentum_plus = Vec3::Zero();
  std::optional<Vec3> impulse;  // Sum f * integral of a(t), when loads switch off
  // Per-component drift maxima over steps whose balance sees no load.
  int load_free_steps = 0;
  Vec3 max_linear_drift = Vec3::Zero();
  Vec3 max_angular_drift = Vec3::Zero();
  double max_relative_linear_drift = 0.0;   // |dl| / (1 + |l|)
  double max_relative_angular_drift = 0.0;  // |dj| / (1 + |j|)
  std::optional<double> symmetry_defect_final;
  std::optional<double> symmetry_defect_max;
  // Reference comparison (node 1-based).
  int reference_node = 0;
  std::optional<Vec3> node_position;
  std::optional<double> position_deviation;
  std::optional<double> director_deviation;
  std::optional<Vec3> linear_momentum_magnitude_deviation;   // ||l| - |l_ref||
  std::optional<Vec3> angular_momentum_magnitude_deviation;  // ||j| - |j_ref||
  std::optional<StepFailure> failure;
};

/// Diagnostics of a (possibly partial) trajectory.
RunSummary summarize(const Scenario& scenario, const Trajectory& trajectory, double wall_time_s);

std::string summary_json(const RunSummary& summary);
std::string failure_json(const RunSummary& summary);

struct RunResult {
  Trajectory trajectory;
  RunSummary summary;
};

/// Runs the scenario, streaming the CSV files into `out_dir` (flushed per
/// step) and finishing with summary.json or failure.json. Validation errors
/// propagate as ValidationError / InvalidInput.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

}  // namespace ddcd
