#pragma once

// Comparison of the exact data-set problem against the approximate problem
// on the same scenario, over a sequence of data grids or a data file.

#include <string>
#include <vector>

#include "ddcd/scenario.hpp"

namespace ddcd {

struct DcnlpStepComparison {
  int step = 0;
  double time = 0.0;
  std::vector<int> assignment;
  double dcnlp_cost = 0.0;
  double approx_cost = 0.0;
  double q_difference = 0.0;  // |q_dcnlp - q_approx|_inf
};

struct DcnlpLevel {
  std::string source;    // "grid" or the data file path
  double spacing = 0.0;  // grid spacing, 0 for a data file
  int data_points = 0;
  std::vector<DcnlpStepComparison> steps;
  double max_q_difference = 0.0;
};

struct DcnlpStudy {
  std::string name;
  DcnlpMode mode = DcnlpMode::Shared;
  int steps = 0;
  std::vector<DcnlpLevel> levels;
  /// Grid levels in order of decreasing spacing show non-increasing
  /// max_q_difference.
  bool monotone = true;
};

/// Needs a constitutive law in the scenario. Grid levels come from the
/// dcnlp section; a constitutive data file adds one more level. Throws
/// ValidationError if neither is present.
DcnlpStudy run_dcnlp_study(const Scenario& scenario);
std::string dcnlp_study_json(const DcnlpStudy& study);

}  // namespace ddcd
