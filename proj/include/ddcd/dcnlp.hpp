#pragma once

// Exact data-driven step over a raw measurement set: every candidate
// assignment of data points to elements is a fixed-data problem, and the
// step solution is the assignment with the lowest optimal cost.

#include <string>
#include <vector>

#include "ddcd/step_solver.hpp"

namespace ddcd {

enum class DcnlpMode {
  Shared,             // one data point for all elements
  CoordinateDescent,  // per element, single-element swaps until no swap helps
  Exhaustive,         // per element, all |D|^E assignments (small problems only)
};

const char* to_string(DcnlpMode mode);
DcnlpMode parse_dcnlp_mode(const std::string& name);

/// Limits of the exhaustive mode.
inline constexpr int kExhaustiveMaxElements = 3;
inline constexpr int kExhaustiveMaxPoints = 10;

struct DcnlpResult {
  PrimalDualState state;
  std::vector<int> assignment;  // data index per element
  double cost = 0.0;
  NewtonReport report;          // of the winning sub-solve
  int subproblems = 0;          // fixed-data solves attempted
  int failures = 0;             // sub-solves that threw SolverError
};

/// Solves the fixed-data problem for each candidate assignment, warm-started
/// from `initial`, and keeps the minimal cost. Ties go to the assignment that
/// comes first in lexicographic order of data indices. Throws InvalidInput on
/// an empty data set or an exhaustive request beyond the limits, and
/// SolverError if every sub-solve fails.
DcnlpResult solve_dcnlp_enumerate(const StepProblem& problem, const PrimalDualState& initial,
                                  const MeasurementDataSet& data, DcnlpMode mode,
                                  const NewtonOptions& options, KktLinearSolver* workspace = nullptr);

}  // namespace ddcd
