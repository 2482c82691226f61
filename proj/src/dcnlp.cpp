#include "ddcd/dcnlp.hpp"

#include <limits>
#include <map>

namespace ddcd {

const char* to_string(DcnlpMode mode) {
  switch (mode) {
    case DcnlpMode::Shared:
      return "shared";
    case DcnlpMode::CoordinateDescent:
      return "coordinate_descent";
    case DcnlpMode::Exhaustive:
      return "exhaustive";
  }
  return "?";
}

DcnlpMode parse_dcnlp_mode(const std::string& name) {
  if (name == "shared") return DcnlpMode::Shared;
  if (name == "coordinate_descent") return DcnlpMode::CoordinateDescent;
  if (name == "exhaustive") return DcnlpMode::Exhaustive;
  throw InvalidInput("unknown DCNLP mode '" + name + "'");
}

namespace {

class Evaluator {
 public:
  Evaluator(const StepProblem& p, const PrimalDualState& init, const MeasurementDataSet& data,
            const NewtonOptions& opt, KktLinearSolver* ws)
      : p_(p), init_(init), data_(data), opt_(opt), ws_(ws) {}

  // Cost of an assignment; +inf when the sub-solve fails. Results are cached.
  double cost(const std::vector<int>& assignment) {
    auto it = cache_.find(assignment);
    if (it != cache_.end()) return it->second;
    std::vector<DataPoint> pts;
    pts.reserve(assignment.size());
    for (int j : assignment) pts.push_back(data_.points[j]);
    const DataTarget target = DataTarget::per_element(pts);
    ++best_.subproblems;
    double c = std::numeric_limits<double>::infinity();
    try {
      NewtonResult r = newton_solve(p_, init_, target, opt_, ws_);
      c = step_cost(p_, r.state.e, r.state.s, target.strain, target.stress);
      if (c < best_.cost || (c == best_.cost && assignment < best_.assignment)) {
        best_.cost = c;
        best_.assignment = assignment;
        best_.state = std::move(r.state);
        best_.report = std::move(r.report);
      }
    } catch (const SolverError&) {
      ++best_.failures;
    }
    cache_.emplace(assignment, c);
    return c;
  }

  DcnlpResult finish() {
    if (best_.assignment.empty()) {
      throw SolverError("all " + std::to_string(best_.subproblems) + " DCNLP sub-solves failed", 0, {});
    }
    return std::move(best_);
  }

 private:
  const StepProblem& p_;
  const PrimalDualState& init_;
  const MeasurementDataSet& data_;
  const NewtonOptions& opt_;
  KktLinearSolver* ws_;
  std::map<std::vector<int>, double> cache_;
  DcnlpResult best_{{}, {}, std::numeric_limits<double>::infinity(), {}, 0, 0};
};

// Weighted distance of a data point to the element's current (e, s).
double point_distance(const StepProblem& p, const PrimalDualState& st, int k, const DataPoint& d) {
  const Vec6 de = st.e.segment<6>(6 * k) - d.strain;
  const Vec6 ds = st.s.segment<6>(6 * k) - d.stress;
  return de.dot(p.weights().weight[k] * de) + ds.dot(p.weights().inverse[k] * ds);
}

}  // namespace

DcnlpResult solve_dcnlp_enumerate(const StepProblem& problem, const PrimalDualState& initial,
                                  const MeasurementDataSet& data, DcnlpMode mode,
                                  const NewtonOptions& options, KktLinearSolver* workspace) {
  if (data.empty()) throw InvalidInput("DCNLP needs a non-empty data set");
  for (const DataPoint& d : data.points) {
    if (!d.strain.allFinite() || !d.stress.allFinite()) throw InvalidInput("data set has non-finite points");
  }
  const int ne = problem.mesh().element_count();
  const int nd = static_cast<int>(data.size());
  Evaluator eval(problem, initial, data, options, workspace);

  switch (mode) {
    case DcnlpMode::Shared:
      for (int j = 0; j < nd; ++j) eval.cost(std::vector<int>(ne, j));
      break;

    case DcnlpMode::Exhaustive: {
      if (ne > kExhaustiveMaxElements || nd > kExhaustiveMaxPoints) {
        throw InvalidInput("exhaustive DCNLP is limited to " + std::to_string(kExhaustiveMaxElements) +
                           " elements and " + std::to_string(kExhaustiveMaxPoints) + " data points");
      }
      std::vector<int> a(ne, 0);
      for (;;) {
        eval.cost(a);
        int k = ne - 1;
        while (k >= 0 && ++a[k] == nd) a[k--] = 0;
        if (k < 0) break;
      }
      break;
    }

    case DcnlpMode::CoordinateDescent: {
      std::vector<int> a(ne, 0);
      for (int k = 0; k < ne; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < nd; ++j) {
          const double d = point_distance(problem, initial, k, data.points[j]);
          if (d < best) {
            best = d;
            a[k] = j;
          }
        }
      }
      double current = eval.cost(a);
      bool improved = true;
      while (improved) {
        improved = false;
        for (int k = 0; k < ne; ++k) {
          std::vector<int> trial = a;
          int best_j = a[k];
          double best_c = current;
          for (int j = 0; j < nd; ++j) {
            if (j == a[k]) continue;
            trial[k] = j;
            const double c = eval.cost(trial);
            if (c < best_c) {
              best_c = c;
              best_j = j;
            }
          }
          if (best_j != a[k]) {
            a[k] = best_j;
            current = best_c;
            improved = true;
          }
        }
      }
      break;
    }
  }
  return eval.finish();
}

}  // namespace ddcd
