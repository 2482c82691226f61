#pragma once

// One time step of the data-driven integrator posed as an equality
// constrained optimization problem and solved by full-space Newton on its
// KKT conditions.
//
// Unknown ordering of the fixed-data problem (fixNLP):
//   x_fix = (q_{i+1}, e, s, lambda, mu, nu)
// and of the approximate problem on a constitutive manifold:
//   x_one = (e_check, s_check, x_fix, xi)
//
// Element quantities are weighted by the element length L_e (one-point
// quadrature): the weight matrix blocks become L_e C and L_e C^-1 and the
// internal force is sum_e L_e B_e^T s_e.

#include <optional>
#include <vector>

#include "ddcd/beam.hpp"
#include "ddcd/constitutive.hpp"
#include "ddcd/kkt_linear_solver.hpp"

namespace ddcd {

/// Block-diagonal weight matrix C (6x6 per element) and its inverse.
struct ElementWeights {
  std::vector<Mat6> weight;
  std::vector<Mat6> inverse;

  /// Same SPD block for every element; throws InvalidInput if not SPD.
  static ElementWeights uniform(int elements, const Mat6& block);
  int element_count() const { return static_cast<int>(weight.size()); }
};

/// Frozen data of one step: q_{i-1}, q_i, s_{i-1/2}, f_{i-1/2}, f_{i+1/2}.
/// Holds references to the mesh and mass matrix, which must outlive it.
class StepProblem {
 public:
  StepProblem(const BeamMesh& mesh, const SpMat& mass, VecX q_prev, VecX q_curr, VecX stress_prev,
              VecX load_prev, VecX load_next, double dt, ElementWeights weights);

  const BeamMesh& mesh() const { return *mesh_; }
  const SpMat& mass() const { return *mass_; }
  const VecX& q_prev() const { return q_prev_; }
  const VecX& q_curr() const { return q_curr_; }
  const VecX& stress_prev() const { return stress_prev_; }
  const VecX& load_prev() const { return load_prev_; }
  const VecX& load_next() const { return load_next_; }
  double dt() const { return dt_; }
  const ElementWeights& weights() const { return weights_; }

  /// N(q_i), 12n x 6n.
  const SpMat& nullspace() const { return nullspace_; }
  /// Non-inertial terms of the balance residual that do not depend on the
  /// unknowns, before projection:
  /// dt/2 (sum_e L_e B_e(q_{i-1/2})^T s_{i-1/2} - f_{i-1/2} - f_{i+1/2}).
  const VecX& known_force() const { return known_force_; }

 private:
  const BeamMesh* mesh_;
  const SpMat* mass_;
  VecX q_prev_, q_curr_, stress_prev_, load_prev_, load_next_;
  double dt_;
  ElementWeights weights_;
  SpMat nullspace_;
  VecX known_force_;
};

enum class Formulation { Fix, Approximate };

struct PrimalDualState {
  VecX q;       // q_{i+1}
  VecX e;       // e_{i+1/2}
  VecX s;       // s_{i+1/2}
  VecX lambda;  // compatibility multipliers
  VecX mu;      // projected balance multipliers
  VecX nu;      // nodal constraint multipliers
  // Approximate problem only.
  VecX e_check;
  VecX s_check;
  VecX xi;

  /// All multipliers and element stacks zero, q = given configuration.
  static PrimalDualState at_rest(const BeamMesh& mesh, const VecX& q, Formulation formulation);

  int size(Formulation formulation) const;
  VecX pack(Formulation formulation) const;
  void unpack(const VecX& x, Formulation formulation);
};

/// Stacked data point (e~, s~) per element.
struct DataTarget {
  VecX strain;
  VecX stress;

  static DataTarget shared(const DataPoint& point, int elements);
  static DataTarget per_element(const std::vector<DataPoint>& points);
};

/// Null-space projected balance f(q_{i+1}, s_{i+1/2}); length 6n.
VecX reduced_balance_residual(const StepProblem& problem, const VecX& q_next, const VecX& s_next);

/// F = N(q_i)^T (M/dt + dt/4 U2(L s_{i+1/2})); 6n x 12n.
SpMat balance_jacobian_F(const StepProblem& problem, const VecX& s_next);

VecX kkt_residual_fix(const StepProblem& problem, const PrimalDualState& state,
                      const DataTarget& target);
SpMat kkt_matrix_fix(const StepProblem& problem, const PrimalDualState& state);

VecX kkt_residual_approx(const StepProblem& problem, const PrimalDualState& state,
                         const ConstitutiveLaw& law);
SpMat kkt_matrix_approx(const StepProblem& problem, const PrimalDualState& state,
                        const ConstitutiveLaw& law);

/// 1/2 |e - e~|^2_C + 1/2 |s - s~|^2_{C^-1}, each element weighted by L_e.
double step_cost(const StepProblem& problem, const VecX& e, const VecX& s, const VecX& strain_target,
                 const VecX& stress_target);

struct NewtonOptions {
  double tolerance = 1e-12;
  int max_iterations = 25;
  LinearBackend backend = LinearBackend::Sparse;
};

struct NewtonReport {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<double> history;  // inf-norm of the KKT residual per iterate
};

struct NewtonResult {
  PrimalDualState state;
  NewtonReport report;
};

/// Full Newton steps without globalization until
/// |r|_inf <= tolerance * (1 + |r_0|_inf). Throws SolverError on a singular
/// KKT matrix or when max_iterations is exceeded. `workspace` lets callers
/// reuse the symbolic factorization across solves.
NewtonResult newton_solve(const StepProblem& problem, const PrimalDualState& initial,
                          const DataTarget& target, const NewtonOptions& options,
                          KktLinearSolver* workspace = nullptr);
NewtonResult newton_solve(const StepProblem& problem, const PrimalDualState& initial,
                          const ConstitutiveLaw& law, const NewtonOptions& options,
                          KktLinearSolver* workspace = nullptr);

}  // namespace ddcd
