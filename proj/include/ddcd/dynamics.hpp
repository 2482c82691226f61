#pragma once

// Time marching of the data-driven integrator and its structure-preservation
// diagnostics (discrete momenta, constraint drift, mirror symmetry).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddcd/dcnlp.hpp"
#include "ddcd/step_solver.hpp"

namespace ddcd {

/// Equidistant grid t_i = t_start + i dt, i = 0..steps().
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.0;

  /// Throws InvalidInput unless dt > 0, t_end > t_start and the interval
  /// holds an integral number of steps.
  static TimeGrid make(double t_start, double t_end, double dt);
  int steps() const;
  double time(int i) const { return t_start + i * dt; }
};

/// Either a smooth constitutive manifold (approximate problem) or a raw data
/// set (exact problem by enumeration).
struct MaterialModel {
  enum class Kind { Manifold, DataSet };
  Kind kind = Kind::Manifold;
  ConstitutiveLaw law;
  MeasurementDataSet data;
  DcnlpMode mode = DcnlpMode::Shared;

  static MaterialModel manifold(ConstitutiveLaw law);
  static MaterialModel data_set(MeasurementDataSet data, DcnlpMode mode);
};

/// Record k holds q_k and the element stacks and momenta of the step
/// t_{k-1} -> t_k. Record 0 is the initial rest state.
struct StepRecord {
  int index = 0;
  double time = 0.0;
  VecX q;
  VecX strain;  // e_{k-1/2}
  VecX stress;  // s_{k-1/2}
  Vec3 linear_momentum = Vec3::Zero();         // l_d(q_{k-1}, q_k)
  Vec3 angular_momentum_minus = Vec3::Zero();  // J(q_{k-1}, p-_{k-1})
  Vec3 angular_momentum_plus = Vec3::Zero();   // J(q_k, p+_k)
  double constraint_norm = 0.0;                // |g(q_k)|_inf
  NewtonReport newton;
  std::vector<int> assignment;  // data indices per element (data-set material)
  double cost = 0.0;
};

struct StepFailure {
  int step = 0;  // index of the record that could not be computed
  double time = 0.0;
  std::string message;
  std::vector<double> residual_history;
};

struct Trajectory {
  std::vector<StepRecord> records;
  std::optional<StepFailure> failure;
};

struct DiscreteMomenta {
  VecX minus;  // p-_i
  VecX plus;   // p+_{i+1}
};

/// One-sided momenta of the step q_i -> q_{i+1} with stress s_{i+1/2}:
/// p-_i = M(q_{i+1} - q_i)/dt + dt/2 B(q_{i+1/2})^T s and
/// p+_{i+1} = M(q_{i+1} - q_i)/dt - dt/2 B(q_{i+1/2})^T s.
DiscreteMomenta discrete_momenta(const BeamMesh& mesh, const SpMat& mass, const VecX& q_i,
                                 const VecX& q_next, const VecX& stress, double dt);

/// Sum of the position blocks of a nodal momentum vector.
Vec3 linear_momentum(const VecX& p);
/// sum_a (phi_a x p_phi,a + sum_k d_k,a x p_dk,a).
Vec3 angular_momentum(const VecX& q, const VecX& p);

/// Largest deviation between node a and the image of node n-1-a under the
/// map (x, y, z) -> (R - y, R - x, z) of an arc with centre (R, 0, 0) in the
/// x-y plane. Directors d1, d2 map with the linear part of the reflection,
/// d3 with its negative.
double mirror_symmetry_defect(const VecX& q, double radius);

/// Marches one scenario. The constructor sets up the rest state
/// q_{-1} = q_0 = reference, s_{-1/2} = 0 and throws InvalidInput if the
/// reference violates the nodal constraints by more than constraint_tolerance.
class Integrator {
 public:
  Integrator(const BeamMesh& mesh, LoadCase loads, ElementWeights weights, TimeGrid grid,
             MaterialModel material, NewtonOptions newton, double constraint_tolerance = 1e-10);

  const BeamMesh& mesh() const { return *mesh_; }
  const SpMat& mass() const { return mass_; }
  const TimeGrid& grid() const { return grid_; }
  const StepRecord& current() const { return current_; }
  bool finished() const { return current_.index >= grid_.steps(); }

  /// Solves the next step. SolverError is rethrown with the step index and
  /// time in its message; the integrator state is unchanged in that case.
  const StepRecord& advance();

 private:
  const BeamMesh* mesh_;
  SpMat mass_;
  LoadCase loads_;
  ElementWeights weights_;
  TimeGrid grid_;
  MaterialModel material_;
  NewtonOptions newton_;
  double constraint_tolerance_;
  VecX q_prev_;
  VecX stress_prev_;
  PrimalDualState state_;
  KktLinearSolver workspace_;
  StepRecord current_;
};

/// Runs to the end of the grid, calling `on_record` for every record
/// (including record 0). A solver failure ends the run and is stored in the
/// returned trajectory together with the records computed so far.
Trajectory run(Integrator& integrator, const std::function<void(const StepRecord&)>& on_record = {});

}  // namespace ddcd
