#include "ddcd/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace ddcd {

TimeGrid TimeGrid::make(double t_start, double t_end, double dt) {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !std::isfinite(dt)) {
    throw InvalidInput("time grid values must be finite");
  }
  if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
  if (!(t_end > t_start)) throw InvalidInput("end time must exceed start time");
  const double n = (t_end - t_start) / dt;
  if (std::abs(n - std::round(n)) > 1e-12 * std::max(1.0, n)) {
    throw InvalidInput("time interval is not an integral number of steps");
  }
  return TimeGrid{t_start, t_end, dt};
}

int TimeGrid::steps() const { return static_cast<int>(std::lround((t_end - t_start) / dt)); }

MaterialModel MaterialModel::manifold(ConstitutiveLaw law) {
  law.validate();
  MaterialModel m;
  m.kind = Kind::Manifold;
  m.law = std::move(law);
  return m;
}

MaterialModel MaterialModel::data_set(MeasurementDataSet data, DcnlpMode mode) {
  if (data.empty()) throw InvalidInput("data-set material needs at least one point");
  MaterialModel m;
  m.kind = Kind::DataSet;
  m.data = std::move(data);
  m.mode = mode;
  return m;
}

DiscreteMomenta discrete_momenta(const BeamMesh& mesh, const SpMat& mass, const VecX& q_i,
                                 const VecX& q_next, const VecX& stress, double dt) {
  const VecX inertial = mass * (q_next - q_i) / dt;
  const VecX internal = 0.5 * dt * beam::internal_force(mesh, 0.5 * (q_i + q_next), stress);
  return {inertial + internal, inertial - internal};
}

Vec3 linear_momentum(const VecX& p) {
  Vec3 l = Vec3::Zero();
  for (Eigen::Index a = 0; a < p.size() / kNodeDofs; ++a) l += p.segment<3>(kNodeDofs * a);
  return l;
}

Vec3 angular_momentum(const VecX& q, const VecX& p) {
  if (q.size() != p.size()) throw InvalidInput("configuration and momentum lengths differ");
  Vec3 j = Vec3::Zero();
  for (Eigen::Index i = 0; i < q.size(); i += 3) {
    j += Vec3(q.segment<3>(i)).cross(Vec3(p.segment<3>(i)));
  }
  return j;
}

double mirror_symmetry_defect(const VecX& q, double radius) {
  const Configuration c(q);
  const int n = c.node_count();
  Mat3 P;
  P << 0, -1, 0, -1, 0, 0, 0, 0, 1;
  const Vec3 shift(radius, radius, 0.0);
  double defect = 0.0;
  for (int a = 0; a < n; ++a) {
    const NodeState x = c.node(a);
    const NodeState y = c.node(n - 1 - a);
    defect = std::max(defect, (y.position - (shift + P * x.position)).lpNorm<Eigen::Infinity>());
    defect = std::max(defect, (y.d1 - P * x.d1).lpNorm<Eigen::Infinity>());
    defect = std::max(defect, (y.d2 - P * x.d2).lpNorm<Eigen::Infinity>());
    defect = std::max(defect, (y.d3 + P * x.d3).lpNorm<Eigen::Infinity>());
  }
  return defect;
}

Integrator::Integrator(const BeamMesh& mesh, LoadCase loads, ElementWeights weights, TimeGrid grid,
                       MaterialModel material, NewtonOptions newton, double constraint_tolerance)
    : mesh_(&mesh),
      mass_(beam::mass_matrix(mesh)),
      loads_(std::move(loads)),
      weights_(std::move(weights)),
      grid_(grid),
      material_(std::move(material)),
      newton_(newton),
      constraint_tolerance_(constraint_tolerance),
      workspace_(newton.backend) {
  for (const NodalForce& f : loads_.forces) {
    if (f.node < 0 || f.node >= mesh.node_count()) throw InvalidInput("load applied to a missing node");
  }
  if (weights_.element_count() != mesh.element_count()) {
    throw InvalidInput("weight matrix must have one block per element");
  }
  const VecX& q0 = mesh.reference().flat();
  const double g = beam::constraint_norm(q0);
  if (!(g <= constraint_tolerance_)) {
    std::ostringstream msg;
    msg << "reference configuration violates the director constraints (|g| = " << g << ")";
    throw InvalidInput(msg.str());
  }
  const Formulation f =
      material_.kind == MaterialModel::Kind::Manifold ? Formulation::Approximate : Formulation::Fix;
  state_ = PrimalDualState::at_rest(mesh, q0, f);
  q_prev_ = q0;
  stress_prev_ = VecX::Zero(mesh.strain_dofs());
  current_.index = 0;
  current_.time = grid_.time(0);
  current_.q = q0;
  current_.strain = VecX::Zero(mesh.strain_dofs());
  current_.stress = VecX::Zero(mesh.strain_dofs());
  current_.constraint_norm = g;
}

const StepRecord& Integrator::advance() {
  if (finished()) throw InvalidInput("integrator has reached the end of the time grid");
  const BeamMesh& mesh = *mesh_;
  const int k = current_.index;
  const double t = grid_.time(k);
  const double dt = grid_.dt;
  const int nn = mesh.node_count();
  const VecX& q_curr = current_.q;

  StepProblem problem(mesh, mass_, q_prev_, q_curr, stress_prev_, loads_.at(t - 0.5 * dt, nn),
                      loads_.at(t + 0.5 * dt, nn), dt, weights_);
  PrimalDualState guess = state_;
  guess.q = 2.0 * q_curr - q_prev_;

  StepRecord rec;
  try {
    if (material_.kind == MaterialModel::Kind::Manifold) {
      NewtonResult r = newton_solve(problem, guess, material_.law, newton_, &workspace_);
      state_ = std::move(r.state);
      rec.newton = std::move(r.report);
      rec.cost = step_cost(problem, state_.e, state_.s, state_.e_check, state_.s_check);
    } else {
      DcnlpResult r = solve_dcnlp_enumerate(problem, guess, material_.data, material_.mode, newton_, &workspace_);
      state_ = std::move(r.state);
      rec.newton = std::move(r.report);
      rec.assignment = std::move(r.assignment);
      rec.cost = r.cost;
    }
  } catch (const SolverError& e) {
    std::ostringstream msg;
    msg << "step " << k + 1 << " (t = " << grid_.time(k + 1) << "): " << e.what();
    throw SolverError(msg.str(), e.iteration(), e.residual_history());
  }

  const DiscreteMomenta p = discrete_momenta(mesh, mass_, q_curr, state_.q, state_.s, dt);
  rec.index = k + 1;
  rec.time = grid_.time(k + 1);
  rec.q = state_.q;
  rec.strain = state_.e;
  rec.stress = state_.s;
  rec.linear_momentum = linear_momentum(p.minus);
  rec.angular_momentum_minus = angular_momentum(q_curr, p.minus);
  rec.angular_momentum_plus = angular_momentum(state_.q, p.plus);
  rec.constraint_norm = beam::constraint_norm(state_.q);

  q_prev_ = q_curr;
  stress_prev_ = state_.s;
  current_ = std::move(rec);
  return current_;
}

Trajectory run(Integrator& integrator, const std::function<void(const StepRecord&)>& on_record) {
  Trajectory traj;
  traj.records.push_back(integrator.current());
  if (on_record) on_record(traj.records.back());
  while (!integrator.finished()) {
    try {
      traj.records.push_back(integrator.advance());
    } catch (const SolverError& e) {
      const int step = integrator.current().index + 1;
      traj.failure = StepFailure{step, integrator.grid().time(step), e.what(), e.residual_history()};
      break;
    }
    if (on_record) on_record(traj.records.back());
  }
  return traj;
}

}  // namespace ddcd
