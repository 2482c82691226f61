#include "ddcd/step_solver.hpp"

#include <cmath>

namespace ddcd {

ElementWeights ElementWeights::uniform(int elements, const Mat6& block) {
  if (!block.isApprox(block.transpose(), 1e-14)) throw InvalidInput("weight matrix is not symmetric");
  Eigen::LLT<Mat6> llt(block);
  if (llt.info() != Eigen::Success) throw InvalidInput("weight matrix is not positive definite");
  ElementWeights w;
  w.weight.assign(elements, block);
  w.inverse.assign(elements, llt.solve(Mat6::Identity()));
  return w;
}

StepProblem::StepProblem(const BeamMesh& mesh, const SpMat& mass, VecX q_prev, VecX q_curr,
                         VecX stress_prev, VecX load_prev, VecX load_next, double dt,
                         ElementWeights weights)
    : mesh_(&mesh),
      mass_(&mass),
      q_prev_(std::move(q_prev)),
      q_curr_(std::move(q_curr)),
      stress_prev_(std::move(stress_prev)),
      load_prev_(std::move(load_prev)),
      load_next_(std::move(load_next)),
      dt_(dt),
      weights_(std::move(weights)) {
  const int nq = mesh.dofs();
  if (q_prev_.size() != nq || q_curr_.size() != nq || load_prev_.size() != nq ||
      load_next_.size() != nq || stress_prev_.size() != mesh.strain_dofs() ||
      mass.rows() != nq || mass.cols() != nq) {
    throw InvalidInput("step problem dimensions do not match the mesh");
  }
  if (weights_.element_count() != mesh.element_count() ||
      static_cast<int>(weights_.inverse.size()) != mesh.element_count()) {
    throw InvalidInput("weight matrix must have one block per element");
  }
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw InvalidInput("time step must be positive");
  nullspace_ = beam::nullspace_basis(q_curr_);
  const VecX q_mid_prev = 0.5 * (q_prev_ + q_curr_);
  known_force_ = 0.5 * dt_ * (beam::internal_force(mesh, q_mid_prev, stress_prev_) - load_prev_ - load_next_);
}

PrimalDualState PrimalDualState::at_rest(const BeamMesh& mesh, const VecX& q, Formulation formulation) {
  PrimalDualState s;
  const int ne = mesh.strain_dofs();
  s.q = q;
  s.e = VecX::Zero(ne);
  s.s = VecX::Zero(ne);
  s.lambda = VecX::Zero(ne);
  s.mu = VecX::Zero(mesh.reduced_dofs());
  s.nu = VecX::Zero(mesh.constraint_count());
  if (formulation == Formulation::Approximate) {
    s.e_check = VecX::Zero(ne);
    s.s_check = VecX::Zero(ne);
    s.xi = VecX::Zero(ne);
  }
  return s;
}

int PrimalDualState::size(Formulation formulation) const {
  const auto fix = q.size() + 3 * e.size() + mu.size() + nu.size();
  return static_cast<int>(formulation == Formulation::Fix ? fix : fix + 3 * e.size());
}

VecX PrimalDualState::pack(Formulation formulation) const {
  VecX x(size(formulation));
  if (formulation == Formulation::Fix) {
    x << q, e, s, lambda, mu, nu;
  } else {
    if (e_check.size() != e.size() || s_check.size() != e.size() || xi.size() != e.size()) {
      throw InvalidInput("state lacks the manifold unknowns of the approximate problem");
    }
    x << e_check, s_check, q, e, s, lambda, mu, nu, xi;
  }
  return x;
}

void PrimalDualState::unpack(const VecX& x, Formulation formulation) {
  if (x.size() != size(formulation)) throw InvalidInput("packed state has the wrong length");
  Eigen::Index o = 0;
  auto take = [&](VecX& v, Eigen::Index n) {
    v = x.segment(o, n);
    o += n;
  };
  const auto ne = e.size();
  if (formulation == Formulation::Approximate) {
    take(e_check, ne);
    take(s_check, ne);
  }
  take(q, q.size());
  take(e, ne);
  take(s, ne);
  take(lambda, ne);
  take(mu, mu.size());
  take(nu, nu.size());
  if (formulation == Formulation::Approximate) take(xi, ne);
}

DataTarget DataTarget::shared(const DataPoint& point, int elements) {
  DataTarget t{VecX(6 * elements), VecX(6 * elements)};
  for (int k = 0; k < elements; ++k) {
    t.strain.segment<6>(6 * k) = point.strain;
    t.stress.segment<6>(6 * k) = point.stress;
  }
  return t;
}

DataTarget DataTarget::per_element(const std::vector<DataPoint>& points) {
  const int n = static_cast<int>(points.size());
  DataTarget t{VecX(6 * n), VecX(6 * n)};
  for (int k = 0; k < n; ++k) {
    t.strain.segment<6>(6 * k) = points[k].strain;
    t.stress.segment<6>(6 * k) = points[k].stress;
  }
  return t;
}

namespace {

// Offsets of the unknown blocks inside the packed KKT vector.
struct Layout {
  int nq, ne, nr, nc;
  int e_check = 0, s_check = 0, q, e, s, lambda, mu, nu, xi = 0, total;

  Layout(const BeamMesh& mesh, Formulation f)
      : nq(mesh.dofs()), ne(mesh.strain_dofs()), nr(mesh.reduced_dofs()), nc(mesh.constraint_count()) {
    int o = 0;
    if (f == Formulation::Approximate) {
      e_check = o;
      o += ne;
      s_check = o;
      o += ne;
    }
    q = o;
    o += nq;
    e = o;
    o += ne;
    s = o;
    o += ne;
    lambda = o;
    o += ne;
    mu = o;
    o += nr;
    nu = o;
    o += nc;
    if (f == Formulation::Approximate) {
      xi = o;
      o += ne;
    }
    total = o;
  }
};

void check_state(const StepProblem& p, const PrimalDualState& st, Formulation f) {
  const BeamMesh& m = p.mesh();
  const auto ne = m.strain_dofs();
  bool ok = st.q.size() == m.dofs() && st.e.size() == ne && st.s.size() == ne &&
            st.lambda.size() == ne && st.mu.size() == m.reduced_dofs() &&
            st.nu.size() == m.constraint_count();
  if (f == Formulation::Approximate) {
    ok = ok && st.e_check.size() == ne && st.s_check.size() == ne && st.xi.size() == ne;
  }
  if (!ok) throw InvalidInput("primal-dual state dimensions do not match the mesh");
}

template <typename Block>
void add_block(std::vector<Triplet>& trip, int row, int col, const Block& block) {
  for (Eigen::Index i = 0; i < block.rows(); ++i)
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      trip.emplace_back(row + static_cast<int>(i), col + static_cast<int>(j), block(i, j));
}

template <typename Block>
void add_symmetric_pair(std::vector<Triplet>& trip, int row, int col, const Block& block) {
  add_block(trip, row, col, block);
  add_block(trip, col, row, block.transpose());
}

void add_sparse(std::vector<Triplet>& trip, int row, int col, const SpMat& m, bool transpose) {
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      const int r = static_cast<int>(transpose ? it.col() : it.row());
      const int c = static_cast<int>(transpose ? it.row() : it.col());
      trip.emplace_back(row + r, col + c, it.value());
    }
  }
}

// M/dt + dt/4 U2(L s), the q-derivative of the unprojected balance force.
SpMat balance_stiffness(const StepProblem& p, const VecX& s_next) {
  const BeamMesh& mesh = p.mesh();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.element_count()) * 576 + p.mass().nonZeros());
  const double dt = p.dt();
  add_sparse(trip, 0, 0, p.mass() / dt, false);
  for (int k = 0; k < mesh.element_count(); ++k) {
    const Element& el = mesh.elements()[k];
    const Mat24 U = (0.25 * dt * el.length) * beam::strain_hessian_T(s_next.segment<6>(6 * k), el.length);
    const int nodes[2] = {el.first, el.second};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        add_block(trip, 12 * nodes[a], 12 * nodes[b], U.block<12, 12>(12 * a, 12 * b));
  }
  SpMat K(mesh.dofs(), mesh.dofs());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

Eigen::Matrix<double, 24, 12> element_nullspace(const VecX& q, const Element& el) {
  Eigen::Matrix<double, 24, 12> Ne = Eigen::Matrix<double, 24, 12>::Zero();
  Ne.block<12, 6>(0, 0) = beam::nullspace_basis(NodeState::from_flat(q.segment<12>(12 * el.first)));
  Ne.block<12, 6>(12, 6) = beam::nullspace_basis(NodeState::from_flat(q.segment<12>(12 * el.second)));
  return Ne;
}

// Residual blocks shared by both formulations, written into r at layout L.
void fix_residual(const StepProblem& p, const PrimalDualState& st, const VecX& strain_target,
                  const VecX& stress_target, const Layout& L, VecX& r) {
  const BeamMesh& mesh = p.mesh();
  const double dt = p.dt();
  const VecX q_mid = 0.5 * (p.q_curr() + st.q);
  const VecX n_mu = p.nullspace() * st.mu;

  VecX r_q = p.mass() * n_mu / dt;
  for (int k = 0; k < mesh.element_count(); ++k) {
    const Element& el = mesh.elements()[k];
    const Vec24 qe = beam::gather(q_mid, el);
    const Mat6x24 B = beam::strain_jacobian(qe, el.length);
    const Vec6 lam = st.lambda.segment<6>(6 * k);
    const Vec6 sk = st.s.segment<6>(6 * k);
    const Vec24 ame = beam::gather(n_mu, el);
    const Vec24 contrib = -0.5 * B.transpose() * lam +
                          (0.25 * dt * el.length) * (beam::strain_hessian_T(sk, el.length) * ame);
    r_q.segment<12>(12 * el.first) += contrib.head<12>();
    r_q.segment<12>(12 * el.second) += contrib.tail<12>();

    const Vec6 de = st.e.segment<6>(6 * k) - strain_target.segment<6>(6 * k);
    const Vec6 ds = sk - stress_target.segment<6>(6 * k);
    r.segment<6>(L.e + 6 * k) = el.length * (p.weights().weight[k] * de) + lam;
    r.segment<6>(L.s + 6 * k) = el.length * (p.weights().inverse[k] * ds) + (0.5 * dt * el.length) * (B * ame);
    r.segment<6>(L.lambda + 6 * k) = st.e.segment<6>(6 * k) - beam::strain(qe, el);
  }
  for (int a = 0; a < mesh.node_count(); ++a) {
    const NodeState node = NodeState::from_flat(st.q.segment<12>(12 * a));
    r_q.segment<12>(12 * a) += beam::constraint_jacobian(node).transpose() * st.nu.segment<6>(6 * a);
    r.segment<6>(L.nu + 6 * a) = beam::constraints(node);
  }
  r.segment(L.q, L.nq) = r_q;
  r.segment(L.mu, L.nr) = reduced_balance_residual(p, st.q, st.s);
}

void fix_matrix(const StepProblem& p, const PrimalDualState& st, const Layout& L,
                std::vector<Triplet>& trip) {
  const BeamMesh& mesh = p.mesh();
  const double dt = p.dt();
  const VecX q_mid = 0.5 * (p.q_curr() + st.q);
  const VecX n_mu = p.nullspace() * st.mu;
  const Mat6 I6 = Mat6::Identity();

  for (int k = 0; k < mesh.element_count(); ++k) {
    const Element& el = mesh.elements()[k];
    const int nodes[2] = {el.first, el.second};
    const Vec24 qe = beam::gather(q_mid, el);
    const Mat6x24 B = beam::strain_jacobian(qe, el.length);
    const Mat24 U2 = -0.25 * beam::strain_hessian_T(st.lambda.segment<6>(6 * k), el.length);
    const Mat6x24 U1 = (0.25 * dt * el.length) * beam::strain_hessian(beam::gather(n_mu, el), el.length);
    const Eigen::Matrix<double, 6, 12> BN = (0.5 * dt * el.length) * B * element_nullspace(p.q_curr(), el);
    const int ek = 6 * k;
    for (int a = 0; a < 2; ++a) {
      const int qa = L.q + 12 * nodes[a];
      for (int b = 0; b < 2; ++b) add_block(trip, qa, L.q + 12 * nodes[b], U2.block<12, 12>(12 * a, 12 * b));
      add_symmetric_pair(trip, L.s + ek, qa, U1.block<6, 12>(0, 12 * a));
      add_symmetric_pair(trip, L.lambda + ek, qa, -0.5 * B.block<6, 12>(0, 12 * a));
      add_symmetric_pair(trip, L.s + ek, L.mu + 6 * nodes[a], BN.block<6, 6>(0, 6 * a));
    }
    add_block(trip, L.e + ek, L.e + ek, el.length * p.weights().weight[k]);
    add_block(trip, L.s + ek, L.s + ek, el.length * p.weights().inverse[k]);
    add_symmetric_pair(trip, L.lambda + ek, L.e + ek, I6);
  }
  for (int a = 0; a < mesh.node_count(); ++a) {
    const NodeState node = NodeState::from_flat(st.q.segment<12>(12 * a));
    const int qa = L.q + 12 * a;
    add_block(trip, qa, qa, beam::constraint_curvature(st.nu.segment<6>(6 * a)));
    add_symmetric_pair(trip, L.nu + 6 * a, qa, beam::constraint_jacobian(node));
  }
  const SpMat F = balance_jacobian_F(p, st.s);
  add_sparse(trip, L.mu, L.q, F, false);
  add_sparse(trip, L.q, L.mu, F, true);
}

SpMat finish(const std::vector<Triplet>& trip, int n) {
  SpMat S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  S.makeCompressed();
  return S;
}

}  // namespace

VecX reduced_balance_residual(const StepProblem& p, const VecX& q_next, const VecX& s_next) {
  if (q_next.size() != p.mesh().dofs() || s_next.size() != p.mesh().strain_dofs()) {
    throw InvalidInput("balance residual arguments do not match the mesh");
  }
  // Second difference taken on increments to limit cancellation.
  const VecX accel = (q_next - p.q_curr()) - (p.q_curr() - p.q_prev());
  const VecX q_mid = 0.5 * (p.q_curr() + q_next);
  const VecX force = p.mass() * accel / p.dt() + p.known_force() +
                     0.5 * p.dt() * beam::internal_force(p.mesh(), q_mid, s_next);
  return p.nullspace().transpose() * force;
}

SpMat balance_jacobian_F(const StepProblem& p, const VecX& s_next) {
  if (s_next.size() != p.mesh().strain_dofs()) throw InvalidInput("stress stack has the wrong length");
  SpMat F = p.nullspace().transpose() * balance_stiffness(p, s_next);
  F.makeCompressed();
  return F;
}

VecX kkt_residual_fix(const StepProblem& p, const PrimalDualState& st, const DataTarget& target) {
  check_state(p, st, Formulation::Fix);
  if (target.strain.size() != p.mesh().strain_dofs() || target.stress.size() != p.mesh().strain_dofs()) {
    throw InvalidInput("data target does not match the mesh");
  }
  const Layout L(p.mesh(), Formulation::Fix);
  VecX r(L.total);
  fix_residual(p, st, target.strain, target.stress, L, r);
  return r;
}

SpMat kkt_matrix_fix(const StepProblem& p, const PrimalDualState& st) {
  check_state(p, st, Formulation::Fix);
  const Layout L(p.mesh(), Formulation::Fix);
  std::vector<Triplet> trip;
  trip.reserve(40000);
  fix_matrix(p, st, L, trip);
  return finish(trip, L.total);
}

VecX kkt_residual_approx(const StepProblem& p, const PrimalDualState& st, const ConstitutiveLaw& law) {
  check_state(p, st, Formulation::Approximate);
  const Layout L(p.mesh(), Formulation::Approximate);
  VecX r(L.total);
  fix_residual(p, st, st.e_check, st.s_check, L, r);
  for (int k = 0; k < p.mesh().element_count(); ++k) {
    const double w = p.mesh().elements()[k].length;
    const Vec6 ec = st.e_check.segment<6>(6 * k);
    const Vec6 sc = st.s_check.segment<6>(6 * k);
    const Vec6 xi = st.xi.segment<6>(6 * k);
    const ManifoldDerivatives d = residual_h_derivatives(law, ec, sc);
    r.segment<6>(L.e_check + 6 * k) =
        w * (p.weights().weight[k] * (ec - st.e.segment<6>(6 * k))) + d.d_strain.transpose() * xi;
    r.segment<6>(L.s_check + 6 * k) =
        w * (p.weights().inverse[k] * (sc - st.s.segment<6>(6 * k))) + d.d_stress.transpose() * xi;
    r.segment<6>(L.xi + 6 * k) = residual_h(law, ec, sc);
  }
  return r;
}

SpMat kkt_matrix_approx(const StepProblem& p, const PrimalDualState& st, const ConstitutiveLaw& law) {
  check_state(p, st, Formulation::Approximate);
  const Layout L(p.mesh(), Formulation::Approximate);
  std::vector<Triplet> trip;
  trip.reserve(50000);
  fix_matrix(p, st, L, trip);
  for (int k = 0; k < p.mesh().element_count(); ++k) {
    const double w = p.mesh().elements()[k].length;
    const int ek = 6 * k;
    const Mat6 Cw = w * p.weights().weight[k];
    const Mat6 Ciw = w * p.weights().inverse[k];
    const ManifoldDerivatives d =
        residual_h_derivatives(law, st.e_check.segment<6>(ek), st.s_check.segment<6>(ek));
    const ManifoldCurvature c = residual_h_curvature(law, st.xi.segment<6>(ek));
    add_block(trip, L.e_check + ek, L.e_check + ek, Cw + c.strain_strain);
    add_block(trip, L.s_check + ek, L.s_check + ek, Ciw + c.stress_stress);
    add_symmetric_pair(trip, L.s_check + ek, L.e_check + ek, c.stress_strain);
    add_symmetric_pair(trip, L.e + ek, L.e_check + ek, -Cw);
    add_symmetric_pair(trip, L.s + ek, L.s_check + ek, -Ciw);
    add_symmetric_pair(trip, L.xi + ek, L.e_check + ek, d.d_strain);
    add_symmetric_pair(trip, L.xi + ek, L.s_check + ek, d.d_stress);
  }
  return finish(trip, L.total);
}

double step_cost(const StepProblem& p, const VecX& e, const VecX& s, const VecX& strain_target,
                 const VecX& stress_target) {
  double cost = 0.0;
  for (int k = 0; k < p.mesh().element_count(); ++k) {
    const double w = p.mesh().elements()[k].length;
    const Vec6 de = e.segment<6>(6 * k) - strain_target.segment<6>(6 * k);
    const Vec6 ds = s.segment<6>(6 * k) - stress_target.segment<6>(6 * k);
    cost += 0.5 * w * (de.dot(p.weights().weight[k] * de) + ds.dot(p.weights().inverse[k] * ds));
  }
  return cost;
}

namespace {

template <typename ResidualFn, typename MatrixFn>
NewtonResult run_newton(const PrimalDualState& initial, Formulation f, const NewtonOptions& options,
                        KktLinearSolver* workspace, ResidualFn residual, MatrixFn matrix) {
  if (!(options.tolerance > 0.0) || options.max_iterations < 0) {
    throw InvalidInput("newton options need a positive tolerance and non-negative iteration cap");
  }
  KktLinearSolver local(options.backend);
  KktLinearSolver& solver =
      (workspace != nullptr && workspace->backend() == options.backend) ? *workspace : local;

  NewtonResult out{initial, {}};
  VecX x = initial.pack(f);
  if (!x.allFinite()) throw SolverError("initial state is not finite", 0, {});
  VecX r = residual(out.state);
  double norm = r.lpNorm<Eigen::Infinity>();
  out.report.initial_residual = norm;
  out.report.history.push_back(norm);
  const double threshold = options.tolerance * (1.0 + norm);

  VecX dx;
  int it = 0;
  while (!(norm <= threshold)) {
    if (!std::isfinite(norm)) {
      throw SolverError("KKT residual became non-finite at iteration " + std::to_string(it), it,
                        out.report.history);
    }
    if (it == options.max_iterations) {
      throw SolverError("Newton iteration did not converge within " + std::to_string(it) +
                            " iterations (residual " + std::to_string(norm) + ")",
                        it, out.report.history);
    }
    ++it;
    if (!solver.factorize(matrix(out.state))) {
      throw SolverError("singular KKT matrix at iteration " + std::to_string(it), it, out.report.history);
    }
    if (!solver.solve(-r, dx)) {
      throw SolverError("singular KKT matrix at iteration " + std::to_string(it), it, out.report.history);
    }
    x += dx;
    out.state.unpack(x, f);
    r = residual(out.state);
    norm = r.lpNorm<Eigen::Infinity>();
    out.report.history.push_back(norm);
  }
  out.report.iterations = it;
  out.report.final_residual = norm;
  return out;
}

}  // namespace

NewtonResult newton_solve(const StepProblem& problem, const PrimalDualState& initial,
                          const DataTarget& target, const NewtonOptions& options,
                          KktLinearSolver* workspace) {
  return run_newton(
      initial, Formulation::Fix, options, workspace,
      [&](const PrimalDualState& s) { return kkt_residual_fix(problem, s, target); },
      [&](const PrimalDualState& s) { return kkt_matrix_fix(problem, s); });
}

NewtonResult newton_solve(const StepProblem& problem, const PrimalDualState& initial,
                          const ConstitutiveLaw& law, const NewtonOptions& options,
                          KktLinearSolver* workspace) {
  return run_newton(
      initial, Formulation::Approximate, options, workspace,
      [&](const PrimalDualState& s) { return kkt_residual_approx(problem, s, law); },
      [&](const PrimalDualState& s) { return kkt_matrix_approx(problem, s, law); });
}

}  // namespace ddcd
