#include "ddcd/self_check.hpp"

#include <functional>
#include <random>
#include <set>

#include <json.hpp>

#include "ddcd/step_solver.hpp"

namespace ddcd {

bool SelfCheckReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

int SelfCheckReport::family_count() const {
  std::set<std::string> f;
  for (const auto& c : checks) f.insert(c.family);
  return static_cast<int>(f.size());
}

std::vector<std::string> SelfCheckReport::failed_families() const {
  std::set<std::string> f;
  for (const auto& c : checks)
    if (!c.passed) f.insert(c.family);
  return {f.begin(), f.end()};
}

namespace {

using Fn = std::function<VecX(const VecX&)>;

MatX fd_jacobian(const Fn& f, const VecX& x, double h) {
  const VecX f0 = f(x);
  MatX J(f0.size(), x.size());
  VecX xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    const VecX fp = f(xp);
    xp[j] = x[j] - h;
    const VecX fm = f(xp);
    xp[j] = x[j];
    J.col(j) = (fp - fm) / (2.0 * h);
  }
  return J;
}

// max |A - B| / max(1, max |A|)
double scaled_error(const MatX& A, const MatX& B) {
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  return (A - B).cwiseAbs().maxCoeff() / scale;
}

double asymmetry(const MatX& A) { return (A - A.transpose()).cwiseAbs().maxCoeff(); }

class Checker {
 public:
  explicit Checker(const SelfCheckOptions& o) : opt_(o), rng_(o.seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  VecX random(Eigen::Index n, double amp = 1.0) {
    VecX v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = amp * uniform();
    return v;
  }
  Mat3 rotation() {
    const Vec3 axis = Vec3(uniform(), uniform(), uniform()).normalized();
    return Eigen::AngleAxisd(uniform(-3.0, 3.0), axis).toRotationMatrix();
  }
  NodeState random_triad_node() {
    const Mat3 R = rotation();
    return {random(3), R.col(0), R.col(1), R.col(2)};
  }

  void record(const std::string& family, const std::string& name, double error, double tol, int samples) {
    report.checks.push_back({family, name, error <= tol, error, tol, samples});
  }

  const SelfCheckOptions& opt_;
  std::mt19937_64 rng_;
  SelfCheckReport report;
};

Inertia test_inertia() {
  Inertia in;
  in.e00 = 10.0;
  in.e11 = 20.0;
  in.e22 = 20.0;
  in.e01 = 0.3;
  in.e02 = -0.2;
  in.e12 = 0.1;
  return in;
}

void check_beam(Checker& c) {
  const SelfCheckOptions& o = c.opt_;
  const int n = o.samples;
  const double h = o.step;
  const double tol = o.tolerance;
  const BeamMesh mesh = make_arc_mesh(0.7, 1.2, 1, test_inertia());
  const Element& el = mesh.elements()[0];
  const double L = el.length;

  double e_b = 0, e_lin = 0, e_mid = 0, e_u2 = 0, s_u2 = 0, e_u1 = 0, e_id = 0, e_frame = 0;
  for (int k = 0; k < n; ++k) {
    const Vec24 q = c.random(24);
    Mat6x24 B = beam::strain_jacobian(q, L);
    B.array() += o.strain_jacobian_perturbation;
    const MatX Bfd = fd_jacobian([&](const VecX& x) -> VecX { return beam::strain(x, el); }, q, h);
    e_b = std::max(e_b, scaled_error(B, Bfd));

    const Vec24 q2 = c.random(24);
    e_lin = std::max(e_lin, scaled_error(beam::strain_jacobian(2.0 * q, L), 2.0 * beam::strain_jacobian(q, L)));
    e_mid = std::max(e_mid, scaled_error(beam::strain_jacobian(0.5 * (q + q2), L),
                                         0.5 * (beam::strain_jacobian(q, L) + beam::strain_jacobian(q2, L))));

    const Vec6 s = c.random(6);
    const Mat24 U2 = beam::strain_hessian_T(s, L);
    const MatX U2fd = fd_jacobian(
        [&](const VecX& x) -> VecX { return beam::strain_jacobian(x, L).transpose() * s; }, q, h);
    e_u2 = std::max(e_u2, scaled_error(U2, U2fd));
    s_u2 = std::max(s_u2, asymmetry(U2));

    const Vec24 a = c.random(24);
    const Mat6x24 U1 = beam::strain_hessian(a, L);
    const MatX U1fd = fd_jacobian([&](const VecX& x) -> VecX { return beam::strain_jacobian(x, L) * a; }, q, h);
    e_u1 = std::max(e_u1, scaled_error(U1, U1fd));
    e_id = std::max(e_id, scaled_error(U1.transpose() * s, U2 * a));

    // Rotate the reference element and evaluate the rotated reference.
    const Mat3 R = c.rotation();
    Vec24 qr = beam::gather(mesh.reference().flat(), el);
    for (int b = 0; b < 8; ++b) qr.segment<3>(3 * b) = R * qr.segment<3>(3 * b);
    e_frame = std::max(e_frame, beam::strain(qr, el).lpNorm<Eigen::Infinity>());
  }
  c.record("strain_jacobian", "B matches central differences of the strain", e_b, tol, n);
  c.record("strain_linearity", "B(2q) = 2 B(q)", e_lin, 1e-12, n);
  c.record("strain_linearity", "B at the midpoint is the mean of B", e_mid, 1e-12, n);
  c.record("strain_hessian_T", "U2(s) matches central differences of B^T s", e_u2, tol, n);
  c.record("strain_hessian_T", "U2(s) symmetric", s_u2, 1e-14, n);
  c.record("strain_hessian", "U1(a) matches central differences of B a", e_u1, tol, n);
  c.record("strain_hessian", "U1(a)^T s = U2(s) a", e_id, 1e-12, n);
  c.record("frame_invariance", "rigidly rotated reference has zero strain", e_frame, 1e-12, n);

  double e_g = 0, e_v = 0, s_v = 0, e_gn = 0, rank_gap = 1e300;
  for (int k = 0; k < n; ++k) {
    const VecX q = c.random(12);
    const Mat6x12 G = beam::constraint_jacobian(NodeState::from_flat(q));
    const MatX Gfd =
        fd_jacobian([](const VecX& x) -> VecX { return beam::constraints(NodeState::from_flat(x)); }, q, h);
    e_g = std::max(e_g, scaled_error(G, Gfd));

    const Vec6 nu = c.random(6);
    const Mat12 V = beam::constraint_curvature(nu);
    const MatX Vfd = fd_jacobian(
        [&](const VecX& x) -> VecX { return beam::constraint_jacobian(NodeState::from_flat(x)).transpose() * nu; },
        q, h);
    e_v = std::max(e_v, scaled_error(V, Vfd));
    s_v = std::max(s_v, asymmetry(V));

    const NodeState t = c.random_triad_node();
    const Mat12x6 N = beam::nullspace_basis(t);
    e_gn = std::max(e_gn, (beam::constraint_jacobian(t) * N).cwiseAbs().maxCoeff());
    Eigen::JacobiSVD<MatX> svd(N);
    rank_gap = std::min(rank_gap, svd.singularValues()[5]);
  }
  c.record("constraint_jacobian", "G matches central differences of g", e_g, tol, n);
  c.record("constraint_curvature", "V(nu) matches central differences of G^T nu", e_v, tol, n);
  c.record("constraint_curvature", "V(nu) symmetric", s_v, 1e-14, n);
  c.record("nullspace_basis", "G N = 0 at orthonormal triads", e_gn, 1e-14, n);
  c.record("nullspace_basis", "rank N = 6 (smallest singular value >= 0.5)", rank_gap >= 0.5 ? 0.0 : 1.0, 0.0, n);

  Inertia unit;
  unit.e00 = 10.0;
  const BeamMesh arc = make_arc_mesh(2.0 / 3.141592653589793, 3.141592653589793 / 2.0, 20, unit);
  const MatX M = MatX(beam::mass_matrix(arc));
  double trans = 0.0, d3 = 0.0;
  for (int a = 0; a < arc.node_count(); ++a) {
    for (int b = 0; b < arc.node_count(); ++b) trans += M(12 * a, 12 * b);
    d3 = std::max(d3, M.middleRows(12 * a + 9, 3).cwiseAbs().maxCoeff());
  }
  c.record("mass_matrix", "total translational mass = e00 * length", std::abs(trans - 10.0), 1e-12, 1);
  c.record("mass_matrix", "d3 rows vanish", d3, 0.0, 1);
  c.record("mass_matrix", "symmetric", asymmetry(M), 0.0, 1);
}

void check_constitutive(Checker& c) {
  const SelfCheckOptions& o = c.opt_;
  const int n = o.samples;
  Vec6 a;
  a << 75, 75, 100, 100, 100, 200;
  const ConstitutiveLaw laws[] = {ConstitutiveLaw::linear(a), ConstitutiveLaw::explicit_quadratic(a, 0.6375),
                                  ConstitutiveLaw::implicit_quadratic(a, 0.015)};
  double e_d = 0, e_c = 0;
  for (const ConstitutiveLaw& law : laws) {
    for (int k = 0; k < n; ++k) {
      VecX x(12);
      x << c.random(6, 0.5), c.random(6, 20.0);
      const auto h = [&](const VecX& v) -> VecX { return residual_h(law, v.head<6>(), v.tail<6>()); };
      const ManifoldDerivatives d = residual_h_derivatives(law, x.head<6>(), x.tail<6>());
      MatX J(6, 12);
      J << d.d_strain, d.d_stress;
      e_d = std::max(e_d, scaled_error(J, fd_jacobian(h, x, o.step)));

      const Vec6 xi = c.random(6);
      const auto grad = [&](const VecX& v) -> VecX {
        const ManifoldDerivatives dv = residual_h_derivatives(law, v.head<6>(), v.tail<6>());
        VecX g(12);
        g << dv.d_strain.transpose() * xi, dv.d_stress.transpose() * xi;
        return g;
      };
      const ManifoldCurvature cv = residual_h_curvature(law, xi);
      MatX H(12, 12);
      H << cv.strain_strain, cv.stress_strain.transpose(), cv.stress_strain, cv.stress_stress;
      e_c = std::max(e_c, scaled_error(H, fd_jacobian(grad, x, o.step)));
    }
  }
  c.record("manifold_derivatives", "dh/de, dh/ds match central differences (all laws)", e_d, o.tolerance, 3 * n);
  c.record("manifold_curvature", "xi-contracted curvature matches central differences", e_c, o.tolerance, 3 * n);
}

StepProblem random_problem(Checker& c, const BeamMesh& mesh, const SpMat& mass) {
  const VecX& q0 = mesh.reference().flat();
  const int nq = mesh.dofs();
  Vec6 w;
  w << 1.0, 2.0, 0.5, 1.5, 1.0, 3.0;
  return StepProblem(mesh, mass, q0 + c.random(nq, 0.05), q0 + c.random(nq, 0.05),
                     c.random(mesh.strain_dofs(), 5.0), c.random(nq, 2.0), c.random(nq, 2.0), 0.01,
                     ElementWeights::uniform(mesh.element_count(), Mat6(w.asDiagonal())));
}

// Owns the mesh and mass matrix a StepProblem refers to; not movable.
struct KktFixture {
  BeamMesh mesh;
  SpMat mass;
  StepProblem problem;

  explicit KktFixture(Checker& c)
      : mesh(make_arc_mesh(0.8, 1.0, 2, test_inertia())),
        mass(beam::mass_matrix(mesh)),
        problem(random_problem(c, mesh, mass)) {}
  KktFixture(const KktFixture&) = delete;
  KktFixture& operator=(const KktFixture&) = delete;
};

PrimalDualState random_state(Checker& c, const BeamMesh& mesh, Formulation f) {
  PrimalDualState s = PrimalDualState::at_rest(mesh, mesh.reference().flat(), f);
  VecX x = s.pack(f);
  x = c.random(x.size(), 0.3);
  s.unpack(x, f);
  s.q += mesh.reference().flat();
  return s;
}

void check_step(Checker& c) {
  const SelfCheckOptions& o = c.opt_;
  const int n = o.samples;
  double e_f = 0, e_fix = 0, s_fix = 0, e_one = 0, s_one = 0;
  Vec6 a;
  a << 75, 75, 100, 100, 100, 200;
  const ConstitutiveLaw laws[] = {ConstitutiveLaw::linear(a), ConstitutiveLaw::explicit_quadratic(a, 0.6375),
                                  ConstitutiveLaw::implicit_quadratic(a, 0.015)};
  for (int k = 0; k < n; ++k) {
    const KktFixture fx(c);
    const StepProblem& p = fx.problem;
    const VecX s = c.random(fx.mesh.strain_dofs(), 5.0);
    const VecX q = fx.mesh.reference().flat() + c.random(fx.mesh.dofs(), 0.05);
    const MatX F = MatX(balance_jacobian_F(p, s));
    const MatX Ffd = fd_jacobian([&](const VecX& x) -> VecX { return reduced_balance_residual(p, x, s); }, q, o.step);
    e_f = std::max(e_f, scaled_error(F, Ffd));

    PrimalDualState st = random_state(c, fx.mesh, Formulation::Fix);
    DataTarget target{c.random(fx.mesh.strain_dofs(), 0.1), c.random(fx.mesh.strain_dofs(), 5.0)};
    const MatX S = MatX(kkt_matrix_fix(p, st));
    const MatX Sfd = fd_jacobian(
        [&](const VecX& x) -> VecX {
          PrimalDualState t = st;
          t.unpack(x, Formulation::Fix);
          return kkt_residual_fix(p, t, target);
        },
        st.pack(Formulation::Fix), o.step);
    e_fix = std::max(e_fix, scaled_error(S, Sfd));
    s_fix = std::max(s_fix, asymmetry(S));

    const ConstitutiveLaw& law = laws[k % 3];
    PrimalDualState sa = random_state(c, fx.mesh, Formulation::Approximate);
    const MatX Sa = MatX(kkt_matrix_approx(p, sa, law));
    const MatX Safd = fd_jacobian(
        [&](const VecX& x) -> VecX {
          PrimalDualState t = sa;
          t.unpack(x, Formulation::Approximate);
          return kkt_residual_approx(p, t, law);
        },
        sa.pack(Formulation::Approximate), o.step);
    e_one = std::max(e_one, scaled_error(Sa, Safd));
    s_one = std::max(s_one, asymmetry(Sa));
  }
  c.record("balance_jacobian", "F matches central differences of the reduced balance", e_f, o.tolerance, n);
  c.record("kkt_fix", "S_fix matches central differences of the fixed-data KKT residual", e_fix, o.tolerance, n);
  c.record("kkt_fix", "S_fix symmetric", s_fix, 1e-14, n);
  c.record("kkt_approx", "S_one matches central differences of the approximate KKT residual", e_one, o.tolerance, n);
  c.record("kkt_approx", "S_one symmetric", s_one, 1e-14, n);
}

void check_solvers(Checker& c) {
  Vec6 a;
  a << 75, 75, 100, 100, 100, 200;
  const ConstitutiveLaw law = ConstitutiveLaw::linear(a);
  Inertia in;
  in.e00 = 10.0;
  in.e11 = 20.0;
  in.e22 = 20.0;
  const BeamMesh mesh = make_straight_mesh(0.5, 1, in);
  const SpMat mass = beam::mass_matrix(mesh);
  const VecX q0 = mesh.reference().flat();
  VecX f = VecX::Zero(mesh.dofs());
  f.segment<3>(0) = Vec3(1.0, -2.0, -3.0);
  f.segment<3>(12) = Vec3(-0.5, 1.0, 4.0);
  const StepProblem p(mesh, mass, q0, q0, VecX::Zero(6), f, f, 0.01, ElementWeights::uniform(1, Mat6::Identity()));

  double conv = 1.0, agree = 1.0;
  try {
    const NewtonResult ra = newton_solve(p, PrimalDualState::at_rest(mesh, q0, Formulation::Approximate), law, {});
    conv = ra.report.final_residual / (1e-12 * (1.0 + ra.report.initial_residual));
    const DataPoint point{ra.state.e_check, ra.state.s_check};
    const NewtonResult rf =
        newton_solve(p, PrimalDualState::at_rest(mesh, q0, Formulation::Fix), DataTarget::shared(point, 1), {});
    agree = (rf.state.q - ra.state.q).lpNorm<Eigen::Infinity>();
  } catch (const Error&) {
  }
  c.record("newton", "approximate step reaches the relative tolerance (ratio <= 1)", conv, 1.0, 1);
  c.record("fix_vs_approx", "fixed data on the manifold reproduces the approximate step", agree, 1e-9, 1);
}

}  // namespace

SelfCheckReport run_self_check(const SelfCheckOptions& options) {
  Checker c(options);
  check_beam(c);
  check_constitutive(c);
  check_step(c);
  check_solvers(c);
  return std::move(c.report);
}

std::string self_check_json(const SelfCheckReport& r) {
  using nlohmann::json;
  json checks = json::array();
  for (const auto& ch : r.checks) {
    checks.push_back({{"family", ch.family},
                      {"name", ch.name},
                      {"passed", ch.passed},
                      {"error", ch.error},
                      {"tolerance", ch.tolerance},
                      {"samples", ch.samples}});
  }
  json j = {{"passed", r.passed()},
            {"families", r.family_count()},
            {"failed_families", r.failed_families()},
            {"checks", checks}};
  return j.dump(2) + "\n";
}

}  // namespace ddcd
