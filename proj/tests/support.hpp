#pragma once

// Shared helpers for the test binaries: random inputs and finite-difference
// oracles written independently of the library.

#include <cmath>
#include <functional>
#include <random>

#include "ddcd/beam.hpp"
#include "ddcd/step_solver.hpp"

namespace testing {

using namespace ddcd;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  VecX vector(int n, double scale = 1.0) {
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * uniform();
    return v;
  }
  template <int N>
  Eigen::Matrix<double, N, 1> fixed(double scale = 1.0) {
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v[i] = scale * uniform();
    return v;
  }
  Mat3 rotation() {
    Eigen::Quaterniond q(uniform(), uniform(), uniform(), uniform());
    if (q.norm() < 1e-3) q = Eigen::Quaterniond::Identity();
    return q.normalized().toRotationMatrix();
  }
  NodeState orthonormal_node(double position_scale = 1.0) {
    const Mat3 r = rotation();
    NodeState n;
    n.position = fixed<3>(position_scale);
    n.d1 = r.col(0);
    n.d2 = r.col(1);
    n.d3 = r.col(2);
    return n;
  }

 private:
  std::mt19937_64 gen_;
};

/// Central-difference Jacobian of f at x.
inline MatX fd_jacobian(const std::function<VecX(const VecX&)>& f, const VecX& x, double h = 1e-6) {
  const VecX f0 = f(x);
  MatX J(f0.size(), x.size());
  VecX xp = x, xm = x;
  for (int j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return J;
}

/// max|A - B| / max(1, max|B|).
inline double rel_error(const MatX& A, const MatX& B) {
  const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
  return (A - B).cwiseAbs().maxCoeff() / scale;
}

inline double asym(const MatX& A) { return (A - A.transpose()).cwiseAbs().maxCoeff(); }

inline Inertia unit_inertia() {
  Inertia in;
  in.e00 = 2.0;
  in.e11 = 0.3;
  in.e22 = 0.5;
  return in;
}

inline Inertia arc_inertia() {
  Inertia in;
  in.e00 = 10.0;
  in.e11 = 20.0;
  in.e22 = 20.0;
  return in;
}

inline Vec6 arc_stiffness() {
  Vec6 a;
  a << 75.0, 75.0, 100.0, 100.0, 100.0, 200.0;
  return a;
}

/// Configuration near the reference with orthonormal directors: every node
/// is moved rigidly by a small random rotation and translation.
inline VecX perturbed_rigid_nodes(const BeamMesh& mesh, Rng& rng, double scale) {
  Configuration c = mesh.reference();
  for (int a = 0; a < c.node_count(); ++a) {
    NodeState n = c.node(a);
    const Mat3 r = Eigen::AngleAxisd(scale * rng.uniform(0.2, 1.0), rng.fixed<3>().normalized()).toRotationMatrix();
    n.position += rng.fixed<3>(scale);
    n.d1 = r * n.d1;
    n.d2 = r * n.d2;
    n.d3 = r * n.d3;
    c.set_node(a, n);
  }
  return c.flat();
}

/// A step problem with random but consistent data; holds its own mesh and
/// mass matrix so the problem's references stay valid.
struct StepFixture {
  BeamMesh mesh;
  SpMat mass;
  StepProblem problem;

  StepFixture(BeamMesh m, Rng& rng, double dt = 0.05, const Mat6& weight = Mat6::Identity())
      : mesh(std::move(m)),
        mass(beam::mass_matrix(mesh)),
        problem(mesh, mass, perturbed_rigid_nodes(mesh, rng, 0.02), perturbed_rigid_nodes(mesh, rng, 0.02),
                rng.vector(mesh.strain_dofs(), 0.5), rng.vector(mesh.dofs(), 0.3), rng.vector(mesh.dofs(), 0.3), dt,
                ElementWeights::uniform(mesh.element_count(), weight)) {}
  StepFixture(const StepFixture&) = delete;
  StepFixture& operator=(const StepFixture&) = delete;
};

/// Fully random primal-dual state of the right sizes.
inline PrimalDualState random_state(const BeamMesh& mesh, const VecX& q_near, Rng& rng, Formulation f) {
  PrimalDualState s = PrimalDualState::at_rest(mesh, q_near, f);
  s.q = q_near + rng.vector(mesh.dofs(), 0.05);
  s.e = rng.vector(mesh.strain_dofs(), 0.1);
  s.s = rng.vector(mesh.strain_dofs(), 0.5);
  s.lambda = rng.vector(mesh.strain_dofs(), 0.5);
  s.mu = rng.vector(mesh.reduced_dofs(), 0.5);
  s.nu = rng.vector(mesh.constraint_count(), 0.5);
  if (f == Formulation::Approximate) {
    s.e_check = rng.vector(mesh.strain_dofs(), 0.1);
    s.s_check = rng.vector(mesh.strain_dofs(), 0.5);
    s.xi = rng.vector(mesh.strain_dofs(), 0.5);
  }
  return s;
}

}  // namespace testing
