#pragma once

// Director-based geometrically exact beam: kinematics, strains and every
// configuration-dependent operator needed by the step solver.
//
// Nodal coordinates are stored as q_a = (phi0, d1, d2, d3), 12 scalars per
// node. Two-node elements use one Gauss point at the element midpoint: field
// values are nodal means and arc-length derivatives are (node2 - node1) / L_e.
// Strain ordering is (gamma_1, gamma_2, gamma_3, omega_1, omega_2, omega_3):
// shear, shear, elongation, bending, bending, torsion.

#include <utility>
#include <vector>

#include "ddcd/types.hpp"

namespace ddcd {

struct NodeState {
  Vec3 position = Vec3::Zero();
  Vec3 d1 = Vec3::UnitX();
  Vec3 d2 = Vec3::UnitY();
  Vec3 d3 = Vec3::UnitZ();

  Vec12 flat() const;
  static NodeState from_flat(const Eigen::Ref<const Vec12>& q);
};

/// Generalized coordinates of a whole mesh with a flat view of length 12 * nodes.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(VecX flat);
  static Configuration from_nodes(const std::vector<NodeState>& nodes);

  int node_count() const { return static_cast<int>(q_.size() / kNodeDofs); }
  NodeState node(int a) const;
  void set_node(int a, const NodeState& state);
  std::vector<NodeState> nodes() const;

  const VecX& flat() const { return q_; }
  VecX& flat() { return q_; }

 private:
  VecX q_;
};

/// Cross-section inertia coefficients E_ij = int rho0 theta^i theta^j dA.
struct Inertia {
  double e00 = 0.0;  // kg/m
  double e11 = 0.0;  // kg m
  double e22 = 0.0;  // kg m
  double e01 = 0.0;  // kg
  double e02 = 0.0;  // kg
  double e12 = 0.0;  // kg m

  /// Mass matrix per unit length acting on one node's 12 coordinates.
  Mat12 per_unit_length() const;
};

struct Element {
  int first = 0;
  int second = 0;
  double length = 0.0;
  Vec6 reference_strain = Vec6::Zero();
};

class BeamMesh {
 public:
  /// Element lengths are the reference (parametric) arc lengths. Reference
  /// strains are computed from `reference` so that it is stress free.
  BeamMesh(Configuration reference, const std::vector<std::pair<int, int>>& connectivity,
           const std::vector<double>& lengths, Inertia inertia);

  const Configuration& reference() const { return reference_; }
  const std::vector<Element>& elements() const { return elements_; }
  const Inertia& inertia() const { return inertia_; }

  int node_count() const { return reference_.node_count(); }
  int element_count() const { return static_cast<int>(elements_.size()); }
  int dofs() const { return kNodeDofs * node_count(); }
  int reduced_dofs() const { return kNodeReducedDofs * node_count(); }
  int strain_dofs() const { return kStrainDim * element_count(); }
  int constraint_count() const { return kNodeConstraints * node_count(); }
  double total_length() const;

 private:
  Configuration reference_;
  std::vector<Element> elements_;
  Inertia inertia_;
};

/// Quarter-style circular arc in the x-y plane starting at the origin with
/// centre (radius, 0, 0). d1 = e_z, d2 is the inward normal and d3 = d1 x d2
/// the unit tangent.
BeamMesh make_arc_mesh(double radius, double sweep, int elements, const Inertia& inertia);

/// Straight beam along +z from the origin, d1 = e_x, d2 = e_y, d3 = e_z.
BeamMesh make_straight_mesh(double length, int elements, const Inertia& inertia);

namespace beam {

Vec24 gather(const VecX& q, const Element& element);

/// (gamma, omega) at the Gauss point, without reference subtraction.
Vec6 deformation_measures(const Vec24& qe, double length);
/// e(q) = (gamma - gamma_ref, omega - omega_ref).
Vec6 strain(const Vec24& qe, const Element& element);
/// B = de/dq; linear in qe.
Mat6x24 strain_jacobian(const Vec24& qe, double length);
/// U2(s) = d(B^T s)/dq; symmetric and independent of q.
Mat24 strain_hessian_T(const Vec6& stress, double length);
/// U1(a) = d(B a)/dq; independent of q.
Mat6x24 strain_hessian(const Vec24& a, double length);

/// g = 1/2 (d1.d1-1, d2.d2-1, d3.d3-1, 2 d2.d3, 2 d1.d3, 2 d1.d2).
Vec6 constraints(const NodeState& node);
Mat6x12 constraint_jacobian(const NodeState& node);
/// V(nu) = d(G^T nu)/dq.
Mat12 constraint_curvature(const Vec6& nu);
/// Columns: three translations, then infinitesimal rotations of the triad.
Mat12x6 nullspace_basis(const NodeState& node);

// Assembled operators.
VecX strains(const BeamMesh& mesh, const VecX& q);
/// sum_e w_e B_e(q)^T s_e with w_e = L_e (one-point quadrature).
VecX internal_force(const BeamMesh& mesh, const VecX& q, const VecX& stress);
VecX constraints(const VecX& q);
double constraint_norm(const VecX& q);
SpMat constraint_jacobian(const VecX& q);
SpMat nullspace_basis(const VecX& q);
/// Consistent mass matrix with linear shape functions.
SpMat mass_matrix(const BeamMesh& mesh);

}  // namespace beam

/// Time amplitude a(t) applied to a static nodal load pattern.
struct Amplitude {
  enum class Kind { Zero, Constant, Triangle };
  Kind kind = Kind::Zero;
  double value = 1.0;   // Constant
  double t_peak = 0.5;  // Triangle: 0 -> 1 on [0, t_peak)
  double t_end = 1.0;   // Triangle: 1 -> 0 on [t_peak, t_end)

  double operator()(double t) const;
};

struct NodalForce {
  int node = 0;  // zero-based
  Vec3 force = Vec3::Zero();
};

struct LoadCase {
  std::vector<NodalForce> forces;
  Amplitude amplitude;

  /// Static pattern on all generalized coordinates (zero on directors).
  VecX pattern(int node_count) const;
  VecX at(double t, int node_count) const;
  Vec3 total_static_force() const;
};

}  // namespace ddcd
