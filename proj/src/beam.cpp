#include "ddcd/beam.hpp"

#include <array>
#include <cmath>

namespace ddcd {

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error([&] {
        std::string msg = "validation failed";
        for (const auto& p : problems) msg += "\n  - " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

Vec12 NodeState::flat() const {
  Vec12 q;
  q << position, d1, d2, d3;
  return q;
}

NodeState NodeState::from_flat(const Eigen::Ref<const Vec12>& q) {
  return {q.segment<3>(0), q.segment<3>(3), q.segment<3>(6), q.segment<3>(9)};
}

Configuration::Configuration(VecX flat) : q_(std::move(flat)) {
  if (q_.size() % kNodeDofs != 0) {
    throw InvalidInput("configuration length " + std::to_string(q_.size()) +
                       " is not a multiple of 12");
  }
}

Configuration Configuration::from_nodes(const std::vector<NodeState>& nodes) {
  VecX q(kNodeDofs * static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t a = 0; a < nodes.size(); ++a) q.segment<kNodeDofs>(kNodeDofs * a) = nodes[a].flat();
  return Configuration(std::move(q));
}

NodeState Configuration::node(int a) const {
  return NodeState::from_flat(q_.segment<kNodeDofs>(kNodeDofs * a));
}

void Configuration::set_node(int a, const NodeState& state) {
  q_.segment<kNodeDofs>(kNodeDofs * a) = state.flat();
}

std::vector<NodeState> Configuration::nodes() const {
  std::vector<NodeState> out;
  out.reserve(node_count());
  for (int a = 0; a < node_count(); ++a) out.push_back(node(a));
  return out;
}

Mat12 Inertia::per_unit_length() const {
  const Mat3 I = Mat3::Identity();
  Mat12 m = Mat12::Zero();
  const double e[3][3] = {{e00, e01, e02}, {e01, e11, e12}, {e02, e12, e22}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.block<3, 3>(3 * i, 3 * j) = e[i][j] * I;
  return m;
}

BeamMesh::BeamMesh(Configuration reference, const std::vector<std::pair<int, int>>& connectivity,
                   const std::vector<double>& lengths, Inertia inertia)
    : reference_(std::move(reference)), inertia_(inertia) {
  if (connectivity.size() != lengths.size()) {
    throw InvalidInput("connectivity and element lengths differ in size");
  }
  const int n = reference_.node_count();
  elements_.reserve(connectivity.size());
  for (std::size_t k = 0; k < connectivity.size(); ++k) {
    const auto [a, b] = connectivity[k];
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
      throw InvalidInput("element " + std::to_string(k) + " has invalid node indices");
    }
    if (!(lengths[k] > 0.0) || !std::isfinite(lengths[k])) {
      throw InvalidInput("element " + std::to_string(k) + " has non-positive length");
    }
    Element e{a, b, lengths[k], Vec6::Zero()};
    e.reference_strain = beam::deformation_measures(beam::gather(reference_.flat(), e), e.length);
    elements_.push_back(e);
  }
}

double BeamMesh::total_length() const {
  double total = 0.0;
  for (const auto& e : elements_) total += e.length;
  return total;
}

BeamMesh make_arc_mesh(double radius, double sweep, int elements, const Inertia& inertia) {
  if (!(radius > 0.0) || !(sweep > 0.0) || elements < 1) {
    throw InvalidInput("arc mesh needs positive radius, sweep and element count");
  }
  std::vector<NodeState> nodes;
  for (int a = 0; a <= elements; ++a) {
    const double theta = sweep * a / elements;
    const double c = std::cos(theta), s = std::sin(theta);
    NodeState node;
    node.position = Vec3(radius * (1.0 - c), radius * s, 0.0);
    node.d3 = Vec3(s, c, 0.0);
    node.d1 = Vec3(0.0, 0.0, 1.0);
    node.d2 = Vec3(c, -s, 0.0);
    nodes.push_back(node);
  }
  std::vector<std::pair<int, int>> conn;
  std::vector<double> lengths;
  for (int k = 0; k < elements; ++k) {
    conn.emplace_back(k, k + 1);
    lengths.push_back(radius * sweep / elements);
  }
  return BeamMesh(Configuration::from_nodes(nodes), conn, lengths, inertia);
}

BeamMesh make_straight_mesh(double length, int elements, const Inertia& inertia) {
  if (!(length > 0.0) || elements < 1) {
    throw InvalidInput("straight mesh needs positive length and element count");
  }
  std::vector<NodeState> nodes;
  for (int a = 0; a <= elements; ++a) {
    NodeState node;
    node.position = Vec3(0.0, 0.0, length * a / elements);
    nodes.push_back(node);
  }
  std::vector<std::pair<int, int>> conn;
  std::vector<double> lengths;
  for (int k = 0; k < elements; ++k) {
    conn.emplace_back(k, k + 1);
    lengths.push_back(length / elements);
  }
  return BeamMesh(Configuration::from_nodes(nodes), conn, lengths, inertia);
}

namespace beam {
namespace {

// Field slots inside a node's 12 coordinates.
enum Field { kPhi = 0, kD1 = 1, kD2 = 2, kD3 = 3 };

// One bilinear contribution coef * mean(field_a) . derivative(field_b).
struct Term {
  int mean_field;
  int derivative_field;
  double coef;
};

struct Component {
  std::array<Term, 2> terms;
  int count;
};

constexpr std::array<Component, 6> kStrainTerms = {{
    {{{{kD1, kPhi, 1.0}, {}}}, 1},
    {{{{kD2, kPhi, 1.0}, {}}}, 1},
    {{{{kD3, kPhi, 1.0}, {}}}, 1},
    {{{{kD3, kD2, 0.5}, {kD2, kD3, -0.5}}}, 2},
    {{{{kD1, kD3, 0.5}, {kD3, kD1, -0.5}}}, 2},
    {{{{kD2, kD1, 0.5}, {kD1, kD2, -0.5}}}, 2},
}};

inline Vec3 mean(const Vec24& qe, int f) {
  return 0.5 * (qe.segment<3>(3 * f) + qe.segment<3>(12 + 3 * f));
}

inline Vec3 derivative(const Vec24& qe, int f, double length) {
  return (qe.segment<3>(12 + 3 * f) - qe.segment<3>(3 * f)) / length;
}

}  // namespace

Vec24 gather(const VecX& q, const Element& element) {
  Vec24 qe;
  qe << q.segment<kNodeDofs>(kNodeDofs * element.first), q.segment<kNodeDofs>(kNodeDofs * element.second);
  return qe;
}

Vec6 deformation_measures(const Vec24& qe, double length) {
  Vec6 e = Vec6::Zero();
  for (int k = 0; k < 6; ++k) {
    const auto& c = kStrainTerms[k];
    for (int t = 0; t < c.count; ++t) {
      const Term& term = c.terms[t];
      e[k] += term.coef * mean(qe, term.mean_field).dot(derivative(qe, term.derivative_field, length));
    }
  }
  return e;
}

Vec6 strain(const Vec24& qe, const Element& element) {
  return deformation_measures(qe, element.length) - element.reference_strain;
}

Mat6x24 strain_jacobian(const Vec24& qe, double length) {
  Mat6x24 B = Mat6x24::Zero();
  const double inv = 1.0 / length;
  for (int k = 0; k < 6; ++k) {
    const auto& c = kStrainTerms[k];
    for (int t = 0; t < c.count; ++t) {
      const Term& term = c.terms[t];
      const Vec3 m = mean(qe, term.mean_field);
      const Vec3 d = derivative(qe, term.derivative_field, length);
      // d(mean) / dq: 1/2 on both nodes; d(derivative) / dq: -1/L, +1/L.
      for (int node = 0; node < 2; ++node) {
        const int off = 12 * node;
        B.block<1, 3>(k, off + 3 * term.mean_field) += term.coef * 0.5 * d.transpose();
        B.block<1, 3>(k, off + 3 * term.derivative_field) +=
            term.coef * (node == 0 ? -inv : inv) * m.transpose();
      }
    }
  }
  return B;
}

Mat24 strain_hessian_T(const Vec6& stress, double length) {
  Mat24 U = Mat24::Zero();
  const double inv = 1.0 / length;
  for (int k = 0; k < 6; ++k) {
    if (stress[k] == 0.0) continue;
    const auto& c = kStrainTerms[k];
    for (int t = 0; t < c.count; ++t) {
      const Term& term = c.terms[t];
      const double w = stress[k] * term.coef;
      for (int n = 0; n < 2; ++n) {
        for (int m = 0; m < 2; ++m) {
          const double v = w * 0.5 * (m == 0 ? -inv : inv);
          const int row = 12 * n + 3 * term.mean_field;
          const int col = 12 * m + 3 * term.derivative_field;
          U.block<3, 3>(row, col).diagonal().array() += v;
          U.block<3, 3>(col, row).diagonal().array() += v;
        }
      }
    }
  }
  return U;
}

Mat6x24 strain_hessian(const Vec24& a, double length) {
  // B(q) is linear in q and built from symmetric bilinear forms, so
  // d(B(q) a)/dq coincides with B evaluated at a.
  return strain_jacobian(a, length);
}

Vec6 constraints(const NodeState& n) {
  Vec6 g;
  g << 0.5 * (n.d1.dot(n.d1) - 1.0), 0.5 * (n.d2.dot(n.d2) - 1.0), 0.5 * (n.d3.dot(n.d3) - 1.0),
      n.d2.dot(n.d3), n.d1.dot(n.d3), n.d1.dot(n.d2);
  return g;
}

Mat6x12 constraint_jacobian(const NodeState& n) {
  Mat6x12 G = Mat6x12::Zero();
  G.block<1, 3>(0, 3) = n.d1.transpose();
  G.block<1, 3>(1, 6) = n.d2.transpose();
  G.block<1, 3>(2, 9) = n.d3.transpose();
  G.block<1, 3>(3, 6) = n.d3.transpose();
  G.block<1, 3>(3, 9) = n.d2.transpose();
  G.block<1, 3>(4, 3) = n.d3.transpose();
  G.block<1, 3>(4, 9) = n.d1.transpose();
  G.block<1, 3>(5, 3) = n.d2.transpose();
  G.block<1, 3>(5, 6) = n.d1.transpose();
  return G;
}

Mat12 constraint_curvature(const Vec6& nu) {
  Mat12 V = Mat12::Zero();
  const Mat3 I = Mat3::Identity();
  V.block<3, 3>(3, 3) = nu[0] * I;
  V.block<3, 3>(6, 6) = nu[1] * I;
  V.block<3, 3>(9, 9) = nu[2] * I;
  V.block<3, 3>(6, 9) = V.block<3, 3>(9, 6) = nu[3] * I;
  V.block<3, 3>(3, 9) = V.block<3, 3>(9, 3) = nu[4] * I;
  V.block<3, 3>(3, 6) = V.block<3, 3>(6, 3) = nu[5] * I;
  return V;
}

Mat12x6 nullspace_basis(const NodeState& n) {
  Mat12x6 N = Mat12x6::Zero();
  N.block<3, 3>(0, 0) = Mat3::Identity();
  N.block<3, 3>(3, 3) = hat(n.d1).transpose();
  N.block<3, 3>(6, 3) = hat(n.d2).transpose();
  N.block<3, 3>(9, 3) = hat(n.d3).transpose();
  return N;
}

VecX strains(const BeamMesh& mesh, const VecX& q) {
  VecX e(mesh.strain_dofs());
  for (int k = 0; k < mesh.element_count(); ++k) {
    const Element& el = mesh.elements()[k];
    e.segment<6>(6 * k) = strain(gather(q, el), el);
  }
  return e;
}

VecX internal_force(const BeamMesh& mesh, const VecX& q, const VecX& stress) {
  VecX f = VecX::Zero(mesh.dofs());
  for (int k = 0; k < mesh.element_count(); ++k) {
    const Element& el = mesh.elements()[k];
    const Vec24 fe = el.length * strain_jacobian(gather(q, el), el.length).transpose() *
                     stress.segment<6>(6 * k);
    f.segment<12>(12 * el.first) += fe.head<12>();
    f.segment<12>(12 * el.second) += fe.tail<12>();
  }
  return f;
}

VecX constraints(const VecX& q) {
  const int n = static_cast<int>(q.size() / kNodeDofs);
  VecX g(kNodeConstraints * n);
  for (int a = 0; a < n; ++a) {
    g.segment<6>(6 * a) = constraints(NodeState::from_flat(q.segment<12>(12 * a)));
  }
  return g;
}

double constraint_norm(const VecX& q) {
  return q.size() == 0 ? 0.0 : constraints(q).lpNorm<Eigen::Infinity>();
}

SpMat constraint_jacobian(const VecX& q) {
  const int n = static_cast<int>(q.size() / kNodeDofs);
  std::vector<Triplet> trip;
  trip.reserve(72 * n);
  for (int a = 0; a < n; ++a) {
    const Mat6x12 G = constraint_jacobian(NodeState::from_flat(q.segment<12>(12 * a)));
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 12; ++j)
        trip.emplace_back(6 * a + i, 12 * a + j, G(i, j));
  }
  SpMat G(6 * n, 12 * n);
  G.setFromTriplets(trip.begin(), trip.end());
  return G;
}

SpMat nullspace_basis(const VecX& q) {
  const int n = static_cast<int>(q.size() / kNodeDofs);
  std::vector<Triplet> trip;
  trip.reserve(72 * n);
  for (int a = 0; a < n; ++a) {
    const Mat12x6 N = nullspace_basis(NodeState::from_flat(q.segment<12>(12 * a)));
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 6; ++j)
        trip.emplace_back(12 * a + i, 6 * a + j, N(i, j));
  }
  SpMat N(12 * n, 6 * n);
  N.setFromTriplets(trip.begin(), trip.end());
  return N;
}

SpMat mass_matrix(const BeamMesh& mesh) {
  const Mat12 m = mesh.inertia().per_unit_length();
  std::vector<Triplet> trip;
  for (const Element& el : mesh.elements()) {
    const int nodes[2] = {el.first, el.second};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double w = el.length * (i == j ? 1.0 / 3.0 : 1.0 / 6.0);
        for (int r = 0; r < 12; ++r)
          for (int c = 0; c < 12; ++c)
            if (m(r, c) != 0.0) trip.emplace_back(12 * nodes[i] + r, 12 * nodes[j] + c, w * m(r, c));
      }
    }
  }
  SpMat M(mesh.dofs(), mesh.dofs());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

}  // namespace beam

double Amplitude::operator()(double t) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return t < 0.0 ? 0.0 : value;
    case Kind::Triangle:
      if (t < 0.0 || t >= t_end) return 0.0;
      if (t < t_peak) return t / t_peak;
      return (t_end - t) / (t_end - t_peak);
  }
  return 0.0;
}

VecX LoadCase::pattern(int node_count) const {
  VecX f = VecX::Zero(kNodeDofs * node_count);
  for (const auto& nf : forces) {
    if (nf.node < 0 || nf.node >= node_count) {
      throw InvalidInput("load applied to node " + std::to_string(nf.node + 1) +
                         " outside the mesh");
    }
    f.segment<3>(kNodeDofs * nf.node) += nf.force;
  }
  return f;
}

VecX LoadCase::at(double t, int node_count) const {
  const double a = amplitude(t);
  if (a == 0.0) return VecX::Zero(kNodeDofs * node_count);
  return a * pattern(node_count);
}

Vec3 LoadCase::total_static_force() const {
  Vec3 total = Vec3::Zero();
  for (const auto& nf : forces) total += nf.force;
  return total;
}

}  // namespace ddcd
