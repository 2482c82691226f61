#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddcd/types.hpp"

namespace ddcd {

/// Diagonal constitutive manifold h(e, s) = 0 evaluated component-wise.
///
///   Linear             h_i = s_i - a_i e_i
///   ExplicitQuadratic  h_i = s_i - a_i e_i - b_i / 2 e_i^2
///   ImplicitQuadratic  h_i = e_i - c_i s_i - b_i / 2 s_i^2,   c_i = 1 / a_i
///
/// `stiffness` holds a_i (N for force entries, N m^2 for moment entries).
/// `quadratic` holds b_i in the units of the law it belongs to: stiffness
/// units for the explicit law and compliance units for the implicit one.
struct ConstitutiveLaw {
  enum class Variant { Linear, ExplicitQuadratic, ImplicitQuadratic };

  Variant variant = Variant::Linear;
  Vec6 stiffness = Vec6::Ones();
  Vec6 quadratic = Vec6::Zero();

  static ConstitutiveLaw linear(const Vec6& stiffness);
  /// b_i = factor * a_i.
  static ConstitutiveLaw explicit_quadratic(const Vec6& stiffness, double factor);
  /// b_i = factor / a_i (a multiple of the compliance).
  static ConstitutiveLaw implicit_quadratic(const Vec6& stiffness, double factor);

  Vec6 compliance() const { return stiffness.cwiseInverse(); }
  /// Throws InvalidInput unless every stiffness entry is finite and positive.
  void validate() const;
};

const char* to_string(ConstitutiveLaw::Variant v);
ConstitutiveLaw::Variant parse_variant(const std::string& name);

struct ManifoldDerivatives {
  Mat6 d_strain;  // dh/de
  Mat6 d_stress;  // dh/ds
};

/// Second derivatives contracted with a multiplier xi.
struct ManifoldCurvature {
  Mat6 strain_strain;  // d/de (dh/de^T xi)
  Mat6 stress_strain;  // d/ds (dh/de^T xi)
  Mat6 stress_stress;  // d/ds (dh/ds^T xi)
};

Vec6 residual_h(const ConstitutiveLaw& law, const Vec6& strain, const Vec6& stress);
ManifoldDerivatives residual_h_derivatives(const ConstitutiveLaw& law, const Vec6& strain,
                                           const Vec6& stress);
ManifoldCurvature residual_h_curvature(const ConstitutiveLaw& law, const Vec6& xi);

/// Stress on the manifold for a given strain. For the implicit law the root
/// continuous with the linear response is taken; throws InvalidInput when no
/// real root exists.
Vec6 stress_for_strain(const ConstitutiveLaw& law, const Vec6& strain);

struct DataPoint {
  Vec6 strain = Vec6::Zero();
  Vec6 stress = Vec6::Zero();
};

struct MeasurementDataSet {
  std::vector<DataPoint> points;
  std::string provenance;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct ManifoldValidation {
  double max_residual = 0.0;  // max over points of |h|_inf
  bool pass = false;
};

/// Throws InvalidInput for an empty data set or non-positive tolerance.
ManifoldValidation validate_manifold(const ConstitutiveLaw& law, const MeasurementDataSet& data,
                                     double tolerance);

struct SpuriousRoot {
  int component = 0;   // zero-based
  bool on_strain_axis = true;  // root of h(e, 0) = 0 if true, of h(0, s) = 0 otherwise
  double location = 0.0;
  bool in_operating_range = false;
};

struct ConsistencyReport {
  bool pass = true;
  std::vector<SpuriousRoot> spurious_roots;
};

/// Physical consistency: h(e, 0) = 0 => e = 0 and h(0, s) = 0 => s = 0.
/// Non-zero roots are reported; the check fails only if one lies within the
/// operating box |e_i| <= strain_range, |s_i| <= stress_range.
ConsistencyReport consistency_check(const ConstitutiveLaw& law, double strain_range = 1.0,
                                    double stress_range = 100.0);

struct StrainBox {
  Vec6 lower = Vec6::Zero();
  Vec6 upper = Vec6::Zero();
};

/// Synthetic measurements: strains uniform in the box, stresses from the law,
/// uniform noise of the given amplitude. For the linear law noise perturbs
/// both strain and stress; for the quadratic laws only the dependent variable
/// (stress for explicit, strain for implicit), so |h|_inf never exceeds
/// noise * (1 + max a). A degenerate box (some lower > upper or a non-finite bound) throws
/// InvalidInput.
MeasurementDataSet sample_data_set(const ConstitutiveLaw& law, const StrainBox& box, int count,
                                   double noise, std::uint64_t seed);

/// Regular grid of manifold points over the components where lower < upper.
MeasurementDataSet grid_data_set(const ConstitutiveLaw& law, const StrainBox& box, double spacing);

/// CSV with a header row and 12 numeric columns e1..e6, s1..s6.
MeasurementDataSet read_data_set_csv(std::istream& in, const std::string& provenance);
MeasurementDataSet load_data_set_csv(const std::string& path);
void write_data_set_csv(std::ostream& out, const MeasurementDataSet& data);

}  // namespace ddcd
