#include <doctest.h>

#include <limits>

#include "ddcd/dcnlp.hpp"
#include "support.hpp"

using namespace ddcd;
using testing::rel_error;

namespace {

// Straight two-element bar pulled apart at its ends, starting from rest.
struct BarStep {
  BeamMesh mesh;
  SpMat mass;
  StepProblem problem;

  explicit BarStep(int elements = 2, double force = 4.0)
      : mesh(make_straight_mesh(1.0, elements, testing::unit_inertia())),
        mass(beam::mass_matrix(mesh)),
        problem(mesh, mass, mesh.reference().flat(), mesh.reference().flat(), VecX::Zero(mesh.strain_dofs()),
                VecX::Zero(mesh.dofs()), axial(mesh, force), 0.05,
                ElementWeights::uniform(mesh.element_count(), Mat6::Identity())) {}
  BarStep(const BarStep&) = delete;

  static VecX axial(const BeamMesh& m, double f) {
    VecX v = VecX::Zero(m.dofs());
    v[2] = -f;
    v[12 * (m.node_count() - 1) + 2] = f;
    return v;
  }
  PrimalDualState start(Formulation f) const { return PrimalDualState::at_rest(mesh, problem.q_curr(), f); }
};

MeasurementDataSet axial_grid(const ConstitutiveLaw& law, int points, double half) {
  StrainBox b;
  b.lower[2] = -half;
  b.upper[2] = half;
  const MeasurementDataSet g = grid_data_set(law, b, 2.0 * half / (points - 1));
  REQUIRE(static_cast<int>(g.size()) == points);
  return g;
}

std::vector<int> decode(int code, int base, int digits) {
  std::vector<int> a(digits);
  for (int k = digits - 1; k >= 0; --k) {
    a[k] = code % base;
    code /= base;
  }
  return a;
}

}  // namespace

TEST_CASE("a single manifold point reproduces the approximate step") {
  const BarStep bar(1);
  const ConstitutiveLaw law = ConstitutiveLaw::linear(testing::arc_stiffness());
  const NewtonResult approx = newton_solve(bar.problem, bar.start(Formulation::Approximate), law, NewtonOptions{});

  MeasurementDataSet data;
  data.points.push_back({approx.state.e_check.head<6>(), approx.state.s_check.head<6>()});
  const DcnlpResult r =
      solve_dcnlp_enumerate(bar.problem, bar.start(Formulation::Fix), data, DcnlpMode::Shared, NewtonOptions{});
  CHECK(rel_error(r.state.q, approx.state.q) <= 1e-8);

  const double approx_cost =
      step_cost(bar.problem, approx.state.e, approx.state.s, approx.state.e_check, approx.state.s_check);
  CHECK(std::abs(r.cost - approx_cost) <= 1e-10);
}

TEST_CASE("enumeration matches brute force over all assignments") {
  const BarStep bar(2);
  const ConstitutiveLaw law = ConstitutiveLaw::linear(testing::arc_stiffness());
  const MeasurementDataSet data = axial_grid(law, 9, 0.04);
  const NewtonOptions opt;
  const PrimalDualState init = bar.start(Formulation::Fix);

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_assignment;
  for (int code = 0; code < 81; ++code) {
    const std::vector<int> a = decode(code, 9, 2);
    const NewtonResult r =
        newton_solve(bar.problem, init, DataTarget::per_element({data.points[a[0]], data.points[a[1]]}), opt);
    const DataTarget t = DataTarget::per_element({data.points[a[0]], data.points[a[1]]});
    const double c = step_cost(bar.problem, r.state.e, r.state.s, t.strain, t.stress);
    if (c < best) {
      best = c;
      best_assignment = a;
    }
  }

  const DcnlpResult ex = solve_dcnlp_enumerate(bar.problem, init, data, DcnlpMode::Exhaustive, opt);
  CHECK(ex.assignment == best_assignment);
  CHECK(ex.cost == doctest::Approx(best).epsilon(1e-12));
  CHECK(ex.subproblems == 81);

  const DcnlpResult cd = solve_dcnlp_enumerate(bar.problem, init, data, DcnlpMode::CoordinateDescent, opt);
  CHECK(cd.cost >= best - 1e-14);
  const DcnlpResult sh = solve_dcnlp_enumerate(bar.problem, init, data, DcnlpMode::Shared, opt);
  CHECK(sh.cost >= best - 1e-14);
  CHECK(sh.assignment[0] == sh.assignment[1]);
}

TEST_CASE("an exact data point dominates distant ones") {
  const BarStep bar(1);
  const ConstitutiveLaw law = ConstitutiveLaw::linear(testing::arc_stiffness());
  const NewtonResult approx = newton_solve(bar.problem, bar.start(Formulation::Approximate), law, NewtonOptions{});
  MeasurementDataSet data;
  for (int i = 0; i < 4; ++i) {
    DataPoint far;
    far.strain = Vec6::Constant(0.5 + i);
    far.stress = stress_for_strain(law, far.strain);
    data.points.push_back(far);
  }
  data.points.insert(data.points.begin() + 2,
                     DataPoint{approx.state.e_check.head<6>(), approx.state.s_check.head<6>()});
  for (DcnlpMode mode : {DcnlpMode::Shared, DcnlpMode::CoordinateDescent, DcnlpMode::Exhaustive}) {
    const DcnlpResult r = solve_dcnlp_enumerate(bar.problem, bar.start(Formulation::Fix), data, mode, NewtonOptions{});
    CHECK(r.assignment == std::vector<int>{2});
  }
}

TEST_CASE("ties go to the lexicographically first assignment") {
  const BarStep bar(2);
  const ConstitutiveLaw law = ConstitutiveLaw::linear(testing::arc_stiffness());
  MeasurementDataSet base = axial_grid(law, 3, 0.02);
  MeasurementDataSet data;
  for (const DataPoint& p : base.points) {
    data.points.push_back(p);
    data.points.push_back(p);  // duplicate: identical cost at index + 1
  }
  const DcnlpResult r =
      solve_dcnlp_enumerate(bar.problem, bar.start(Formulation::Fix), data, DcnlpMode::Exhaustive, NewtonOptions{});
  for (int a : r.assignment) CHECK(a % 2 == 0);
}

TEST_CASE("enumeration input checks") {
  const BarStep bar(4);
  const ConstitutiveLaw law = ConstitutiveLaw::linear(testing::arc_stiffness());
  const MeasurementDataSet data = axial_grid(law, 3, 0.02);
  const PrimalDualState init = bar.start(Formulation::Fix);
  CHECK_THROWS_AS(solve_dcnlp_enumerate(bar.problem, init, MeasurementDataSet{}, DcnlpMode::Shared, NewtonOptions{}),
                  InvalidInput);
  CHECK_THROWS_AS(solve_dcnlp_enumerate(bar.problem, init, data, DcnlpMode::Exhaustive, NewtonOptions{}),
                  InvalidInput);
  CHECK(std::string(to_string(parse_dcnlp_mode("coordinate_descent"))) == "coordinate_descent");
  CHECK_THROWS_AS(parse_dcnlp_mode("greedy"), InvalidInput);
}
