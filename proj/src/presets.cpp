#include <numbers>

#include "ddcd/scenario.hpp"

namespace ddcd {

namespace {

Scenario quarter_arc(const std::string& name) {
  Scenario s;
  s.name = name;
  s.geometry.kind = GeometrySpec::Kind::Arc;
  s.geometry.radius = 2.0 / std::numbers::pi;
  s.geometry.sweep_deg = 90.0;
  s.geometry.nodes = 21;
  s.inertia.e00 = 10.0;
  s.inertia.e11 = 20.0;
  s.inertia.e22 = 20.0;
  s.t_start = 0.0;
  s.t_end = 4.0;
  s.dt = 0.005;

  s.loads.amplitude.kind = Amplitude::Kind::Triangle;
  s.loads.amplitude.t_peak = 0.5;
  s.loads.amplitude.t_end = 1.0;
  for (int n = 2; n <= 4; ++n) s.loads.forces.push_back({n - 1, Vec3(-10.0, 0.0, -20.0)});
  for (int n = 8; n <= 14; ++n) s.loads.forces.push_back({n - 1, Vec3(7.5, -7.5, 15.0)});
  for (int n = 18; n <= 20; ++n) s.loads.forces.push_back({n - 1, Vec3(0.0, 10.0, -20.0)});

  s.weight_diagonal = Vec6::Ones();
  s.output.directory = "out/" + name;
  s.output.elements = {8};
  return s;
}

Vec6 stiffness() {
  Vec6 a;
  a << 75.0, 75.0, 100.0, 100.0, 100.0, 200.0;
  return a;
}

}  // namespace

std::vector<std::string> preset_names() { return {"ex1", "ex2", "ex3"}; }

Scenario preset(const std::string& name) {
  Scenario s = quarter_arc(name);
  s.constitutive.has_law = true;
  ReferenceValues ref;
  ref.node = 11;
  ref.linear_momentum = Vec3(11.25, 11.25, -7.5);
  if (name == "ex1") {
    s.constitutive.law = ConstitutiveLaw::linear(stiffness());
    ref.position = Vec3(4.11667597, -3.48005560, -2.63093328);
    ref.d1 = Vec3(0.40214954, -0.40215401, 0.82252532);
    ref.d2 = Vec3(0.58161417, -0.58161758, -0.56873108);
    ref.d3 = Vec3(0.70711267, 0.70710733, 0.00000123);
    ref.angular_momentum = Vec3(1.39915722, 6.17377710, -7.16199130);
  } else if (name == "ex2") {
    s.constitutive.quadratic_factor = 0.6375;
    s.constitutive.law = ConstitutiveLaw::explicit_quadratic(stiffness(), 0.6375);
    ref.angular_momentum = Vec3(2.18791717, 5.90091563, -7.37292831);
  } else if (name == "ex3") {
    s.constitutive.quadratic_factor = 0.015;
    s.constitutive.law = ConstitutiveLaw::implicit_quadratic(stiffness(), 0.015);
    ref.angular_momentum = Vec3(0.85015476, 6.85601926, -6.84807263);
  } else {
    throw InvalidInput("unknown preset '" + name + "' (expected ex1, ex2 or ex3)");
  }
  s.output.reference = ref;
  return s;
}

}  // namespace ddcd
