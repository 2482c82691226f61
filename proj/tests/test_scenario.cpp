#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ddcd/output.hpp"
#include "ddcd/scenario.hpp"
#include "support.hpp"

using namespace ddcd;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ddcd_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json small_config() {
  return json::parse(R"({
    "name": "small",
    "geometry": {"kind": "arc", "radius": 0.6366197723675814, "sweep_deg": 90, "nodes": 5},
    "inertia": {"e00": 10, "e11": 20, "e22": 20},
    "time": {"t_start": 0, "t_end": 0.6, "dt": 0.05},
    "loads": {
      "amplitude": {"kind": "triangle", "t_peak": 0.1, "t_end": 0.2},
      "forces": [{"nodes": [2, 4], "force": [1, -1, 2]}, {"node": 3, "force": [0, 0.5, 0]}]
    },
    "constitutive": {"law": "linear", "stiffness": [75, 75, 100, 100, 100, 200]},
    "output": {"directory": "unused", "elements": [1, 4]}
  })");
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) header->push_back(c);
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    std::stringstream ls(line);
    std::vector<double> row;
    for (std::string c; std::getline(ls, c, ',');) row.push_back(std::stod(c));
    rows.push_back(row);
  }
  return rows;
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

bool mentions(const ValidationError& e, const std::string& what) {
  for (const auto& p : e.problems())
    if (p.find(what) != std::string::npos) return true;
  return false;
}

std::vector<std::string> parse_problems(const json& doc) {
  try {
    parse_scenario(doc.dump());
  } catch (const ValidationError& e) {
    return e.problems();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& s) {
  for (const auto& x : v)
    if (x.find(s) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("bundled presets") {
  Vec6 a;
  a << 75, 75, 100, 100, 100, 200;
  const Scenario ex1 = preset("ex1");
  CHECK(ex1.constitutive.law.variant == ConstitutiveLaw::Variant::Linear);
  CHECK(ex1.constitutive.law.stiffness == a);
  CHECK(ex1.geometry.nodes == 21);
  CHECK(ex1.inertia.e00 == 10.0);
  CHECK(ex1.build_mesh().total_length() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ex1.symmetry_radius().has_value());

  const Scenario ex2 = preset("ex2");
  CHECK(ex2.constitutive.law.variant == ConstitutiveLaw::Variant::ExplicitQuadratic);
  for (int i = 0; i < 6; ++i) CHECK(ex2.constitutive.law.quadratic[i] == doctest::Approx(0.6375 * a[i]));
  const Scenario ex3 = preset("ex3");
  CHECK(ex3.constitutive.law.variant == ConstitutiveLaw::Variant::ImplicitQuadratic);
  for (int i = 0; i < 6; ++i) CHECK(ex3.constitutive.law.quadratic[i] == doctest::Approx(0.015 / a[i]));

  for (const auto& n : preset_names()) CHECK(validate(preset(n)).empty());
  CHECK_THROWS_AS(preset("ex4"), InvalidInput);
}

TEST_CASE("config round trip") {
  for (const auto& n : preset_names()) {
    const std::string text = to_json(preset(n));
    CHECK(to_json(parse_scenario(text)) == text);
  }
  const Scenario s = parse_scenario(small_config().dump());
  CHECK(s.geometry.nodes == 5);
  REQUIRE(s.loads.forces.size() == 3);
  CHECK(s.loads.forces[0].node == 1);  // 1-based in the document
  CHECK(s.loads.forces[1].node == 3);
  CHECK(s.output.elements == std::vector<int>{1, 4});
  CHECK(to_json(parse_scenario(to_json(s))) == to_json(s));
}

TEST_CASE("validation collects every problem") {
  Scenario s = preset("ex1");
  s.dt = 0.0;
  CHECK(any_contains(validate(s), "dt"));

  json doc = small_config();
  doc["time"]["dt"] = 0.0;
  doc["inertia"]["e00"] = -1.0;
  doc["loads"]["forces"][0]["nodes"] = json::array({2, 9});
  doc["geometry"]["colour"] = "red";
  const auto problems = parse_problems(doc);
  CHECK(problems.size() >= 4);
  CHECK(any_contains(problems, "dt"));
  CHECK(any_contains(problems, "e00"));
  CHECK(any_contains(problems, "9"));
  CHECK(any_contains(problems, "colour"));
}

TEST_CASE("config error cases") {
  CHECK_THROWS_AS(parse_scenario("{not json"), ValidationError);
  CHECK_THROWS_AS(parse_scenario("[]"), ValidationError);

  json doc = small_config();
  doc["time"]["t_end"] = 0.61;  // not a multiple of dt
  CHECK(any_contains(parse_problems(doc), "time"));

  doc = small_config();
  doc["constitutive"] = {{"data_file", ""}};
  CHECK_FALSE(parse_problems(doc).empty());

  doc = small_config();
  doc["constitutive"]["law"] = "cubic";
  CHECK(any_contains(parse_problems(doc), "law"));

  doc = small_config();
  doc["weights"] = {{"diagonal", {1, 1, 1, 0, 1, 1}}};
  CHECK(any_contains(parse_problems(doc), "weights"));

  doc = small_config();
  doc["dcnlp"] = {{"mode", "exhaustive"}, {"spacings", {0.01}}, {"strain_lower", {0, 0, -0.1, 0, 0, 0}},
                  {"strain_upper", {0, 0, 0.1, 0, 0, 0}}, {"steps", 1}};
  CHECK(any_contains(parse_problems(doc), "exhaustive"));

  try {
    load_scenario("/nonexistent/config.json");
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(mentions(e, "config.json"));
  }
}

TEST_CASE("data files are resolved against the config directory") {
  const fs::path dir = scratch("datafile");
  const ConstitutiveLaw law = ConstitutiveLaw::linear(testing::arc_stiffness());
  StrainBox box;
  box.lower[2] = -0.01;
  box.upper[2] = 0.01;
  {
    std::ofstream f(dir / "points.csv");
    write_data_set_csv(f, grid_data_set(law, box, 0.005));
  }
  json doc = small_config();
  doc["constitutive"] = {{"data_file", "points.csv"}, {"mode", "shared"}};
  {
    std::ofstream f(dir / "cfg.json");
    f << doc.dump(2);
  }
  const Scenario s = load_scenario(dir / "cfg.json");
  CHECK(s.constitutive.source == ConstitutiveSpec::Source::DataFile);
  CHECK(fs::path(s.constitutive.data_path).is_absolute());
  CHECK(s.material().data.size() == 5);

  doc["constitutive"]["data_file"] = "missing.csv";
  {
    std::ofstream f(dir / "cfg2.json");
    f << doc.dump(2);
  }
  CHECK_THROWS(load_scenario(dir / "cfg2.json").material());
}

TEST_CASE("number formatting round-trips") {
  testing::Rng rng(51);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-20, 20));
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(-2.0) == "-2");
}

TEST_CASE("scenario run writes consistent output files") {
  const fs::path dir = scratch("run");
  const Scenario s = parse_scenario(small_config().dump());
  const RunResult r = run_scenario(s, dir);
  REQUIRE(r.summary.ok);
  CHECK(fs::exists(dir / "summary.json"));
  CHECK_FALSE(fs::exists(dir / "failure.json"));

  std::vector<std::string> h;
  const auto traj = read_csv(dir / "trajectory.csv", &h);
  CHECK(h.size() == 1 + 12 * 5);
  CHECK(h[1] == "n1_phi_x");
  CHECK(traj.size() == 13);
  CHECK(traj.back()[0] == doctest::Approx(0.6));
  const VecX& q_last = r.trajectory.records.back().q;
  for (int i = 0; i < q_last.size(); ++i) CHECK(traj.back()[1 + i] == q_last[i]);

  std::vector<std::string> he;
  const auto el = read_csv(dir / "elements.csv", &he);
  CHECK(he.size() == 1 + 2 * 12);
  CHECK(he[1] == "el1_e1");
  CHECK(el.size() == 12);
  CHECK(el.front()[0] == doctest::Approx(0.025));

  std::vector<std::string> hd;
  const auto diag = read_csv(dir / "diagnostics.csv", &hd);
  CHECK(hd.size() == 13);
  CHECK(diag.size() == 13);

  const json sum = read_json(dir / "summary.json");
  CHECK(sum["steps_completed"] == 12);
  // Impulse of the triangle: 0.1 * sum f.
  const Vec3 total = s.loads.total_static_force();
  for (int i = 0; i < 3; ++i) {
    CHECK(sum["stationary"]["impulse"][i].get<double>() == doctest::Approx(0.1 * total[i]).epsilon(1e-12));
    CHECK(diag.back()[1 + i] == doctest::Approx(0.1 * total[i]).epsilon(1e-10));
  }
  CHECK(sum["conservation"]["load_free_steps"].get<int>() > 0);
}

TEST_CASE("zero loads give zero momenta rows") {
  const fs::path dir = scratch("zero");
  json doc = small_config();
  doc["loads"] = {{"amplitude", {{"kind", "zero"}}}, {"forces", json::array()}};
  doc["time"]["t_end"] = 0.2;
  const RunResult r = run_scenario(parse_scenario(doc.dump()), dir);
  REQUIRE(r.summary.ok);
  std::vector<std::string> h;
  for (const auto& row : read_csv(dir / "diagnostics.csv", &h))
    for (int c = 1; c <= 9; ++c) CHECK(std::abs(row[c]) <= 1e-12);
}

TEST_CASE("solver failures produce failure.json") {
  const fs::path dir = scratch("fail");
  json doc = small_config();
  doc["solver"] = {{"max_iterations", 1}, {"tolerance", 1e-300}};
  const RunResult r = run_scenario(parse_scenario(doc.dump()), dir);
  CHECK_FALSE(r.summary.ok);
  CHECK(fs::exists(dir / "failure.json"));
  CHECK_FALSE(fs::exists(dir / "summary.json"));
  const json f = read_json(dir / "failure.json");
  CHECK(f.dump().find("residual_history") != std::string::npos);
}
