#include "ddcd/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ddcd {

using nlohmann::json;

namespace {

// Reads one JSON object, recording type errors and unknown keys instead of
// stopping at the first one.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) fail(path_, "must be an object");
  }
  ~Reader() {
    if (!j_.is_object()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(where(it.key()), "unknown key");
    }
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  const json* value(const std::string& key, bool required) {
    seen_.insert(key);
    if (!has(key)) {
      if (required) fail(where(key), "missing required key");
      return nullptr;
    }
    return &j_.at(key);
  }

  void number(const std::string& key, double& out, bool required = false) {
    if (const json* v = value(key, required)) {
      if (v->is_number()) out = v->get<double>();
      else fail(where(key), "must be a number");
    }
  }

  void integer(const std::string& key, int& out, bool required = false) {
    if (const json* v = value(key, required)) {
      if (v->is_number_integer()) out = v->get<int>();
      else fail(where(key), "must be an integer");
    }
  }

  bool string(const std::string& key, std::string& out, bool required = false) {
    if (const json* v = value(key, required)) {
      if (v->is_string()) {
        out = v->get<std::string>();
        return true;
      }
      fail(where(key), "must be a string");
    }
    return false;
  }

  template <int N>
  bool vector(const std::string& key, Eigen::Matrix<double, N, 1>& out, bool required = false) {
    if (const json* v = value(key, required)) return read_vector<N>(*v, where(key), out);
    return false;
  }

  template <int N>
  bool read_vector(const json& v, const std::string& at, Eigen::Matrix<double, N, 1>& out) {
    if (!v.is_array() || v.size() != N) {
      fail(at, "must be an array of " + std::to_string(N) + " numbers");
      return false;
    }
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number()) {
        fail(at, "must be an array of " + std::to_string(N) + " numbers");
        return false;
      }
      out[i] = v[i].get<double>();
    }
    return true;
  }

  void fail(const std::string& at, const std::string& what) { errors_.push_back(at + ": " + what); }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }
  std::vector<std::string>& errors() { return errors_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void read_geometry(Reader& r, GeometrySpec& g) {
  std::string kind = "arc";
  r.string("kind", kind);
  if (kind == "arc") {
    g.kind = GeometrySpec::Kind::Arc;
    r.number("radius", g.radius, true);
    r.number("sweep_deg", g.sweep_deg);
    std::string plane = "xy";
    if (r.string("plane", plane) && plane != "xy") r.fail(r.where("plane"), "only the x-y plane is supported");
  } else if (kind == "straight") {
    g.kind = GeometrySpec::Kind::Straight;
    r.number("length", g.length, true);
  } else {
    r.fail(r.where("kind"), "must be \"arc\" or \"straight\"");
  }
  r.integer("nodes", g.nodes, true);
}

void read_inertia(Reader& r, Inertia& in) {
  r.number("e00", in.e00, true);
  r.number("e11", in.e11, true);
  r.number("e22", in.e22, true);
  r.number("e01", in.e01);
  r.number("e02", in.e02);
  r.number("e12", in.e12);
}

void read_loads(Reader& r, LoadCase& loads) {
  if (const json* amp = r.value("amplitude", true)) {
    Reader a(*amp, r.where("amplitude"), r.errors());
    std::string kind;
    a.string("kind", kind, true);
    if (kind == "zero") {
      loads.amplitude.kind = Amplitude::Kind::Zero;
    } else if (kind == "constant") {
      loads.amplitude.kind = Amplitude::Kind::Constant;
      a.number("value", loads.amplitude.value);
    } else if (kind == "triangle") {
      loads.amplitude.kind = Amplitude::Kind::Triangle;
      a.number("t_peak", loads.amplitude.t_peak);
      a.number("t_end", loads.amplitude.t_end);
    } else if (!kind.empty()) {
      a.fail(a.where("kind"), "must be \"zero\", \"constant\" or \"triangle\"");
    }
  }
  const json* forces = r.value("forces", false);
  if (!forces) return;
  if (!forces->is_array()) {
    r.fail(r.where("forces"), "must be an array");
    return;
  }
  for (std::size_t i = 0; i < forces->size(); ++i) {
    const std::string at = r.where("forces") + "[" + std::to_string(i) + "]";
    Reader f((*forces)[i], at, r.errors());
    Vec3 force = Vec3::Zero();
    const bool ok = f.vector<3>("force", force, true);
    std::vector<int> nodes;
    if (f.has("node") && f.has("nodes")) f.fail(at, "give either \"node\" or \"nodes\"");
    if (const json* n = f.value("node", false)) {
      if (n->is_number_integer()) nodes.push_back(n->get<int>());
      else f.fail(f.where("node"), "must be an integer");
    }
    if (const json* n = f.value("nodes", false)) {
      if (!n->is_array() || n->empty()) {
        f.fail(f.where("nodes"), "must be a non-empty array of integers");
      } else {
        for (const json& v : *n) {
          if (v.is_number_integer()) nodes.push_back(v.get<int>());
          else f.fail(f.where("nodes"), "must be a non-empty array of integers");
        }
      }
    }
    if (!f.has("node") && !f.has("nodes")) f.fail(at, "missing \"node\" or \"nodes\"");
    if (!ok) continue;
    for (int n : nodes) loads.forces.push_back({n - 1, force});
  }
}

void read_constitutive(Reader& r, ConstitutiveSpec& c) {
  std::string law;
  const bool has_data = r.has("data_file");
  const bool has_law = r.string("law", law, !has_data);
  Vec6 stiffness = Vec6::Ones();
  r.vector<6>("stiffness", stiffness, has_law);
  r.number("quadratic_factor", c.quadratic_factor);
  if (has_law) {
    c.has_law = true;
    if (law == "linear") {
      c.law = ConstitutiveLaw::linear(stiffness);
      if (r.has("quadratic_factor")) r.fail(r.where("quadratic_factor"), "not used by the linear law");
    } else if (law == "explicit_quadratic" || law == "implicit_quadratic") {
      if (!r.has("quadratic_factor")) r.fail(r.where("quadratic_factor"), "missing required key");
      c.law = law == "explicit_quadratic" ? ConstitutiveLaw::explicit_quadratic(stiffness, c.quadratic_factor)
                                          : ConstitutiveLaw::implicit_quadratic(stiffness, c.quadratic_factor);
    } else {
      r.fail(r.where("law"), "unknown law \"" + law + "\"");
    }
  }
  if (r.string("data_file", c.data_path)) c.source = ConstitutiveSpec::Source::DataFile;
  std::string mode;
  if (r.string("mode", mode)) {
    try {
      c.mode = parse_dcnlp_mode(mode);
    } catch (const InvalidInput&) {
      r.fail(r.where("mode"), "must be \"shared\", \"coordinate_descent\" or \"exhaustive\"");
    }
  }
}

void read_solver(Reader& r, SolverSpec& s) {
  r.number("tolerance", s.newton.tolerance);
  r.integer("max_iterations", s.newton.max_iterations);
  r.number("constraint_tolerance", s.constraint_tolerance);
  std::string backend;
  if (r.string("linear_solver", backend)) {
    try {
      s.newton.backend = parse_linear_backend(backend);
    } catch (const InvalidInput&) {
      r.fail(r.where("linear_solver"), "must be \"sparse\" or \"dense\"");
    }
  }
}

void read_output(Reader& r, OutputSpec& o) {
  r.string("directory", o.directory);
  if (const json* e = r.value("elements", false)) {
    o.elements.clear();
    if (!e->is_array()) {
      r.fail(r.where("elements"), "must be an array of integers");
    } else {
      for (const json& v : *e) {
        if (v.is_number_integer()) o.elements.push_back(v.get<int>());
        else r.fail(r.where("elements"), "must be an array of integers");
      }
    }
  }
  if (const json* ref = r.value("reference", false)) {
    Reader f(*ref, r.where("reference"), r.errors());
    ReferenceValues rv;
    f.integer("node", rv.node, true);
    Vec3 v;
    if (f.vector<3>("position", v)) rv.position = v;
    if (f.vector<3>("d1", v)) rv.d1 = v;
    if (f.vector<3>("d2", v)) rv.d2 = v;
    if (f.vector<3>("d3", v)) rv.d3 = v;
    if (f.vector<3>("linear_momentum", v)) rv.linear_momentum = v;
    if (f.vector<3>("angular_momentum", v)) rv.angular_momentum = v;
    o.reference = rv;
  }
}

void read_dcnlp(Reader& r, DcnlpStudySpec& d) {
  std::string mode;
  if (r.string("mode", mode)) {
    try {
      d.mode = parse_dcnlp_mode(mode);
    } catch (const InvalidInput&) {
      r.fail(r.where("mode"), "must be \"shared\", \"coordinate_descent\" or \"exhaustive\"");
    }
  }
  r.vector<6>("strain_lower", d.box.lower, true);
  r.vector<6>("strain_upper", d.box.upper, true);
  r.integer("steps", d.steps);
  if (const json* s = r.value("spacings", true)) {
    if (!s->is_array() || s->empty()) {
      r.fail(r.where("spacings"), "must be a non-empty array of numbers");
    } else {
      for (const json& v : *s) {
        if (v.is_number()) d.spacings.push_back(v.get<double>());
        else r.fail(r.where("spacings"), "must be a non-empty array of numbers");
      }
    }
  }
}

json vec_json(const Eigen::Ref<const VecX>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> errs;
  auto finite_pos = [](double x) { return std::isfinite(x) && x > 0.0; };
  const GeometrySpec& g = s.geometry;
  if (g.nodes < 2) errs.push_back("geometry.nodes: must be at least 2");
  if (g.kind == GeometrySpec::Kind::Arc) {
    if (!finite_pos(g.radius)) errs.push_back("geometry.radius: must be positive");
    if (!finite_pos(g.sweep_deg) || g.sweep_deg > 360.0) {
      errs.push_back("geometry.sweep_deg: must lie in (0, 360]");
    }
  } else if (!finite_pos(g.length)) {
    errs.push_back("geometry.length: must be positive");
  }
  const Inertia& in = s.inertia;
  for (double x : {in.e00, in.e11, in.e22, in.e01, in.e02, in.e12}) {
    if (!std::isfinite(x)) {
      errs.push_back("inertia: coefficients must be finite");
      break;
    }
  }
  if (in.e00 < 0.0 || in.e11 < 0.0 || in.e22 < 0.0) errs.push_back("inertia: e00, e11, e22 must be non-negative");
  if (!(in.e00 > 0.0)) errs.push_back("inertia.e00: must be positive");

  if (!finite_pos(s.dt)) {
    errs.push_back("time.dt: must be positive");
  } else if (!(s.t_end > s.t_start)) {
    errs.push_back("time.t_end: must exceed time.t_start");
  } else {
    try {
      TimeGrid::make(s.t_start, s.t_end, s.dt);
    } catch (const InvalidInput& e) {
      errs.push_back(std::string("time: ") + e.what());
    }
  }

  const Amplitude& a = s.loads.amplitude;
  if (a.kind == Amplitude::Kind::Triangle && !(a.t_peak > 0.0 && a.t_end > a.t_peak)) {
    errs.push_back("loads.amplitude: triangle needs 0 < t_peak < t_end");
  }
  if (a.kind == Amplitude::Kind::Constant && !std::isfinite(a.value)) {
    errs.push_back("loads.amplitude.value: must be finite");
  }
  for (const NodalForce& f : s.loads.forces) {
    if (f.node < 0 || f.node >= g.nodes) {
      errs.push_back("loads.forces: node " + std::to_string(f.node + 1) + " is not in 1.." +
                     std::to_string(g.nodes));
    }
    if (!f.force.allFinite()) errs.push_back("loads.forces: force components must be finite");
  }

  const ConstitutiveSpec& c = s.constitutive;
  const bool needs_law = c.source == ConstitutiveSpec::Source::Law || s.dcnlp.has_value();
  if (needs_law && !c.has_law) {
    errs.push_back("constitutive.law: a constitutive law is required here");
  } else if (needs_law) {
    try {
      c.law.validate();
    } catch (const InvalidInput& e) {
      errs.push_back(std::string("constitutive: ") + e.what());
    }
  }
  if (c.source == ConstitutiveSpec::Source::DataFile) {
    if (c.data_path.empty()) errs.push_back("constitutive.data_file: must not be empty");
    if (c.mode == DcnlpMode::Exhaustive && g.nodes - 1 > kExhaustiveMaxElements) {
      errs.push_back("constitutive.mode: exhaustive enumeration needs at most " +
                     std::to_string(kExhaustiveMaxElements) + " elements");
    }
  }

  for (int i = 0; i < 6; ++i) {
    if (!finite_pos(s.weight_diagonal[i])) {
      errs.push_back("weights.diagonal: entries must be positive (weight matrix must be SPD)");
      break;
    }
  }

  if (!finite_pos(s.solver.newton.tolerance)) errs.push_back("solver.tolerance: must be positive");
  if (s.solver.newton.max_iterations < 1) errs.push_back("solver.max_iterations: must be at least 1");
  if (!finite_pos(s.solver.constraint_tolerance)) errs.push_back("solver.constraint_tolerance: must be positive");

  if (s.output.directory.empty()) errs.push_back("output.directory: must not be empty");
  for (int e : s.output.elements) {
    if (e < 1 || e > g.nodes - 1) {
      errs.push_back("output.elements: element " + std::to_string(e) + " is not in 1.." +
                     std::to_string(std::max(g.nodes - 1, 0)));
    }
  }
  if (s.output.reference && (s.output.reference->node < 1 || s.output.reference->node > g.nodes)) {
    errs.push_back("output.reference.node: must be a node of the mesh");
  }

  if (s.dcnlp) {
    const DcnlpStudySpec& d = *s.dcnlp;
    if (d.steps < 1) errs.push_back("dcnlp.steps: must be at least 1");
    if (s.dt > 0.0 && d.steps > std::lround((s.t_end - s.t_start) / s.dt)) {
      errs.push_back("dcnlp.steps: exceeds the steps of the time grid");
    }
    for (double h : d.spacings) {
      if (!finite_pos(h)) errs.push_back("dcnlp.spacings: entries must be positive");
    }
    for (int i = 0; i < 6; ++i) {
      if (!(d.box.lower[i] <= d.box.upper[i])) {
        errs.push_back("dcnlp: strain_lower must not exceed strain_upper");
        break;
      }
    }
    if (d.mode == DcnlpMode::Exhaustive && g.nodes - 1 > kExhaustiveMaxElements) {
      errs.push_back("dcnlp.mode: exhaustive enumeration needs at most " +
                     std::to_string(kExhaustiveMaxElements) + " elements");
    }
  }
  return errs;
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("config is not valid JSON: ") + e.what()});
  }
  std::vector<std::string> errs;
  Scenario s;
  {
    Reader root(doc, "", errs);
    root.string("name", s.name);
    if (const json* v = root.value("geometry", true)) {
      Reader r(*v, "geometry", errs);
      read_geometry(r, s.geometry);
    }
    if (const json* v = root.value("inertia", true)) {
      Reader r(*v, "inertia", errs);
      read_inertia(r, s.inertia);
    }
    if (const json* v = root.value("time", true)) {
      Reader r(*v, "time", errs);
      r.number("t_start", s.t_start);
      r.number("t_end", s.t_end, true);
      r.number("dt", s.dt, true);
    }
    if (const json* v = root.value("loads", true)) {
      Reader r(*v, "loads", errs);
      read_loads(r, s.loads);
    }
    if (const json* v = root.value("constitutive", true)) {
      Reader r(*v, "constitutive", errs);
      read_constitutive(r, s.constitutive);
    }
    if (const json* v = root.value("weights", false)) {
      Reader r(*v, "weights", errs);
      r.vector<6>("diagonal", s.weight_diagonal, true);
    }
    if (const json* v = root.value("solver", false)) {
      Reader r(*v, "solver", errs);
      read_solver(r, s.solver);
    }
    if (const json* v = root.value("output", false)) {
      Reader r(*v, "output", errs);
      read_output(r, s.output);
    }
    if (const json* v = root.value("dcnlp", false)) {
      Reader r(*v, "dcnlp", errs);
      DcnlpStudySpec d;
      read_dcnlp(r, d);
      s.dcnlp = d;
    }
  }
  if (!s.constitutive.data_path.empty() && !base_dir.empty()) {
    const std::filesystem::path p(s.constitutive.data_path);
    if (p.is_relative()) s.constitutive.data_path = (base_dir / p).string();
  }
  for (auto& e : validate(s)) errs.push_back(std::move(e));
  if (!errs.empty()) throw ValidationError(std::move(errs));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open config file '" + path.string() + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

std::string to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  const GeometrySpec& g = s.geometry;
  if (g.kind == GeometrySpec::Kind::Arc) {
    j["geometry"] = {{"kind", "arc"}, {"radius", g.radius}, {"sweep_deg", g.sweep_deg}, {"plane", "xy"}, {"nodes", g.nodes}};
  } else {
    j["geometry"] = {{"kind", "straight"}, {"length", g.length}, {"nodes", g.nodes}};
  }
  const Inertia& in = s.inertia;
  j["inertia"] = {{"e00", in.e00}, {"e11", in.e11}, {"e22", in.e22},
                  {"e01", in.e01}, {"e02", in.e02}, {"e12", in.e12}};
  j["time"] = {{"t_start", s.t_start}, {"t_end", s.t_end}, {"dt", s.dt}};

  const Amplitude& a = s.loads.amplitude;
  json amp;
  switch (a.kind) {
    case Amplitude::Kind::Zero:
      amp = {{"kind", "zero"}};
      break;
    case Amplitude::Kind::Constant:
      amp = {{"kind", "constant"}, {"value", a.value}};
      break;
    case Amplitude::Kind::Triangle:
      amp = {{"kind", "triangle"}, {"t_peak", a.t_peak}, {"t_end", a.t_end}};
      break;
  }
  json forces = json::array();
  for (const NodalForce& f : s.loads.forces) forces.push_back({{"node", f.node + 1}, {"force", vec_json(f.force)}});
  j["loads"] = {{"amplitude", amp}, {"forces", forces}};

  const ConstitutiveSpec& c = s.constitutive;
  json cj;
  if (c.has_law) {
    cj["law"] = to_string(c.law.variant);
    cj["stiffness"] = vec_json(c.law.stiffness);
    if (c.law.variant != ConstitutiveLaw::Variant::Linear) cj["quadratic_factor"] = c.quadratic_factor;
  }
  if (c.source == ConstitutiveSpec::Source::DataFile) {
    cj["data_file"] = c.data_path;
    cj["mode"] = to_string(c.mode);
  }
  j["constitutive"] = cj;
  j["weights"] = {{"diagonal", vec_json(s.weight_diagonal)}};
  j["solver"] = {{"tolerance", s.solver.newton.tolerance},
                 {"max_iterations", s.solver.newton.max_iterations},
                 {"linear_solver", to_string(s.solver.newton.backend)},
                 {"constraint_tolerance", s.solver.constraint_tolerance}};
  json out = {{"directory", s.output.directory}, {"elements", s.output.elements}};
  if (s.output.reference) {
    const ReferenceValues& r = *s.output.reference;
    json rj = {{"node", r.node}};
    if (r.position) rj["position"] = vec_json(*r.position);
    if (r.d1) rj["d1"] = vec_json(*r.d1);
    if (r.d2) rj["d2"] = vec_json(*r.d2);
    if (r.d3) rj["d3"] = vec_json(*r.d3);
    if (r.linear_momentum) rj["linear_momentum"] = vec_json(*r.linear_momentum);
    if (r.angular_momentum) rj["angular_momentum"] = vec_json(*r.angular_momentum);
    out["reference"] = rj;
  }
  j["output"] = out;
  if (s.dcnlp) {
    const DcnlpStudySpec& d = *s.dcnlp;
    j["dcnlp"] = {{"mode", to_string(d.mode)},
                  {"strain_lower", vec_json(d.box.lower)},
                  {"strain_upper", vec_json(d.box.upper)},
                  {"spacings", d.spacings},
                  {"steps", d.steps}};
  }
  return j.dump(2);
}

BeamMesh Scenario::build_mesh() const {
  const int elements = geometry.nodes - 1;
  if (geometry.kind == GeometrySpec::Kind::Arc) {
    return make_arc_mesh(geometry.radius, geometry.sweep_deg * std::numbers::pi / 180.0, elements, inertia);
  }
  return make_straight_mesh(geometry.length, elements, inertia);
}

TimeGrid Scenario::grid() const { return TimeGrid::make(t_start, t_end, dt); }

ElementWeights Scenario::weights() const {
  return ElementWeights::uniform(geometry.nodes - 1, Mat6(weight_diagonal.asDiagonal()));
}

MaterialModel Scenario::material() const {
  if (constitutive.source == ConstitutiveSpec::Source::Law) return MaterialModel::manifold(constitutive.law);
  return MaterialModel::data_set(load_data_set_csv(constitutive.data_path), constitutive.mode);
}

std::optional<double> Scenario::symmetry_radius() const {
  if (geometry.kind == GeometrySpec::Kind::Arc && std::abs(geometry.sweep_deg - 90.0) < 1e-12) {
    return geometry.radius;
  }
  return std::nullopt;
}

}  // namespace ddcd
