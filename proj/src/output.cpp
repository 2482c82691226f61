#include "ddcd/output.hpp"

#include <charconv>
#include <chrono>
#include <cmath>

#include <json.hpp>

namespace ddcd {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  return out;
}

void put(std::ofstream& out, double x) { out << ',' << format_number(x); }

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& directory, int node_count, std::vector<int> elements,
                     double dt)
    : dt_(dt) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw InvalidInput("cannot create output directory '" + directory.string() + "': " + ec.message());
  for (int e : elements) elements_sel_.push_back(e - 1);

  trajectory_ = open_csv(directory / "trajectory.csv");
  trajectory_ << 't';
  static const char* fields[] = {"phi", "d1", "d2", "d3"};
  for (int a = 1; a <= node_count; ++a)
    for (const char* f : fields)
      for (const char* c : {"x", "y", "z"}) trajectory_ << ",n" << a << '_' << f << '_' << c;
  trajectory_ << '\n';

  elements_ = open_csv(directory / "elements.csv");
  elements_ << 't';
  for (int e : elements) {
    for (int i = 1; i <= 6; ++i) elements_ << ",el" << e << "_e" << i;
    for (int i = 1; i <= 6; ++i) elements_ << ",el" << e << "_s" << i;
  }
  elements_ << '\n';

  diagnostics_ = open_csv(directory / "diagnostics.csv");
  diagnostics_ << "t,l_x,l_y,l_z,j_minus_x,j_minus_y,j_minus_z,j_plus_x,j_plus_y,j_plus_z,"
                  "g_inf,newton_iterations,final_residual\n";
}

void CsvWriter::write(const StepRecord& r) {
  trajectory_ << format_number(r.time);
  for (Eigen::Index i = 0; i < r.q.size(); ++i) put(trajectory_, r.q[i]);
  trajectory_ << '\n';

  if (r.index > 0) {
    elements_ << format_number(r.time - 0.5 * dt_);
    for (int e : elements_sel_) {
      for (int i = 0; i < 6; ++i) put(elements_, r.strain[6 * e + i]);
      for (int i = 0; i < 6; ++i) put(elements_, r.stress[6 * e + i]);
    }
    elements_ << '\n';
  }

  diagnostics_ << format_number(r.time);
  for (int i = 0; i < 3; ++i) put(diagnostics_, r.linear_momentum[i]);
  for (int i = 0; i < 3; ++i) put(diagnostics_, r.angular_momentum_minus[i]);
  for (int i = 0; i < 3; ++i) put(diagnostics_, r.angular_momentum_plus[i]);
  put(diagnostics_, r.constraint_norm);
  diagnostics_ << ',' << r.newton.iterations;
  put(diagnostics_, r.newton.final_residual);
  diagnostics_ << '\n';

  trajectory_.flush();
  elements_.flush();
  diagnostics_.flush();
}

RunSummary summarize(const Scenario& sc, const Trajectory& traj, double wall_time_s) {
  RunSummary s;
  s.name = sc.name;
  s.dt = sc.dt;
  s.t_end = sc.t_end;
  s.wall_time_s = wall_time_s;
  s.steps_total = static_cast<int>(std::lround((sc.t_end - sc.t_start) / sc.dt));
  s.steps_completed = traj.records.empty() ? 0 : static_cast<int>(traj.records.size()) - 1;
  s.failure = traj.failure;
  s.ok = !traj.failure.has_value();

  const auto radius = sc.symmetry_radius();
  long iterations = 0;
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    const StepRecord& r = traj.records[k];
    s.max_constraint_norm = std::max(s.max_constraint_norm, r.constraint_norm);
    if (radius) {
      const double d = mirror_symmetry_defect(r.q, *radius);
      s.symmetry_defect_max = std::max(s.symmetry_defect_max.value_or(0.0), d);
      s.symmetry_defect_final = d;
    }
    if (k == 0) continue;
    iterations += r.newton.iterations;
    s.max_iterations = std::max(s.max_iterations, r.newton.iterations);
    s.max_final_residual = std::max(s.max_final_residual, r.newton.final_residual);
    s.max_relative_residual =
        std::max(s.max_relative_residual, r.newton.final_residual / (1.0 + r.newton.initial_residual));

    // Record k carries the momenta after the balance at t_{k-1}; that balance
    // sees the loads at t_{k-1} -/+ dt/2.
    const double t_node = traj.records[k - 1].time;
    const Amplitude& a = sc.loads.amplitude;
    if (k >= 2 && a(t_node - 0.5 * sc.dt) == 0.0 && a(t_node + 0.5 * sc.dt) == 0.0) {
      const StepRecord& p = traj.records[k - 1];
      ++s.load_free_steps;
      const Vec3 dl = (r.linear_momentum - p.linear_momentum).cwiseAbs();
      const Vec3 dj = (r.angular_momentum_minus - p.angular_momentum_minus).cwiseAbs();
      s.max_linear_drift = s.max_linear_drift.cwiseMax(dl);
      s.max_angular_drift = s.max_angular_drift.cwiseMax(dj);
      for (int i = 0; i < 3; ++i) {
        s.max_relative_linear_drift =
            std::max(s.max_relative_linear_drift, dl[i] / (1.0 + std::abs(p.linear_momentum[i])));
        s.max_relative_angular_drift =
            std::max(s.max_relative_angular_drift, dj[i] / (1.0 + std::abs(p.angular_momentum_minus[i])));
      }
    }
  }
  if (s.steps_completed > 0) s.mean_iterations = static_cast<double>(iterations) / s.steps_completed;
  if (!traj.records.empty()) {
    const StepRecord& last = traj.records.back();
    s.linear_momentum = last.linear_momentum;
    s.angular_momentum_minus = last.angular_momentum_minus;
    s.angular_momentum_plus = last.angular_momentum_plus;
  }
  if (sc.loads.amplitude.kind == Amplitude::Kind::Triangle) {
    s.impulse = 0.5 * sc.loads.amplitude.t_end * sc.loads.total_static_force();
  } else if (sc.loads.amplitude.kind == Amplitude::Kind::Zero) {
    s.impulse = Vec3::Zero();
  }

  if (sc.output.reference && !traj.records.empty()) {
    const ReferenceValues& ref = *sc.output.reference;
    s.reference_node = ref.node;
    const VecX& q = traj.records.back().q;
    const NodeState n = NodeState::from_flat(q.segment<12>(12 * (ref.node - 1)));
    s.node_position = n.position;
    if (ref.position) s.position_deviation = (n.position - *ref.position).lpNorm<Eigen::Infinity>();
    if (ref.d1 && ref.d2 && ref.d3) {
      s.director_deviation = std::max({(n.d1 - *ref.d1).lpNorm<Eigen::Infinity>(),
                                       (n.d2 - *ref.d2).lpNorm<Eigen::Infinity>(),
                                       (n.d3 - *ref.d3).lpNorm<Eigen::Infinity>()});
    }
    if (ref.linear_momentum) {
      s.linear_momentum_magnitude_deviation =
          (s.linear_momentum.cwiseAbs() - ref.linear_momentum->cwiseAbs()).cwiseAbs();
    }
    if (ref.angular_momentum) {
      s.angular_momentum_magnitude_deviation =
          (s.angular_momentum_minus.cwiseAbs() - ref.angular_momentum->cwiseAbs()).cwiseAbs();
    }
  }
  return s;
}

namespace {

json summary_object(const RunSummary& s) {
  json j;
  j["name"] = s.name;
  j["status"] = s.ok ? "ok" : "solver_failure";
  j["dt"] = s.dt;
  j["t_end"] = s.t_end;
  j["steps_total"] = s.steps_total;
  j["steps_completed"] = s.steps_completed;
  j["wall_time_s"] = s.wall_time_s;
  j["newton"] = {{"mean_iterations", s.mean_iterations},
                 {"max_iterations", s.max_iterations},
                 {"max_final_residual", s.max_final_residual},
                 {"max_relative_residual", s.max_relative_residual}};
  j["max_constraint_norm"] = s.max_constraint_norm;
  json st = {{"linear_momentum", vec_json(s.linear_momentum)},
             {"angular_momentum_minus", vec_json(s.angular_momentum_minus)},
             {"angular_momentum_plus", vec_json(s.angular_momentum_plus)}};
  if (s.impulse) st["impulse"] = vec_json(*s.impulse);
  j["stationary"] = st;
  j["conservation"] = {{"load_free_steps", s.load_free_steps},
                       {"max_linear_drift", vec_json(s.max_linear_drift)},
                       {"max_angular_drift", vec_json(s.max_angular_drift)},
                       {"max_relative_linear_drift", s.max_relative_linear_drift},
                       {"max_relative_angular_drift", s.max_relative_angular_drift}};
  if (s.symmetry_defect_final) {
    j["symmetry"] = {{"defect_final", *s.symmetry_defect_final}, {"defect_max", *s.symmetry_defect_max}};
  }
  if (s.reference_node > 0) {
    json r = {{"node", s.reference_node}};
    if (s.node_position) r["position"] = vec_json(*s.node_position);
    if (s.position_deviation) r["position_deviation"] = *s.position_deviation;
    if (s.director_deviation) r["director_deviation"] = *s.director_deviation;
    if (s.linear_momentum_magnitude_deviation) {
      r["linear_momentum_magnitude_deviation"] = vec_json(*s.linear_momentum_magnitude_deviation);
    }
    if (s.angular_momentum_magnitude_deviation) {
      r["angular_momentum_magnitude_deviation"] = vec_json(*s.angular_momentum_magnitude_deviation);
    }
    j["reference"] = r;
  }
  return j;
}

}  // namespace

std::string summary_json(const RunSummary& s) { return summary_object(s).dump(2) + "\n"; }

std::string failure_json(const RunSummary& s) {
  json j = summary_object(s);
  if (s.failure) {
    j["failure"] = {{"step", s.failure->step},
                    {"time", s.failure->time},
                    {"message", s.failure->message},
                    {"residual_history", s.failure->residual_history}};
  }
  return j.dump(2) + "\n";
}

RunResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
  if (auto errs = validate(sc); !errs.empty()) throw ValidationError(std::move(errs));
  const BeamMesh mesh = sc.build_mesh();
  Integrator integrator(mesh, sc.loads, sc.weights(), sc.grid(), sc.material(), sc.solver.newton,
                        sc.solver.constraint_tolerance);
  std::vector<int> selected = sc.output.elements;
  if (selected.empty()) selected.push_back((mesh.element_count() + 1) / 2);
  CsvWriter writer(out_dir, mesh.node_count(), selected, sc.dt);

  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.trajectory = run(integrator, [&](const StepRecord& r) { writer.write(r); });
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.summary = summarize(sc, res.trajectory, wall);

  const bool ok = res.summary.ok;
  std::filesystem::remove(out_dir / (ok ? "failure.json" : "summary.json"));
  std::ofstream out(out_dir / (ok ? "summary.json" : "failure.json"), std::ios::trunc);
  if (!out) throw InvalidInput("cannot write the run summary in '" + out_dir.string() + "'");
  out << (ok ? summary_json(res.summary) : failure_json(res.summary));
  return res;
}

}  // namespace ddcd
