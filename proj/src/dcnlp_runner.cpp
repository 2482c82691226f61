#include "ddcd/dcnlp_runner.hpp"

#include <algorithm>

#include <json.hpp>

namespace ddcd {

namespace {

std::vector<StepRecord> march(const BeamMesh& mesh, const Scenario& sc, MaterialModel material, int steps) {
  Integrator it(mesh, sc.loads, sc.weights(), sc.grid(), std::move(material), sc.solver.newton,
                sc.solver.constraint_tolerance);
  std::vector<StepRecord> out;
  for (int k = 0; k < steps; ++k) out.push_back(it.advance());
  return out;
}

DcnlpLevel compare(const BeamMesh& mesh, const Scenario& sc, const std::vector<StepRecord>& approx,
                   const MeasurementDataSet& data, DcnlpMode mode, int steps) {
  DcnlpLevel level;
  level.data_points = static_cast<int>(data.size());
  const auto exact = march(mesh, sc, MaterialModel::data_set(data, mode), steps);
  for (int k = 0; k < steps; ++k) {
    DcnlpStepComparison c;
    c.step = exact[k].index;
    c.time = exact[k].time;
    c.assignment = exact[k].assignment;
    c.dcnlp_cost = exact[k].cost;
    c.approx_cost = approx[k].cost;
    c.q_difference = (exact[k].q - approx[k].q).lpNorm<Eigen::Infinity>();
    level.max_q_difference = std::max(level.max_q_difference, c.q_difference);
    level.steps.push_back(std::move(c));
  }
  return level;
}

}  // namespace

DcnlpStudy run_dcnlp_study(const Scenario& sc) {
  if (auto errs = validate(sc); !errs.empty()) throw ValidationError(std::move(errs));
  if (!sc.constitutive.has_law) throw ValidationError({"constitutive.law: the DCNLP study compares against a law"});
  const bool has_file = sc.constitutive.source == ConstitutiveSpec::Source::DataFile;
  if (!sc.dcnlp && !has_file) {
    throw ValidationError({"dcnlp: a dcnlp section or a constitutive data_file is required"});
  }
  DcnlpStudy study;
  study.name = sc.name;
  study.mode = sc.dcnlp ? sc.dcnlp->mode : sc.constitutive.mode;
  study.steps = sc.dcnlp ? sc.dcnlp->steps : 1;

  const BeamMesh mesh = sc.build_mesh();
  const auto approx = march(mesh, sc, MaterialModel::manifold(sc.constitutive.law), study.steps);
  if (sc.dcnlp) {
    for (double h : sc.dcnlp->spacings) {
      DcnlpLevel level = compare(mesh, sc, approx, grid_data_set(sc.constitutive.law, sc.dcnlp->box, h),
                                 study.mode, study.steps);
      level.source = "grid";
      level.spacing = h;
      study.levels.push_back(std::move(level));
    }
    std::vector<const DcnlpLevel*> grid;
    for (const auto& l : study.levels) grid.push_back(&l);
    std::sort(grid.begin(), grid.end(), [](auto* a, auto* b) { return a->spacing > b->spacing; });
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (grid[i]->max_q_difference > grid[i - 1]->max_q_difference) study.monotone = false;
    }
  }
  if (has_file) {
    DcnlpLevel level = compare(mesh, sc, approx, load_data_set_csv(sc.constitutive.data_path),
                               sc.constitutive.mode, study.steps);
    level.source = sc.constitutive.data_path;
    study.levels.push_back(std::move(level));
  }
  return study;
}

std::string dcnlp_study_json(const DcnlpStudy& s) {
  using nlohmann::json;
  json levels = json::array();
  for (const DcnlpLevel& l : s.levels) {
    json steps = json::array();
    for (const DcnlpStepComparison& c : l.steps) {
      steps.push_back({{"step", c.step},
                       {"time", c.time},
                       {"assignment", c.assignment},
                       {"dcnlp_cost", c.dcnlp_cost},
                       {"approx_cost", c.approx_cost},
                       {"q_difference", c.q_difference}});
    }
    levels.push_back({{"source", l.source},
                      {"spacing", l.spacing},
                      {"data_points", l.data_points},
                      {"max_q_difference", l.max_q_difference},
                      {"steps", steps}});
  }
  json j = {{"name", s.name}, {"mode", to_string(s.mode)}, {"steps", s.steps},
            {"monotone", s.monotone}, {"levels", levels}};
  return j.dump(2) + "\n";
}

}  // namespace ddcd
