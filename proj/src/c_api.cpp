#include "ddcd/ddcd.h"

#include <cstring>
#include <memory>

#include <json.hpp>

#include "ddcd/dcnlp_runner.hpp"
#include "ddcd/output.hpp"
#include "ddcd/self_check.hpp"

struct ddcd_scenario {
  ddcd::Scenario scenario;
};

struct ddcd_integrator {
  ddcd::Scenario scenario;
  ddcd::BeamMesh mesh;
  std::unique_ptr<ddcd::Integrator> integrator;
};

namespace {

thread_local std::string g_last_error;

ddcd_status set_error(ddcd_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
ddcd_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const ddcd::ValidationError& e) {
    return set_error(DDCD_VALIDATION_ERROR, e.what());
  } catch (const ddcd::SolverError& e) {
    return set_error(DDCD_SOLVER_ERROR, e.what());
  } catch (const ddcd::InvalidInput& e) {
    return set_error(DDCD_VALIDATION_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(DDCD_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return set_error(DDCD_ERROR, e.what());
  }
}

ddcd_status null_argument(const char* what) {
  return set_error(DDCD_VALIDATION_ERROR, std::string("null argument: ") + what);
}

}  // namespace

extern "C" {

const char* ddcd_version(void) { return "0.1.0"; }

const char* ddcd_last_error(void) { return g_last_error.c_str(); }

void ddcd_string_free(char* s) { std::free(s); }

ddcd_status ddcd_scenario_load(const char* path, ddcd_scenario** out) {
  if (!path || !out) return null_argument("path/out");
  return guarded([&] {
    *out = new ddcd_scenario{ddcd::load_scenario(path)};
    return DDCD_OK;
  });
}

ddcd_status ddcd_scenario_parse(const char* json_text, const char* base_dir, ddcd_scenario** out) {
  if (!json_text || !out) return null_argument("json_text/out");
  return guarded([&] {
    *out = new ddcd_scenario{ddcd::parse_scenario(json_text, base_dir ? base_dir : "")};
    return DDCD_OK;
  });
}

ddcd_status ddcd_scenario_preset(const char* name, ddcd_scenario** out) {
  if (!name || !out) return null_argument("name/out");
  return guarded([&] {
    *out = new ddcd_scenario{ddcd::preset(name)};
    return DDCD_OK;
  });
}

void ddcd_scenario_free(ddcd_scenario* scenario) { delete scenario; }

ddcd_status ddcd_scenario_set_time(ddcd_scenario* scenario, double dt, double t_end) {
  if (!scenario) return null_argument("scenario");
  if (dt > 0.0) scenario->scenario.dt = dt;
  if (t_end > 0.0) scenario->scenario.t_end = t_end;
  return DDCD_OK;
}

ddcd_status ddcd_scenario_set_output_dir(ddcd_scenario* scenario, const char* directory) {
  if (!scenario || !directory) return null_argument("scenario/directory");
  scenario->scenario.output.directory = directory;
  return DDCD_OK;
}

ddcd_status ddcd_scenario_output_dir(const ddcd_scenario* scenario, char** out) {
  if (!scenario || !out) return null_argument("scenario/out");
  *out = dup_string(scenario->scenario.output.directory);
  return *out ? DDCD_OK : set_error(DDCD_ERROR, "out of memory");
}

ddcd_status ddcd_scenario_to_json(const ddcd_scenario* scenario, char** out) {
  if (!scenario || !out) return null_argument("scenario/out");
  return guarded([&] {
    *out = dup_string(ddcd::to_json(scenario->scenario));
    return DDCD_OK;
  });
}

ddcd_status ddcd_scenario_validate(const ddcd_scenario* scenario, char** problems_json) {
  if (!scenario) return null_argument("scenario");
  return guarded([&] {
    const auto problems = ddcd::validate(scenario->scenario);
    if (problems_json) *problems_json = dup_string(nlohmann::json(problems).dump(2));
    if (problems.empty()) return DDCD_OK;
    std::string msg = "scenario is invalid";
    for (const auto& p : problems) msg += "\n  " + p;
    return set_error(DDCD_VALIDATION_ERROR, msg);
  });
}

ddcd_status ddcd_run(const ddcd_scenario* scenario, const char* out_dir, char** summary_json) {
  if (!scenario) return null_argument("scenario");
  return guarded([&] {
    const std::string dir = out_dir ? out_dir : scenario->scenario.output.directory;
    const ddcd::RunResult r = ddcd::run_scenario(scenario->scenario, dir);
    if (summary_json) {
      *summary_json = dup_string(r.summary.ok ? ddcd::summary_json(r.summary) : ddcd::failure_json(r.summary));
    }
    if (!r.summary.ok) return set_error(DDCD_SOLVER_ERROR, r.summary.failure->message);
    return DDCD_OK;
  });
}

ddcd_status ddcd_dcnlp_study(const ddcd_scenario* scenario, char** report_json) {
  if (!scenario || !report_json) return null_argument("scenario/report_json");
  return guarded([&] {
    *report_json = dup_string(ddcd::dcnlp_study_json(ddcd::run_dcnlp_study(scenario->scenario)));
    return DDCD_OK;
  });
}

ddcd_status ddcd_self_check(double perturbation, char** report_json) {
  return guarded([&] {
    ddcd::SelfCheckOptions opt;
    opt.strain_jacobian_perturbation = perturbation;
    const ddcd::SelfCheckReport r = ddcd::run_self_check(opt);
    if (report_json) *report_json = dup_string(ddcd::self_check_json(r));
    if (r.passed()) return DDCD_OK;
    std::string msg = "self-check failed in:";
    for (const auto& f : r.failed_families()) msg += " " + f;
    return set_error(DDCD_SELF_CHECK_FAILED, msg);
  });
}

ddcd_status ddcd_integrator_create(const ddcd_scenario* scenario, ddcd_integrator** out) {
  if (!scenario || !out) return null_argument("scenario/out");
  return guarded([&] {
    const ddcd::Scenario& sc = scenario->scenario;
    if (auto errs = ddcd::validate(sc); !errs.empty()) throw ddcd::ValidationError(std::move(errs));
    auto h = std::unique_ptr<ddcd_integrator>(new ddcd_integrator{sc, sc.build_mesh(), nullptr});
    h->integrator = std::make_unique<ddcd::Integrator>(h->mesh, sc.loads, sc.weights(), sc.grid(), sc.material(),
                                                       sc.solver.newton, sc.solver.constraint_tolerance);
    *out = h.release();
    return DDCD_OK;
  });
}

void ddcd_integrator_free(ddcd_integrator* integrator) { delete integrator; }

ddcd_status ddcd_integrator_step(ddcd_integrator* integrator) {
  if (!integrator) return null_argument("integrator");
  return guarded([&] {
    integrator->integrator->advance();
    return DDCD_OK;
  });
}

int ddcd_integrator_finished(const ddcd_integrator* integrator) {
  return integrator ? integrator->integrator->finished() : 1;
}

int ddcd_integrator_step_index(const ddcd_integrator* integrator) {
  return integrator ? integrator->integrator->current().index : -1;
}

double ddcd_integrator_time(const ddcd_integrator* integrator) {
  return integrator ? integrator->integrator->current().time : 0.0;
}

size_t ddcd_integrator_dofs(const ddcd_integrator* integrator) {
  return integrator ? static_cast<size_t>(integrator->mesh.dofs()) : 0;
}

ddcd_status ddcd_integrator_configuration(const ddcd_integrator* integrator, double* q, size_t length) {
  if (!integrator || !q) return null_argument("integrator/q");
  const ddcd::VecX& cur = integrator->integrator->current().q;
  if (length < static_cast<size_t>(cur.size())) {
    return set_error(DDCD_VALIDATION_ERROR, "configuration buffer is too short");
  }
  std::memcpy(q, cur.data(), sizeof(double) * cur.size());
  return DDCD_OK;
}

ddcd_status ddcd_integrator_momenta(const ddcd_integrator* integrator, double* linear, double* angular_minus,
                                    double* angular_plus) {
  if (!integrator) return null_argument("integrator");
  const ddcd::StepRecord& r = integrator->integrator->current();
  for (int i = 0; i < 3; ++i) {
    if (linear) linear[i] = r.linear_momentum[i];
    if (angular_minus) angular_minus[i] = r.angular_momentum_minus[i];
    if (angular_plus) angular_plus[i] = r.angular_momentum_plus[i];
  }
  return DDCD_OK;
}

ddcd_status ddcd_integrator_diagnostics(const ddcd_integrator* integrator, int* newton_iterations,
                                        double* final_residual, double* constraint_norm) {
  if (!integrator) return null_argument("integrator");
  const ddcd::StepRecord& r = integrator->integrator->current();
  if (newton_iterations) *newton_iterations = r.newton.iterations;
  if (final_residual) *final_residual = r.newton.final_residual;
  if (constraint_norm) *constraint_norm = r.constraint_norm;
  return DDCD_OK;
}

}  // extern "C"
