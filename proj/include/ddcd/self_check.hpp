#pragma once

// Finite-difference and oracle checks of every analytic operator, runnable
// from the command line on an installed build.

#include <cstdint>
#include <string>
#include <vector>

namespace ddcd {

struct SelfCheckOptions {
  int samples = 20;
  double step = 1e-6;       // central difference step
  double tolerance = 1e-6;  // scaled error bound for derivative checks
  std::uint64_t seed = 20240531;
  /// Mutation hook: added to every entry of B inside the strain_jacobian
  /// family only, to confirm that a broken B is caught there.
  double strain_jacobian_perturbation = 0.0;
};

struct CheckResult {
  std::string family;
  std::string name;
  bool passed = false;
  double error = 0.0;  // worst over samples
  double tolerance = 0.0;
  int samples = 0;
};

struct SelfCheckReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  int family_count() const;
  std::vector<std::string> failed_families() const;
};

SelfCheckReport run_self_check(const SelfCheckOptions& options = {});
std::string self_check_json(const SelfCheckReport& report);

}  // namespace ddcd
