#include <doctest.h>

#include <set>

#include "ddcd/self_check.hpp"

using namespace ddcd;

TEST_CASE("self-check passes on a correct build") {
  const SelfCheckReport r = run_self_check();
  CHECK(r.passed());
  CHECK(r.family_count() >= 12);
  for (const CheckResult& c : r.checks) {
    INFO(c.family << ": " << c.name);
    CHECK(c.passed);
    CHECK(c.error <= c.tolerance);
  }
}

TEST_CASE("a perturbed strain Jacobian is caught in its own family only") {
  SelfCheckOptions opt;
  opt.strain_jacobian_perturbation = 1e-4;
  const SelfCheckReport r = run_self_check(opt);
  CHECK_FALSE(r.passed());
  CHECK(r.failed_families() == std::vector<std::string>{"strain_jacobian"});
}

TEST_CASE("self-check report is deterministic for a fixed seed") {
  const SelfCheckReport a = run_self_check();
  const SelfCheckReport b = run_self_check();
  CHECK(self_check_json(a) == self_check_json(b));
}
