// Runs the randomized invariant suites and requires full instance counts
// with zero violations.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "property_suites.hpp"

TEST_CASE("all randomized invariant suites: 200+ instances, zero violations") {
  auto results = propsuite::run_all();
  CHECK(results.size() == 12);
  for (const auto& suite : results) {
    INFO(suite.name);
    CHECK(suite.instances >= 200);
    CHECK(suite.violations == 0);
  }
}
