#include <doctest.h>

#include "property_checks.hpp"

using namespace hypbc::checks;

namespace {

void require_clean(const CheckOutcome& o) {
  INFO(o.name << ": " << o.failures << " of " << o.cases << " failed, worst " << o.worst << ", first: "
              << o.first_failure);
  CHECK(o.cases > 0);
  CHECK(o.failures == 0);
}

}  // namespace

TEST_CASE("eigendecomposition invariants on random states") { require_clean(eigen_invariants()); }
TEST_CASE("stencil moment constraints") { require_clean(stencil_moments()); }
TEST_CASE("ghost-point identities") { require_clean(ghost_identities()); }
TEST_CASE("projector idempotence") { require_clean(projector_idempotence()); }
TEST_CASE("minmod and central-upwind consistency") { require_clean(minmod_central_upwind()); }
TEST_CASE("growth polynomial closed forms") { require_clean(growth_polynomial()); }
TEST_CASE("blended-Euler perturbation bound") { require_clean(blended_euler_bound()); }
