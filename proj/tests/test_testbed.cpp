#include <doctest.h>

#include "hypbc/testbed.hpp"

#include <cmath>
#include <sstream>

using namespace hypbc;

TEST_CASE("wave shapes") {
  CHECK(triangle_wave(0.0) == 0.0);
  CHECK(triangle_wave(0.25) == doctest::Approx(1.0));
  CHECK(triangle_wave(0.5) == doctest::Approx(0.0));
  CHECK(triangle_wave(0.75) == doctest::Approx(-1.0));
  CHECK(triangle_wave(1.1) == doctest::Approx(0.4));
  CHECK(triangle_wave_rate(0.25) == -4.0);
  CHECK(triangle_wave_rate(0.75) == 4.0);
  CHECK(square_wave(0.0) == 1.0);
  CHECK(square_wave(0.5) == -1.0);
  CHECK(square_wave(0.999) == -1.0);
  CHECK(square_wave(1.0) == 1.0);
}

TEST_CASE("exact trajectory satisfies both halves of the DAE") {
  for (TestbedKind k : {TestbedKind::Analytic, TestbedKind::Continuous, TestbedKind::Singular}) {
    const TestbedProblem p = TestbedProblem::make(k, 0.05);
    const DaeSystem sys = build_testbed(p);
    for (double t : {0.1, 0.2, 0.33, 0.61, 0.9}) {
      const Vec v = testbed_exact(p, t);
      CHECK(std::abs(sys.g(v, t)(0)) < 1e-14);
      const double h = 1e-6;
      const Vec vdot = (testbed_exact(p, t + h) - testbed_exact(p, t - h)) / (2 * h);
      CHECK(std::abs((sys.B(v, t) * vdot)(0) - sys.b(v, t)(0)) < 1e-6);
    }
  }
}

TEST_CASE("initial point and radius") {
  const TestbedProblem p = TestbedProblem::make(TestbedKind::Analytic, 0.01);
  const Vec v = testbed_exact(p, 0.0);
  CHECK(v.norm() == doctest::Approx(2.0));
}

TEST_CASE("csv rows carry the run description") {
  std::ostringstream os;
  write_testbed_csv(os, run_testbed_convergence(TestbedKind::Analytic, 1, ProjectionPolicy{}, {10}));
  const std::string s = os.str();
  CHECK(s.rfind("problem,scheme,policy,S,steps,err_differential,err_algebraic\n", 0) == 0);
  CHECK(s.find("tp1,RK0,RK0,1,10,") != std::string::npos);
}
