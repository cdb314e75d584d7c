#include "hypbc/testbed.hpp"

#include "hypbc/csv.hpp"
#include "hypbc/errors.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace hypbc {

namespace {

double frac(double t) { return t - std::floor(t); }

}  // namespace

std::string to_string(TestbedKind kind) {
  switch (kind) {
    case TestbedKind::Analytic: return "tp1";
    case TestbedKind::Continuous: return "tp2";
    case TestbedKind::Discontinuous: return "tp3";
    case TestbedKind::Singular: return "tp4";
  }
  return "?";
}

TestbedKind testbed_kind_from_string(const std::string& name) {
  if (name == "tp1" || name == "analytic") return TestbedKind::Analytic;
  if (name == "tp2" || name == "continuous") return TestbedKind::Continuous;
  if (name == "tp3" || name == "discontinuous") return TestbedKind::Discontinuous;
  if (name == "tp4" || name == "singular") return TestbedKind::Singular;
  throw ConfigError("problem", "unknown manifold test problem '" + name + "'");
}

double triangle_wave(double t) {
  const double p = frac(t + 0.25) - 0.25;  // p in [-1/4, 3/4)
  return p <= 0.25 ? 4.0 * p : 2.0 - 4.0 * p;
}

double triangle_wave_rate(double t) {
  const double p = frac(t + 0.25) - 0.25;
  return p < 0.25 ? 4.0 : -4.0;
}

double square_wave(double t) { return frac(t) < 0.5 ? 1.0 : -1.0; }

double square_wave_rate(double) { return 0.0; }

TestbedProblem TestbedProblem::make(TestbedKind kind, double dt) {
  using std::numbers::pi;
  TestbedProblem p;
  p.kind = kind;
  p.h1 = [](double t) { return t * t * t / 3.0; };
  p.h1_rate = [](double t) { return t * t; };
  p.h2 = [](double t) { return 1.0 + std::sin(2.0 * pi * t) / 2.0; };
  p.h2_rate = [](double t) { return pi * std::cos(2.0 * pi * t); };
  switch (kind) {
    case TestbedKind::Analytic: break;
    case TestbedKind::Continuous:
      p.h2 = [](double t) { return 1.0 + triangle_wave(t) / 2.0; };
      p.h2_rate = [](double t) { return triangle_wave_rate(t) / 2.0; };
      break;
    case TestbedKind::Discontinuous:
      p.h2 = [](double t) { return 1.0 + square_wave(t) / 2.0; };
      p.h2_rate = [](double t) { return square_wave_rate(t) / 2.0; };
      break;
    case TestbedKind::Singular:
      p.h1 = [dt](double t) { return std::tanh((t - 0.5) / dt); };
      p.h1_rate = [dt](double t) {
        const double c = std::cosh((t - 0.5) / dt);
        return 1.0 / (dt * c * c);
      };
      break;
  }
  return p;
}

DaeSystem build_testbed(const TestbedProblem& p) {
  DaeSystem sys;
  sys.dim = 2;
  sys.B = [p](const Vec& v, double t) {
    const double w = (p.h2(t) + 10.0 - v(1)) / 10.0;
    Mat m(1, 2);
    m << w * v(0), w * v(1);
    return m;
  };
  sys.b = [p](const Vec&, double t) {
    Vec r(1);
    r << p.h1_rate(t);
    return r;
  };
  sys.g = [p](const Vec& v, double t) {
    const double h2 = p.h2(t);
    Vec r(1);
    r << ((h2 + 10.0 - v(1)) / 10.0) * (h2 - v(1));
    return r;
  };
  sys.G = [p](const Vec& v, double t) {
    const double h2 = p.h2(t);
    Mat m(1, 2);
    m << 0.0, -(2.0 * h2 + 10.0 - 2.0 * v(1)) / 10.0;
    return m;
  };
  sys.g_t = [p](const Vec& v, double t) {
    const double h2 = p.h2(t);
    Vec r(1);
    r << p.h2_rate(t) * (2.0 * h2 + 10.0 - 2.0 * v(1)) / 10.0;
    return r;
  };
  return sys;
}

Vec testbed_exact(const TestbedProblem& p, double t) {
  const double h2 = p.h2(t);
  Vec v(2);
  v << std::sqrt(2.0 * (p.h1(t) - p.h1(p.t0)) + p.r0 * p.r0 - h2 * h2), h2;
  return v;
}

TestbedRow run_testbed(TestbedKind kind, int order, const ProjectionPolicy& policy, int steps) {
  const TestbedProblem problem = TestbedProblem::make(kind, 1.0 / steps);
  const DaeSystem sys = build_testbed(problem);
  DaeStepper stepper(sys, RkScheme::of_order(order), policy);
  const double dt = (problem.t_end - problem.t0) / steps;
  Vec v = testbed_exact(problem, problem.t0);
  double sum_d = 0.0;
  double sum_a = 0.0;
  for (int n = 0; n < steps; ++n) {
    // Times as n / steps so that t = 1/2 is hit exactly at even step counts.
    const double span = problem.t_end - problem.t0;
    const double t = problem.t0 + span * n / steps;
    v = stepper.step(v, t, dt);
    const double t1 = problem.t0 + span * (n + 1) / steps;
    const ErrorParts e = error_projections(sys, v, t1, v - testbed_exact(problem, t1));
    sum_d += e.differential.norm();
    sum_a += e.algebraic.norm();
  }
  return TestbedRow{kind, order, policy.variant, steps, sum_d / steps, sum_a / steps};
}

std::vector<TestbedRow> run_testbed_convergence(TestbedKind kind, int order, const ProjectionPolicy& policy,
                                                const std::vector<int>& ladder) {
  std::vector<TestbedRow> rows;
  rows.reserve(ladder.size());
  for (int n : ladder) rows.push_back(run_testbed(kind, order, policy, n));
  return rows;
}

std::vector<int> default_step_ladder() { return {100, 176, 316, 564, 1000, 1780, 3164, 5624, 10000}; }

void write_testbed_csv(std::ostream& os, const std::vector<TestbedRow>& rows) {
  CsvWriter csv(os, {"problem", "scheme", "policy", "S", "steps", "err_differential", "err_algebraic"});
  for (const auto& r : rows) {
    const std::string scheme = r.policy == Projection::None ? "RK0" : "RK" + to_string(r.policy);
    csv.row(to_string(r.kind), scheme, to_string(r.policy), r.order, r.steps, r.err_differential,
            r.err_algebraic);
  }
}

}  // namespace hypbc
