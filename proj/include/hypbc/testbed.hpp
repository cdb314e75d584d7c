#pragma once

#include "hypbc/dae.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hypbc {

// Two-dimensional DAE confined to a moving curve; used to compare projection
// policies in isolation from any PDE. Unknowns v = (x, y).

enum class TestbedKind { Analytic, Continuous, Discontinuous, Singular };

std::string to_string(TestbedKind kind);
/// Accepts tp1..tp4 or analytic/continuous/discontinuous/singular.
TestbedKind testbed_kind_from_string(const std::string& name);

/// Period-1 triangle wave: 4t on [-1/4, 1/4], 2 - 4t on (1/4, 3/4).
double triangle_wave(double t);
/// Period-1 square wave: 1 on [0, 1/2), -1 on [1/2, 1).
double square_wave(double t);
/// Right-sided derivatives.
double triangle_wave_rate(double t);
double square_wave_rate(double t);

struct TestbedProblem {
  TestbedKind kind = TestbedKind::Analytic;
  std::function<double(double)> h1, h1_rate, h2, h2_rate;
  double r0 = 2.0;
  double t0 = 0.0;
  double t_end = 1.0;

  /// `dt` is only used by the singular problem, whose forcing sharpens with the step.
  static TestbedProblem make(TestbedKind kind, double dt);
};

/// B = ((h2 + 10 - y)/10) (x, y),  b = h1',  g = ((h2 + 10 - y)/10) (h2 - y).
DaeSystem build_testbed(const TestbedProblem& problem);

/// Exact trajectory x = sqrt(2 (h1(t) - h1(t0)) + r0^2 - h2(t)^2), y = h2(t).
Vec testbed_exact(const TestbedProblem& problem, double t);

struct TestbedRow {
  TestbedKind kind;
  int order;
  Projection policy;
  int steps;
  double err_differential;  // step-averaged |P_B e|
  double err_algebraic;     // step-averaged |P_G e|
};

/// Runs one resolution from t0 to t_end with `steps` uniform steps.
TestbedRow run_testbed(TestbedKind kind, int order, const ProjectionPolicy& policy, int steps);

std::vector<TestbedRow> run_testbed_convergence(TestbedKind kind, int order, const ProjectionPolicy& policy,
                                                const std::vector<int>& ladder);

/// Default step ladder 100 ... 10000.
std::vector<int> default_step_ladder();

void write_testbed_csv(std::ostream& os, const std::vector<TestbedRow>& rows);

}  // namespace hypbc
