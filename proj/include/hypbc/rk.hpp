#pragma once

#include "hypbc/linalg.hpp"

#include <functional>
#include <span>
#include <vector>

namespace hypbc {

/// Strong-stability-preserving Runge-Kutta scheme written as convex blends of
/// Euler steps: Q[s+1] = eta_s Q[0] + (1 - eta_s) E(Q[s]).
struct RkScheme {
  std::vector<double> eta;

  /// Orders 1, 2 and 3 are supported.
  static RkScheme of_order(int order);
  int stages() const { return static_cast<int>(eta.size()); }
  /// Time attached to substep s+1 given the time of substep s.
  double next_time(int s, double t0, double ts, double dt) const;
};

/// Inputs to one Euler evaluation inside an RK step.
struct EulerContext {
  int substep = 0;
  double eta = 0.0;
  double t_stage = 0.0;  // time of Q[s]
  double t_next = 0.0;   // time of Q[s+1]
  double dt = 0.0;
  const Vec* initial = nullptr;  // Q[0]
};

struct EulerResult {
  Vec next;
  double max_dt;  // largest admissible step for this evaluation
};

using EulerMap = std::function<EulerResult(const Vec& stage, const EulerContext& ctx)>;
/// Called on each blended substep value; lets callers restore exact values of
/// quantities the blend would round (zeroed or clamped variables).
using StageHook = std::function<void(Vec& stage, const EulerContext& ctx)>;

struct StepOutcome {
  Vec state;
  double min_max_dt;  // smallest admissible step reported by any Euler evaluation
  bool rejected;      // some evaluation admitted less than the attempted dt
};

StepOutcome rk_step(const Vec& state, const EulerMap& euler, double t, double dt, const RkScheme& scheme,
                    const StageHook& hook = {});

/// C_max * min_j (width_j / speed_j); speeds are magnitudes relative to the mesh.
double cfl_max_dt(std::span<const double> widths, std::span<const double> speeds, double c_max);

/// Growth polynomial bounding the perturbation gain over s substeps.
double f_tilde(double k, int s, double a, double b, double c, const RkScheme& scheme);

/// Chooses attempted step sizes: a safety fraction of the last reported maximum,
/// landing exactly on output times when that step is small enough.
class StepController {
 public:
  explicit StepController(double safety = 0.95) : safety_(safety) {}
  double propose(double t, double t_target, double max_dt) const;
  double safety() const { return safety_; }

 private:
  double safety_;
};

}  // namespace hypbc
