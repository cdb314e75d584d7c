#include "hypbc/rk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hypbc {

RkScheme RkScheme::of_order(int order) {
  switch (order) {
    case 1: return RkScheme{{0.0}};
    case 2: return RkScheme{{0.0, 0.5}};
    case 3: return RkScheme{{0.0, 3.0 / 4.0, 1.0 / 3.0}};
    default: throw std::invalid_argument("RK order must be 1, 2 or 3");
  }
}

double RkScheme::next_time(int s, double t0, double ts, double dt) const {
  const double e = eta[static_cast<std::size_t>(s)];
  return e * t0 + (1.0 - e) * (ts + dt);
}

StepOutcome rk_step(const Vec& state, const EulerMap& euler, double t, double dt, const RkScheme& scheme,
                    const StageHook& hook) {
  StepOutcome out{state, std::numeric_limits<double>::infinity(), false};
  double ts = t;
  Vec stage = state;
  for (int s = 0; s < scheme.stages(); ++s) {
    EulerContext ctx;
    ctx.substep = s;
    ctx.eta = scheme.eta[static_cast<std::size_t>(s)];
    ctx.t_stage = ts;
    ctx.t_next = scheme.next_time(s, t, ts, dt);
    ctx.dt = dt;
    ctx.initial = &state;
    EulerResult r = euler(stage, ctx);
    out.min_max_dt = std::min(out.min_max_dt, r.max_dt);
    if (r.max_dt < dt) out.rejected = true;
    stage = ctx.eta * state + (1.0 - ctx.eta) * r.next;
    if (hook) hook(stage, ctx);
    ts = ctx.t_next;
  }
  out.state = std::move(stage);
  return out;
}

double cfl_max_dt(std::span<const double> widths, std::span<const double> speeds, double c_max) {
  if (widths.size() != speeds.size()) throw std::invalid_argument("cfl_max_dt: size mismatch");
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < widths.size(); ++j) {
    const double s = std::abs(speeds[j]);
    if (s > 0.0) dt = std::min(dt, c_max * widths[j] / s);
  }
  return dt;
}

double f_tilde(double k, int s, double a, double b, double c, const RkScheme& scheme) {
  // f(0) = a, f(s+1) = (1 - eta_s) K f(s) + b eta_s + c
  double f = a;
  for (int i = 0; i < s; ++i) {
    const double e = scheme.eta.at(static_cast<std::size_t>(i));
    f = (1.0 - e) * k * f + b * e + c;
  }
  return f;
}

double StepController::propose(double t, double t_target, double max_dt) const {
  const double dt = safety_ * max_dt;
  const double remaining = t_target - t;
  if (remaining <= dt) return remaining;
  return dt;
}

}  // namespace hypbc
