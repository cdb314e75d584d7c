#include "hypbc/dae.hpp"

#include "hypbc/errors.hpp"

#include <cmath>
#include <limits>

namespace hypbc {

namespace {

Mat stack(const Mat& top, const Mat& bottom) {
  Mat out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

Vec stack(const Vec& top, const Vec& bottom) {
  Vec out(top.size() + bottom.size());
  out << top, bottom;
  return out;
}

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Increment small enough that further Newton updates only shuffle rounding.
bool at_rounding_floor(double increment, const Vec& v, const Vec& delta) {
  const double scale = 1.0 + inf_norm(v) + inf_norm(delta);
  return increment <= 8.0 * std::numeric_limits<double>::epsilon() * scale;
}

template <class Update>
Vec newton_projection(const DaeSystem& sys, Vec v, double t, double tol, int max_iter, Update update,
                      const char* name) {
  double inc = std::numeric_limits<double>::infinity();
  for (int i = 0; i < max_iter; ++i) {
    const Vec dv = update(v);
    v -= dv;
    inc = inf_norm(dv);
    if (inc < tol || at_rounding_floor(inc, v, Vec::Zero(v.size()))) return v;
  }
  throw NonConvergenceError(std::string(name) + " projection did not converge", inf_norm(sys.g(v, t)));
}

}  // namespace

std::string to_string(Projection p) {
  switch (p) {
    case Projection::None: return "RK0";
    case Projection::P1: return "P1";
    case Projection::P2: return "P2";
    case Projection::I1: return "I1";
    case Projection::I2: return "I2";
    case Projection::NR: return "NR";
  }
  return "?";
}

Projection projection_from_string(const std::string& name) {
  if (name == "RK0" || name == "None" || name == "none") return Projection::None;
  if (name == "P1") return Projection::P1;
  if (name == "P2") return Projection::P2;
  if (name == "I1") return Projection::I1;
  if (name == "I2") return Projection::I2;
  if (name == "NR" || name == "RKNR") return Projection::NR;
  throw ConfigError("policy", "unknown projection policy '" + name + "'");
}

Vec rk0_derivative(const DaeSystem& sys, const Vec& v, double t) {
  const Mat a = stack(sys.B(v, t), sys.G(v, t));
  const Vec rhs = stack(sys.b(v, t), Vec(-sys.g_t(v, t)));
  return solve_checked(a, rhs, "rk0_derivative");
}

Vec project_p1(const DaeSystem& sys, const Vec& v, double t, double tol, int max_iter) {
  return newton_projection(
      sys, v, t, tol, max_iter,
      [&](const Vec& w) -> Vec {
        const Mat gm = sys.G(w, t);
        const Mat gram = gm * gm.transpose();
        return gm.transpose() * solve_checked(gram, sys.g(w, t), "project_p1");
      },
      "P1");
}

Vec project_p2(const DaeSystem& sys, const Vec& v, double t, double tol, int max_iter) {
  return newton_projection(
      sys, v, t, tol, max_iter,
      [&](const Vec& w) -> Vec {
        const Mat bm = sys.B(w, t);
        const Mat a = stack(bm, sys.G(w, t));
        const Vec rhs = stack(Vec(Vec::Zero(bm.rows())), sys.g(w, t));
        return solve_checked(a, rhs, "project_p2");
      },
      "P2");
}

NrSubstepResult rknr_iterate(const NrProvider& provider, const Vec& v, const Vec& v0, double dt, double eta,
                             const Vec& delta_seed, double tol, int max_iter, bool explicit_variant) {
  NrSubstepResult out;
  Vec delta = delta_seed.size() == v.size() ? delta_seed : Vec(Vec::Zero(v.size()));
  const double w = 1.0 - eta;
  double inc = std::numeric_limits<double>::infinity();
  for (int i = 0; i < max_iter; ++i) {
    const Vec v_next = eta * v0 + w * (v + delta);
    bool changed = false;
    const NrLinearization lin = provider(v_next, i, changed);
    const Mat a = stack(lin.B, Mat(w * lin.G));
    const Vec rhs = stack(Vec(lin.b * dt), Vec(w * (lin.G * delta) - lin.g));
    const Vec next = solve_checked(a, rhs, "rknr");
    inc = inf_norm(next - delta);
    out.history.push_back({inf_norm(lin.g), inc});
    delta = next;
    ++out.iterations;
    if (explicit_variant) break;
    if (!changed && (inc < tol || at_rounding_floor(inc, v, delta))) break;
    if (i + 1 == max_iter) {
      throw NonConvergenceError("RKNR iteration did not converge in " + std::to_string(max_iter) + " iterations",
                                inc);
    }
  }
  out.delta = delta;
  out.euler = v + delta;
  return out;
}

NrSubstepResult rknr_substep(const DaeSystem& sys, const Vec& v, const Vec& v0, double t_stage, double t_next,
                             double dt, double eta, const Vec& delta_seed, double tol, int max_iter,
                             bool explicit_variant) {
  const Mat bm = sys.B(v, t_stage);
  const Vec bv = sys.b(v, t_stage);
  NrProvider provider = [&](const Vec& v_next, int, bool&) {
    return NrLinearization{bm, bv, sys.G(v_next, t_next), sys.g(v_next, t_next)};
  };
  return rknr_iterate(provider, v, v0, dt, eta, delta_seed, tol, max_iter, explicit_variant);
}

DaeStepper::DaeStepper(DaeSystem sys, RkScheme scheme, ProjectionPolicy policy)
    : sys_(std::move(sys)), scheme_(std::move(scheme)), policy_(policy) {}

Vec DaeStepper::step(const Vec& v, double t, double dt) {
  const auto inf = std::numeric_limits<double>::infinity();
  const Projection p = policy_.variant;
  EulerMap euler;
  if (p == Projection::NR) {
    euler = [&](const Vec& stage, const EulerContext& ctx) {
      const Vec seed = last_delta_ ? *last_delta_ : Vec(Vec::Zero(stage.size()));
      NrSubstepResult r = rknr_substep(sys_, stage, *ctx.initial, ctx.t_stage, ctx.t_next, dt, ctx.eta, seed,
                                       policy_.tol, policy_.max_iter, policy_.explicit_nr);
      const Vec v_next = ctx.eta * *ctx.initial + (1.0 - ctx.eta) * r.euler;
      first_residuals_.push_back(inf_norm(sys_.g(v_next, ctx.t_next)));
      nr_iterations_ += r.iterations;
      last_delta_ = r.delta;
      return EulerResult{r.euler, inf};
    };
  } else {
    euler = [&](const Vec& stage, const EulerContext& ctx) {
      Vec at = stage;
      if (p == Projection::I1) at = project_p1(sys_, stage, ctx.t_stage, policy_.tol, policy_.max_iter);
      if (p == Projection::I2) at = project_p2(sys_, stage, ctx.t_stage, policy_.tol, policy_.max_iter);
      return EulerResult{stage + dt * rk0_derivative(sys_, at, ctx.t_stage), inf};
    };
  }
  Vec next = rk_step(v, euler, t, dt, scheme_).state;
  if (p == Projection::P1 || p == Projection::I1) next = project_p1(sys_, next, t + dt, policy_.tol, policy_.max_iter);
  if (p == Projection::P2 || p == Projection::I2) next = project_p2(sys_, next, t + dt, policy_.tol, policy_.max_iter);
  return next;
}

Vec step_with_projection(const DaeSystem& sys, const Vec& v, double t, double dt, const RkScheme& scheme,
                         const ProjectionPolicy& policy) {
  DaeStepper stepper(sys, scheme, policy);
  return stepper.step(v, t, dt);
}

ErrorParts error_projections(const DaeSystem& sys, const Vec& v, double t, const Vec& error) {
  ErrorParts out;
  out.differential = row_space_projector(sys.B(v, t)) * error;
  out.algebraic = row_space_projector(sys.G(v, t)) * error;
  return out;
}

}  // namespace hypbc
