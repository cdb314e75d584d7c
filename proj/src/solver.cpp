#include "hypbc/solver.hpp"

#include "hypbc/csv.hpp"
#include "hypbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace hypbc::sw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Five-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGaussNodes = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                               0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                 0.4786286704993665, 0.2369268850561891};

Primitive sanitize(Primitive p) {
  if (!(p.h > 0.0)) return Primitive{0.0, 0.0, 0.0};
  if (std::isnan(p.phi)) p.phi = 0.0;
  if (std::isnan(p.u)) p.u = 0.0;
  return p;
}

const char* side_name(Side s) { return s == Side::Left ? "left" : "right"; }

}  // namespace

struct Solver::Attempt {
  StepOutcome outcome;
  std::array<std::vector<BoundaryState>, 2> ends;  // per substep
  std::array<Vec, 2> last_delta;
};

Solver::Solver(SwProblem problem, SolverOptions options)
    : problem_(std::move(problem)),
      options_(options),
      cells_(options.cells),
      dy_(0.0),
      scheme_(RkScheme::of_order(options.order)),
      controller_(0.95) {
  if (cells_ < 4) throw ConfigError("cells", "at least 4 cells are required");
  if (!problem_.initial || !problem_.left || !problem_.right) throw ConfigError("problem", "incomplete problem");
  if (!(problem_.x_right > problem_.x_left)) throw DomainCollapseError("initial domain is empty");
  const int k = options_.extrapolation_order;
  if (k < 0 || k + 1 > cells_) throw ConfigError("extrapolation_order", "unsupported extrapolation order");
  dy_ = 1.0 / cells_;

  for (Side side : {Side::Left, Side::Right}) {
    std::vector<double> nodes;
    for (int j = 0; j <= std::max(k, 1); ++j) {
      const double y = (j + 0.5) * dy_;
      nodes.push_back(side == Side::Left ? y : 1.0 - y);
    }
    const double end = side == Side::Left ? 0.0 : 1.0;
    rules_[static_cast<std::size_t>(index(side))] = ExtrapolationRule::make(k, nodes, end);
    validate_stencil(rules_[static_cast<std::size_t>(index(side))], nodes, end);
  }

  const double l = problem_.x_right - problem_.x_left;
  state_ = Vec::Zero(3 * cells_ + 10);
  state_(position_offset(Side::Left)) = problem_.x_left;
  state_(position_offset(Side::Right)) = problem_.x_right;

  // Transformed momentum is relative to the mesh rate, which the end speeds
  // fix only after the ends are initialized; the second pass uses those speeds.
  for (int pass = 0; pass < 2; ++pass) {
    const double rate_l = state_(end_offset(Side::Left) + 3), rate_r = state_(end_offset(Side::Right) + 3);
    for (int j = 0; j < cells_; ++j) {
      Vec avg = Vec::Zero(3);
      for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
        const double y = (j + 0.5 + 0.5 * kGaussNodes[g]) * dy_;
        const Primitive p = sanitize(problem_.initial(problem_.x_left + y * l));
        avg += 0.5 * kGaussWeights[g] * to_transformed(p, l, (1.0 - y) * rate_l + y * rate_r);
      }
      state_.segment(3 * j, 3) = avg;
    }
    if (pass == 1 && rate_l == 0.0 && rate_r == 0.0) break;

    const double rate = rate_r - rate_l;
    for (Side side : {Side::Left, Side::Right}) {
      const double x = side == Side::Left ? problem_.x_left : problem_.x_right;
      Vec v0 = Vec::Zero(4);
      v0(3) = state_(end_offset(side) + 3);
      v0.head(3) = to_transformed(sanitize(problem_.initial(x)), l, v0(3));
      const BoundarySetup setup = make_setup(side, state_, 0.0, l, rate);
      ends_[static_cast<std::size_t>(index(side))] = initialize_boundary(setup, v0, 0.0);
      seeds_[static_cast<std::size_t>(index(side))] = Vec::Zero(4);
    }
    for (Side side : {Side::Left, Side::Right})
      state_.segment(end_offset(side), 4) = ends_[static_cast<std::size_t>(index(side))].v;
  }

  Vec rhs(state_.size());
  max_dt_ = bulk_rhs(state_, 0.0, 0.0, rhs);
  if (!std::isfinite(max_dt_)) max_dt_ = options_.c_max * dy_;
}

double Solver::x_left() const { return state_(position_offset(Side::Left)); }
double Solver::x_right() const { return state_(position_offset(Side::Right)); }

Mat Solver::cell_values() const {
  Mat m(cells_, 3);
  for (int j = 0; j < cells_; ++j) m.row(j) = state_.segment(3 * j, 3).transpose();
  return m;
}

Vec Solver::end_values(Side side) const { return state_.segment(end_offset(side), 4); }

BoundarySetup Solver::make_setup(Side side, const Vec& state, double t, double length, double length_rate) const {
  BoundarySetup s;
  s.physics = &physics_;
  s.condition = side == Side::Left ? problem_.left.get() : problem_.right.get();
  s.side = side;
  const int count = std::max(options_.extrapolation_order, 1) + 1;
  for (int j = 0; j < count; ++j) {
    const int cell = side == Side::Left ? j : cells_ - 1 - j;
    s.bulk.push_back(state.segment(3 * cell, 3));
  }
  s.rule = rules_[static_cast<std::size_t>(index(side))];
  s.forcing = options_.forcing;
  s.eigen_policy = options_.eigen_policy;
  s.length = [length, length_rate, t](double tt) { return length + (tt - t) * length_rate; };
  s.length_rate = length_rate;
  return s;
}

double Solver::bulk_rhs(const Vec& state, double a_left, double a_right, Vec& rhs) const {
  const int n = cells_;
  const double l = state(position_offset(Side::Right)) - state(position_offset(Side::Left));
  const double* q = state.data();
  const double* q_left = q + end_offset(Side::Left);
  const double* q_right = q + end_offset(Side::Right);

  // Ghosts at dy/2 beyond each end lie on the line through the nearest centre and the end value.
  std::array<double, 3> ghost_l{}, ghost_r{};
  for (int k = 0; k < 3; ++k) {
    ghost_l[k] = 2.0 * q_left[k] - q[k];
    ghost_r[k] = 2.0 * q_right[k] - q[3 * (n - 1) + k];
  }
  std::vector<double> slope(static_cast<std::size_t>(3 * n));
  const double theta = options_.theta;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < 3; ++k) {
      const double c = q[3 * j + k];
      const double lo = j > 0 ? q[3 * (j - 1) + k] : ghost_l[k];
      const double hi = j < n - 1 ? q[3 * (j + 1) + k] : ghost_r[k];
      slope[static_cast<std::size_t>(3 * j + k)] =
          minmod(theta * (c - lo) / dy_, 0.5 * (hi - lo) / dy_, theta * (hi - c) / dy_);
    }
  }

  std::vector<double> face_flux(static_cast<std::size_t>(3 * (n + 1)));
  std::vector<double> face_speed(static_cast<std::size_t>(n + 1));
  double lo = 0.0, hi = 0.0, lo2 = 0.0, hi2 = 0.0;
  std::array<double, 3> left{}, right{}, f_left{}, f_right{};

  // End fluxes come directly from the end values.
  flux_kernel(q_left, l, &face_flux[0]);
  for (int k = 0; k < 3; ++k) right[k] = q[k] - 0.5 * dy_ * slope[static_cast<std::size_t>(k)];
  speed_bounds_kernel(q_left, l, lo, hi);
  speed_bounds_kernel(right.data(), l, lo2, hi2);
  face_speed[0] = std::max({std::abs(lo), std::abs(hi), std::abs(lo2), std::abs(hi2)});

  flux_kernel(q_right, l, &face_flux[static_cast<std::size_t>(3 * n)]);
  for (int k = 0; k < 3; ++k)
    left[k] = q[3 * (n - 1) + k] + 0.5 * dy_ * slope[static_cast<std::size_t>(3 * (n - 1) + k)];
  speed_bounds_kernel(q_right, l, lo, hi);
  speed_bounds_kernel(left.data(), l, lo2, hi2);
  face_speed[static_cast<std::size_t>(n)] = std::max({std::abs(lo), std::abs(hi), std::abs(lo2), std::abs(hi2)});

  for (int i = 1; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      left[k] = q[3 * (i - 1) + k] + 0.5 * dy_ * slope[static_cast<std::size_t>(3 * (i - 1) + k)];
      right[k] = q[3 * i + k] - 0.5 * dy_ * slope[static_cast<std::size_t>(3 * i + k)];
    }
    speed_bounds_kernel(left.data(), l, lo, hi);
    speed_bounds_kernel(right.data(), l, lo2, hi2);
    const double ap = std::max({hi, hi2, 0.0});
    const double am = std::min({lo, lo2, 0.0});
    face_speed[static_cast<std::size_t>(i)] = std::max(ap, -am);
    flux_kernel(left.data(), l, f_left.data());
    flux_kernel(right.data(), l, f_right.data());
    double* out = &face_flux[static_cast<std::size_t>(3 * i)];
    if (ap - am > 0.0) {
      for (int k = 0; k < 3; ++k)
        out[k] = (ap * f_left[k] - am * f_right[k] + ap * am * (right[k] - left[k])) / (ap - am);
    } else {
      for (int k = 0; k < 3; ++k) out[k] = 0.5 * (f_left[k] + f_right[k]);
    }
  }

  std::vector<double> widths(static_cast<std::size_t>(n), dy_);
  std::vector<double> speeds(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const std::size_t a = static_cast<std::size_t>(3 * j), b = static_cast<std::size_t>(3 * (j + 1));
    for (int k = 0; k < 3; ++k) rhs(3 * j + k) = -(face_flux[b + static_cast<std::size_t>(k)] - face_flux[a + static_cast<std::size_t>(k)]) / dy_;
    const double y = (j + 0.5) * dy_;
    // Midpoint source from the mesh acceleration.
    rhs(3 * j + kMomentum) -= l * q[3 * j + kDepth] * ((1.0 - y) * a_left + y * a_right);
    speeds[static_cast<std::size_t>(j)] =
        std::max(face_speed[static_cast<std::size_t>(j)], face_speed[static_cast<std::size_t>(j + 1)]);
  }
  return cfl_max_dt(widths, speeds, options_.c_max);
}

Solver::Attempt Solver::attempt(const Vec& state, double t, double dt, const RkScheme& scheme) const {
  Attempt a;
  const int stages = scheme.stages();
  for (auto& e : a.ends) e.resize(static_cast<std::size_t>(stages));
  a.last_delta = seeds_;
  std::array<int, 2> modes = {ends_[0].mode, ends_[1].mode};
  const Eigen::Index pos_l = position_offset(Side::Left), pos_r = position_offset(Side::Right);

  EulerMap euler = [&](const Vec& stage, const EulerContext& ctx) {
    const double xl = stage(pos_l), xr = stage(pos_r);
    const double l = xr - xl;
    if (!(l > 0.0)) throw DomainCollapseError("domain length is no longer positive");
    const Vec vl = stage.segment(end_offset(Side::Left), 4);
    const Vec vr = stage.segment(end_offset(Side::Right), 4);
    const double rate = vr(3) - vl(3);
    const double l0 = (*ctx.initial)(pos_r) - (*ctx.initial)(pos_l);
    const double l_next = ctx.eta * l0 + (1.0 - ctx.eta) * (l + ctx.dt * rate);

    EulerResult out{stage, kInf};
    std::array<double, 2> accel{};
    for (Side side : {Side::Left, Side::Right}) {
      const std::size_t i = static_cast<std::size_t>(index(side));
      const BoundarySetup setup = make_setup(side, stage, ctx.t_stage, l, rate);
      BoundaryStepRequest req;
      req.setup = &setup;
      req.v_stage = stage.segment(end_offset(side), 4);
      req.v_initial = ctx.initial->segment(end_offset(side), 4);
      req.t_stage = ctx.t_stage;
      req.t_next = ctx.t_next;
      req.dt = ctx.dt;
      req.eta = ctx.eta;
      req.length_next = l_next;
      req.mode = modes[i];
      req.seed = a.last_delta[i];
      req.policy = options_.policy;
      req.tol = options_.nr_tol;
      req.max_iter = options_.nr_max_iter;
      req.explicit_variant = options_.explicit_nr;
      BoundaryStepResult res = step_boundary(req);
      modes[i] = res.next.mode;
      a.last_delta[i] = res.delta;
      accel[i] = res.delta(3) / ctx.dt;
      out.next.segment(end_offset(side), 4) = req.v_stage + res.delta;
      a.ends[i][static_cast<std::size_t>(ctx.substep)] = std::move(res.next);
    }

    Vec rhs(stage.size());
    out.max_dt = bulk_rhs(stage, accel[0], accel[1], rhs);
    out.next.head(3 * cells_) += ctx.dt * rhs.head(3 * cells_);
    out.next(pos_l) = xl + ctx.dt * vl(3);
    out.next(pos_r) = xr + ctx.dt * vr(3);
    return out;
  };
  // The boundary engine already blended, zeroed and clamped the end values.
  StageHook hook = [&](Vec& s, const EulerContext& ctx) {
    for (Side side : {Side::Left, Side::Right})
      s.segment(end_offset(side), 4) =
          a.ends[static_cast<std::size_t>(index(side))][static_cast<std::size_t>(ctx.substep)].v;
  };
  a.outcome = rk_step(state, euler, t, dt, scheme, hook);
  return a;
}

void Solver::accept(const Attempt& a, double t_new) {
  state_ = a.outcome.state;
  t_ = t_new;
  for (std::size_t i = 0; i < 2; ++i) {
    ends_[i] = a.ends[i].back();
    seeds_[i] = a.last_delta[i];
  }
  for (int j = 0; j < cells_; ++j)
    if (state_(3 * j + kDepth) < kDryDepth) state_(3 * j + kMomentum) *= 0.9;
  post_project();
  check_finite();
  ++steps_;
}

std::optional<double> Solver::event_value(Side side, const Vec& state, double t, int mode) const {
  const double l = state(position_offset(Side::Right)) - state(position_offset(Side::Left));
  const double rate = state(end_offset(Side::Right) + 3) - state(end_offset(Side::Left) + 3);
  const BoundarySetup setup = make_setup(side, state, t, l, rate);
  const Vec v = state.segment(end_offset(side), 4);
  EigenPair storage;
  const BoundaryLocal local = boundary_local(setup, v, t, &storage);
  return setup.condition->event(mode, v, local);
}

void Solver::switch_mode(Side side) {
  const std::size_t i = static_cast<std::size_t>(index(side));
  const double l = length();
  const double rate = state_(end_offset(Side::Right) + 3) - state_(end_offset(Side::Left) + 3);
  const BoundarySetup setup = make_setup(side, state_, t_, l, rate);
  const Vec v = end_values(side);
  EigenPair storage;
  const BoundaryLocal local = boundary_local(setup, v, t_, &storage);
  const int from = ends_[i].mode;
  const int to = setup.condition->mode_after_event(from, v, local);
  BoundaryState st;
  try {
    st = initialize_boundary(setup, v, t_, to);
  } catch (const InitializationError&) {
    try {
      st = initialize_boundary(setup, v, t_);
    } catch (const InitializationError&) {
      st = BoundaryState{v, to, ends_[i].zeroed};
    }
  }
  state_.segment(end_offset(side), 4) = st.v;
  events_.push_back(EventRecord{t_, side, from, st.mode});
  ends_[i] = std::move(st);
  seeds_[i] = Vec::Zero(4);
}

void Solver::post_project() {
  const Projection p = options_.policy;
  if (p == Projection::NR || p == Projection::None) return;
  const double l = length();
  const double rate = state_(end_offset(Side::Right) + 3) - state_(end_offset(Side::Left) + 3);
  for (Side side : {Side::Left, Side::Right}) {
    BoundaryState& st = ends_[static_cast<std::size_t>(index(side))];
    const BoundarySetup setup = make_setup(side, state_, t_, l, rate);
    const BoundaryAssembly a = assemble_boundary_dae(setup, st.v, t_, st.mode, st.zeroed);
    Vec v = (p == Projection::P1 || p == Projection::I1) ? project_p1(a.dae, st.v, t_, options_.nr_tol, options_.nr_max_iter)
                                                         : project_p2(a.dae, st.v, t_, options_.nr_tol, options_.nr_max_iter);
    for (int k : st.zeroed) v(k) = 0.0;
    st.v = v;
    state_.segment(end_offset(side), 4) = v;
  }
}

void Solver::check_finite() const {
  for (Eigen::Index k = 0; k < state_.size(); ++k) {
    const double x = state_(k);
    if (!std::isfinite(x) || std::abs(x) > options_.blowup) {
      std::ostringstream msg;
      msg << "solution blew up at t = " << t_;
      throw InstabilityError(msg.str(), t_);
    }
  }
}

void Solver::advance_to(double t_target, const std::function<void(const Solver&)>& on_step) {
  const RkScheme euler_scheme = RkScheme::of_order(1);
  std::array<double, 2> last_immediate = {-kInf, -kInf};
  while (t_ < t_target) {
    if (!(max_dt_ > 0.0) || !std::isfinite(max_dt_)) throw InstabilityError("no admissible time step", t_);
    const double dt = controller_.propose(t_, t_target, max_dt_);
    const bool lands = dt == t_target - t_;
    const double t_new = lands ? t_target : t_ + dt;

    try {
      // An event already signalled at step start switches before stepping, once per time.
      for (Side side : {Side::Left, Side::Right}) {
        const std::size_t i = static_cast<std::size_t>(index(side));
        const std::optional<double> f0 = event_value(side, state_, t_, ends_[i].mode);
        if (f0 && *f0 <= 0.0 && last_immediate[i] != t_) {
          last_immediate[i] = t_;
          switch_mode(side);
        }
      }

      Attempt a = attempt(state_, t_, dt, scheme_);
      if (a.outcome.rejected) {
        max_dt_ = a.outcome.min_max_dt;
        ++rejected_;
        continue;
      }

      std::array<bool, 2> fired{};
      std::array<std::optional<double>, 2> f0{};
      for (Side side : {Side::Left, Side::Right}) {
        const std::size_t i = static_cast<std::size_t>(index(side));
        f0[i] = event_value(side, state_, t_, ends_[i].mode);
        if (!f0[i] || *f0[i] <= 0.0) continue;
        const std::optional<double> f1 = event_value(side, a.outcome.state, t_new, a.ends[i].back().mode);
        fired[i] = f1 && *f1 <= 0.0;
      }

      if (fired[0] || fired[1]) {
        const double t0 = t_;
        auto crossing = [&](const Vec& s, double t) {
          double f = kInf;
          for (std::size_t i = 0; i < 2; ++i) {
            if (!fired[i]) continue;
            const Side side = i == 0 ? Side::Left : Side::Right;
            const std::optional<double> v = event_value(side, s, t, ends_[i].mode);
            f = std::min(f, v ? *v : kInf);
          }
          return f;
        };
        auto f = [&](double tau) {
          if (tau == 0.0) return crossing(state_, t0);
          return crossing(attempt(state_, t0, tau, euler_scheme).outcome.state, t0 + tau);
        };
        const std::optional<double> tau = detect_event(f, dt);
        if (tau && *tau < dt) {
          Attempt e = attempt(state_, t0, *tau, euler_scheme);
          const double t_hit = t0 + *tau;
          const double max_dt = e.outcome.min_max_dt;
          accept(e, t_hit);
          max_dt_ = std::min(a.outcome.min_max_dt, max_dt);
        } else {
          accept(a, t_new);
          max_dt_ = a.outcome.min_max_dt;
        }
        for (Side side : {Side::Left, Side::Right}) {
          const std::size_t i = static_cast<std::size_t>(index(side));
          if (!fired[i]) continue;
          const std::optional<double> now = event_value(side, state_, t_, ends_[i].mode);
          if (now && *now <= 0.0) {
            last_immediate[i] = t_;
            switch_mode(side);
          }
        }
      } else {
        accept(a, t_new);
        max_dt_ = a.outcome.min_max_dt;
      }
    } catch (const InstabilityError&) {
      throw;
    } catch (const NonConvergenceError& e) {
      throw InstabilityError(std::string("boundary solve failed: ") + e.what(), t_);
    } catch (const RankDeficiencyError& e) {
      throw InstabilityError(std::string("boundary system singular: ") + e.what(), t_);
    } catch (const DegenerateStateError& e) {
      throw InstabilityError(std::string("degenerate state: ") + e.what(), t_);
    } catch (const DomainCollapseError& e) {
      throw InstabilityError(std::string("domain collapsed: ") + e.what(), t_);
    }
    if (on_step) on_step(*this);
  }
}

Snapshot Solver::snapshot() const {
  return Snapshot{t_, x_left(), x_right(), cell_values(), end_values(Side::Left), end_values(Side::Right)};
}

EndSample Solver::end_sample(Side side) const {
  const std::size_t i = static_cast<std::size_t>(index(side));
  const Vec v = end_values(side);
  const double l = length();
  const double rate = state_(end_offset(Side::Right) + 3) - state_(end_offset(Side::Left) + 3);
  const BoundarySetup setup = make_setup(side, state_, t_, l, rate);
  EigenPair storage;
  const BoundaryLocal local = boundary_local(setup, v, t_, &storage);
  const Vec g = setup.condition->residual(ends_[i].mode, v, local);
  const Primitive p = to_primitive(v.head(3), l, v(3));
  const double pos = side == Side::Left ? x_left() : x_right();
  return EndSample{t_, side, p.h, p.u, p.phi, v(3), pos, ends_[i].mode, g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0};
}

double Solver::volume() const {
  double s = 0.0;
  for (int j = 0; j < cells_; ++j) s += state_(3 * j + kDepth);
  return s * dy_;
}

double Solver::tracer() const {
  double s = 0.0;
  for (int j = 0; j < cells_; ++j) s += state_(3 * j + kTracer);
  return s * dy_;
}

RunResult run_sw_problem(const SwProblem& problem, const SolverOptions& options, const std::vector<double>& output_times) {
  std::vector<double> times = output_times;
  std::sort(times.begin(), times.end());
  Solver solver(problem, options);
  RunResult r;
  auto record = [&r](const Solver& s) {
    r.boundary.push_back(s.end_sample(Side::Left));
    r.boundary.push_back(s.end_sample(Side::Right));
    r.volume.push_back(s.volume());
    r.tracer.push_back(s.tracer());
  };
  record(solver);
  for (double t : times) {
    if (t > solver.time()) solver.advance_to(t, record);
    r.snapshots.push_back(solver.snapshot());
  }
  r.events = solver.events();
  r.steps = solver.steps();
  r.rejected = solver.rejected();
  return r;
}

void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snapshots) {
  CsvWriter w(os, {"t", "y", "x", "h_hat", "phih_hat", "uh_hat", "h", "u", "phi"});
  for (const Snapshot& s : snapshots) {
    const double l = s.x_right - s.x_left;
    const double rl = s.left(3), rr = s.right(3);
    const Eigen::Index n = s.cells.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      const Vec q = s.cells.row(j).transpose();
      const Primitive p = to_primitive(q, l, (1.0 - y) * rl + y * rr);
      w.row(s.t, y, s.x_left + y * l, q(0), q(1), q(2), p.h, p.u, p.phi);
    }
  }
}

void write_boundary_csv(std::ostream& os, const std::vector<EndSample>& samples) {
  CsvWriter w(os, {"t", "side", "h", "u", "phi", "speed", "position", "mode", "residual"});
  for (const EndSample& e : samples)
    w.row(e.t, side_name(e.side), e.h, e.u, e.phi, e.speed, e.position, e.mode, e.residual);
}

}  // namespace hypbc::sw
