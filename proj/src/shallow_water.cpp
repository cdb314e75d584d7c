#include "hypbc/shallow_water.hpp"

#include "hypbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hypbc::sw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ratio / depth with the Kurganov-Petrova desingularization below kDryDepth.
double desingularized_ratio(double numerator, double depth) {
  if (depth >= kDryDepth) return numerator / depth;
  const double d = std::max(depth, 0.0);
  const double d4 = d * d * d * d;
  const double e4 = kDryDepth * kDryDepth * kDryDepth * kDryDepth;
  return std::numbers::sqrt2 * d * numerator / std::sqrt(d4 + e4);
}

// Plain ratio wherever the depth is positive so that a uniform concentration
// survives the bulk update exactly; the momentum carries the dry-state guard.
double tracer_ratio(double numerator, double depth) { return depth > 0.0 ? numerator / depth : 0.0; }

// Transformed energy and its partial derivatives; w is the transformed momentum.
struct EnergyParts {
  double e, e_u, e_uu, e_h, e_uh;
};

EnergyParts energy_parts(double depth, double w, double length, double barrier) {
  const double l23 = std::cbrt(length * length);
  const double h2 = depth * depth;
  const double w23 = std::cbrt(w * w);
  const double w_13 = 1.0 / std::cbrt(w);
  EnergyParts p;
  p.e = w * w + 2.0 * length * h2 * (depth - length * barrier) - 3.0 * l23 * h2 * w23;
  p.e_u = 2.0 * w - 2.0 * l23 * h2 * w_13;
  p.e_uu = 2.0 + (2.0 / 3.0) * l23 * h2 * w_13 / w;
  p.e_h = 2.0 * length * (3.0 * h2 - 2.0 * length * barrier * depth) - 6.0 * l23 * depth * w23;
  p.e_uh = -4.0 * l23 * depth * w_13;
  return p;
}

double physical_depth(const Vec& q, double length) { return std::max(q(kDepth), 0.0) / length; }

}  // namespace

Vec to_transformed(const Primitive& p, double length, double rate) {
  Vec q(3);
  q << length * p.h, length * p.phi * p.h, length * length * (p.u - rate) * p.h;
  return q;
}

Primitive to_primitive(const Vec& q, double length, double rate) {
  Primitive p;
  p.h = q(kDepth) / length;
  if (q(kDepth) > 0.0) {
    p.phi = q(kTracer) / q(kDepth);
    p.u = rate + q(kMomentum) / (length * q(kDepth));
  } else {
    p.u = rate;
  }
  return p;
}

double relative_velocity(const Vec& q, double length) {
  return desingularized_ratio(q(kMomentum), q(kDepth)) / (length * length);
}

double concentration(const Vec& q) { return tracer_ratio(q(kTracer), q(kDepth)); }

void flux_kernel(const double* q, double length, double* out) {
  const double l2 = length * length;
  const double mass = q[kMomentum] / l2;
  out[kDepth] = mass;
  out[kTracer] = tracer_ratio(q[kTracer], q[kDepth]) * mass;
  out[kMomentum] = q[kMomentum] * (desingularized_ratio(q[kMomentum], q[kDepth]) / l2) + q[kDepth] * q[kDepth] / (2.0 * length);
}

void speed_bounds_kernel(const double* q, double length, double& lo, double& hi) {
  const double u = desingularized_ratio(q[kMomentum], q[kDepth]) / (length * length);
  const double c = std::sqrt(std::max(q[kDepth], 0.0) / (length * length * length));
  lo = u - c;
  hi = u + c;
}

Vec flux(const Vec& q, double length) {
  Vec f(3);
  flux_kernel(q.data(), length, f.data());
  return f;
}

Vec source(const Vec& q, double length, double rate_dt) {
  Vec s = Vec::Zero(3);
  s(kMomentum) = -length * q(kDepth) * rate_dt;
  return s;
}

EigenDecomposition eigen(const Vec& q, double length) {
  const double depth = q(kDepth);
  if (!(depth > 0.0)) throw DegenerateStateError("shallow water eigenstructure needs positive depth");
  const double l2 = length * length;
  const double u = q(kMomentum) / (l2 * depth);
  const double c = std::sqrt(depth) / std::pow(length, 1.5);
  EigenDecomposition e;
  e.speeds = Vec(3);
  e.speeds << u - c, u, u + c;
  e.left = Mat(3, 3);
  e.left << l2 * e.speeds(2), 0.0, -1.0,  //
      q(kTracer), -depth, 0.0,            //
      l2 * e.speeds(0), 0.0, -1.0;
  e.right = e.left.inverse();
  return e;
}

std::pair<double, double> speed_bounds(const Vec& q, double length) {
  double lo, hi;
  speed_bounds_kernel(q.data(), length, lo, hi);
  return {lo, hi};
}

Invariants invariants(const Vec& q, double length, double rate) {
  if (!(q(kDepth) > 0.0)) throw DegenerateStateError("invariants need positive depth");
  const Primitive p = to_primitive(q, length, rate);
  const double c = 2.0 * std::sqrt(p.h);
  return {p.u + c, p.u - c, p.phi};
}

Vec PhysicalLaw::flux(const Vec& q, double, double) const {
  const double u = q(2) / q(0);
  Vec f(3);
  f << q(2), u * q(1), u * q(2) + q(0) * q(0) / 2.0;
  return f;
}

Vec PhysicalLaw::source(const Vec&, double, double) const { return Vec::Zero(3); }

EigenDecomposition PhysicalLaw::eigen(const Vec& q, double, double) const { return sw::eigen(q, 1.0); }

TransformSpec transform_spec(std::function<DomainFrame(double)> frame) {
  TransformSpec spec;
  spec.frame = std::move(frame);
  spec.density = [](double r, double l) {
    Mat t = Mat::Zero(3, 3);
    t(0, 0) = l;
    t(1, 1) = l;
    t(2, 0) = -r * l * l;
    t(2, 2) = l * l;
    return t;
  };
  spec.density_d_rate = [](double, double l) {
    Mat t = Mat::Zero(3, 3);
    t(2, 0) = -l * l;
    return t;
  };
  spec.density_d_length = [](double r, double l) {
    Mat t = Mat::Zero(3, 3);
    t(0, 0) = 1.0;
    t(1, 1) = 1.0;
    t(2, 0) = -2.0 * r * l;
    t(2, 2) = 2.0 * l;
    return t;
  };
  spec.advection_velocity = [](const Vec& q, double, double) { return q(2) / q(0); };
  return spec;
}

// ---------------------------------------------------------------------------

double minmod(double a, double b, double c) {
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::min({a, b, c});
  if (a < 0.0 && b < 0.0 && c < 0.0) return std::max({a, b, c});
  return 0.0;
}

Mat minmod_slopes(const Mat& cells, const Vec& left_ghost, const Vec& right_ghost, double dy, double theta) {
  const Eigen::Index n = cells.rows();
  const Eigen::Index m = cells.cols();
  Mat slopes(n, m);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < m; ++k) {
      const double left = j > 0 ? cells(j - 1, k) : left_ghost(k);
      const double right = j + 1 < n ? cells(j + 1, k) : right_ghost(k);
      const double centre = cells(j, k);
      slopes(j, k) = minmod(theta * (centre - left) / dy, (right - left) / (2.0 * dy), theta * (right - centre) / dy);
    }
  }
  return slopes;
}

InterfaceFlux central_upwind_flux(const Vec& left, const Vec& right, const FluxFn& flux_fn,
                                  const SpeedBoundsFn& bounds) {
  const auto [lmin, lmax] = bounds(left);
  const auto [rmin, rmax] = bounds(right);
  const double ap = std::max({lmax, rmax, 0.0});
  const double am = std::min({lmin, rmin, 0.0});
  const Vec fl = flux_fn(left);
  if (ap - am <= 0.0) return {fl, ap, am};
  const Vec fr = flux_fn(right);
  const double inv = 1.0 / (ap - am);
  return {(ap * fl - am * fr) * inv + (ap * am * inv) * (right - left), ap, am};
}

void damp_dry_momentum(Mat& cells, double factor) {
  for (Eigen::Index j = 0; j < cells.rows(); ++j)
    if (cells(j, kDepth) < kDryDepth) cells(j, kMomentum) *= factor;
}

// ---------------------------------------------------------------------------

EnergyValues energy_functional(const Vec& q, double length, double barrier) {
  const double depth = q(kDepth);
  if (!(depth > 0.0)) throw DegenerateStateError("energy needs positive depth");
  const double h = depth / length;
  const double u = q(kMomentum) / (length * depth);
  const EnergyParts p = energy_parts(depth, q(kMomentum), length, barrier);
  const double uh = u * h;
  return {u * u / 2.0 + (h - barrier) - 1.5 * std::cbrt(uh * uh), p.e, p.e_u};
}

EnergyCondition energy_condition(double depth, double momentum, double length, double barrier, double delta) {
  if (depth < length * barrier) return {momentum, 0.0, 1.0};
  if (momentum < delta) {
    const EnergyParts p = energy_parts(depth, delta, length, barrier);
    const double dw = momentum - delta;
    return {p.e + p.e_u * dw, p.e_h + p.e_uh * dw, p.e_u};
  }
  const double seam = std::sqrt(length) * std::pow(depth, 1.5) - delta;
  if (momentum > seam) {
    const EnergyParts p = energy_parts(depth, seam, length, barrier);
    const double seam_d = 1.5 * std::sqrt(length * depth);
    const double dw = momentum - seam;
    return {p.e + p.e_u * dw, p.e_h + (p.e_uh + p.e_uu * seam_d) * dw, p.e_u};
  }
  const EnergyParts p = energy_parts(depth, momentum, length, barrier);
  return {p.e, p.e_h, p.e_u};
}

// ---------------------------------------------------------------------------

EigenDecomposition BoundaryPhysicsSw::eigen(const Vec& q, double length) const { return sw::eigen(q, length); }

Vec BoundaryPhysicsSw::source(const Vec&, double) const { return Vec::Zero(3); }

Vec BoundaryPhysicsSw::uniform_gradient(const Vec& q, double length, double length_rate) const {
  Vec g = Vec::Zero(3);
  g(kMomentum) = -length * length_rate * q(kDepth);
  return g;
}

Vec BoundaryPhysicsSw::source_per_acceleration(const Vec& q, double length) const {
  Vec s = Vec::Zero(3);
  s(kMomentum) = -length * q(kDepth);
  return s;
}

Vec BoundaryPhysicsSw::primitive(const Vec& v, double length) const {
  const double depth = v(kDepth);
  Vec p(3);
  p << depth / length, v(kTracer) / depth, v(3) + v(kMomentum) / (length * depth);
  return p;
}

Mat BoundaryPhysicsSw::primitive_jacobian(const Vec& v, double length) const {
  const double depth = v(kDepth);
  Mat j = Mat::Zero(3, 4);
  j(0, 0) = 1.0 / length;
  j(1, 0) = -v(kTracer) / (depth * depth);
  j(1, 1) = 1.0 / depth;
  j(2, 0) = -v(kMomentum) / (length * depth * depth);
  j(2, 2) = 1.0 / (length * depth);
  j(2, 3) = 1.0;
  return j;
}

namespace {

Mat unit_rows(std::initializer_list<int> columns) {
  Mat m = Mat::Zero(static_cast<Eigen::Index>(columns.size()), 4);
  Eigen::Index r = 0;
  for (int c : columns) m(r++, c) = 1.0;
  return m;
}

Vec values(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

Vec Wall::residual(int, const Vec& v, const BoundaryLocal&) const { return values({v(kMomentum), v(3)}); }

Mat Wall::jacobian(int, const Vec&, const BoundaryLocal&) const { return unit_rows({kMomentum, 3}); }

Vec FroudeFront::residual(int, const Vec& v, const BoundaryLocal& local) const {
  const double s = outward_sign(local.side);
  return values({v(kMomentum), v(3) - s * froude_ * std::sqrt(std::max(v(kDepth), 0.0) / local.length)});
}

Mat FroudeFront::jacobian(int, const Vec& v, const BoundaryLocal& local) const {
  const double s = outward_sign(local.side);
  Mat j = unit_rows({kMomentum, 3});
  const double depth = std::max(v(kDepth), kPositivityFloor);
  j(1, kDepth) = -s * froude_ / (2.0 * std::sqrt(depth * local.length));
  return j;
}

Vec FroudeFront::time_derivative(int, const Vec& v, const BoundaryLocal& local) const {
  const double s = outward_sign(local.side);
  const double depth = std::max(v(kDepth), 0.0);
  return values({0.0, s * froude_ / 2.0 * std::sqrt(depth) * std::pow(local.length, -1.5) * local.length_rate});
}

Vec NonReflecting::residual(int, const Vec& v, const BoundaryLocal&) const { return values({v(3)}); }

Mat NonReflecting::jacobian(int, const Vec&, const BoundaryLocal&) const { return unit_rows({3}); }

Vec PrescribedDepth::residual(int, const Vec& v, const BoundaryLocal& local) const {
  return values({v(kDepth) - local.length * depth_(local.t), v(3)});
}

Mat PrescribedDepth::jacobian(int, const Vec&, const BoundaryLocal&) const { return unit_rows({kDepth, 3}); }

Vec PrescribedDepth::time_derivative(int, const Vec&, const BoundaryLocal& local) const {
  return values({-local.length_rate * depth_(local.t) - local.length * depth_rate_(local.t), 0.0});
}

Vec EnergyOvertopping::residual(int mode, const Vec& v, const BoundaryLocal& local) const {
  switch (mode) {
    case NoFlow: return values({v(kMomentum), v(3)});
    case EnergyOutflow:
      return values({energy_condition(v(kDepth), v(kMomentum), local.length, barrier_).value, v(3)});
    case Supercritical: return values({v(3)});
  }
  throw ConfigError("mode", "invalid overtopping mode " + std::to_string(mode));
}

Mat EnergyOvertopping::jacobian(int mode, const Vec& v, const BoundaryLocal& local) const {
  switch (mode) {
    case NoFlow: return unit_rows({kMomentum, 3});
    case EnergyOutflow: {
      const EnergyCondition c = energy_condition(v(kDepth), v(kMomentum), local.length, barrier_);
      Mat j = unit_rows({kMomentum, 3});
      j(0, kDepth) = c.d_depth;
      j(0, kMomentum) = c.d_momentum;
      return j;
    }
    case Supercritical: return unit_rows({3});
  }
  throw ConfigError("mode", "invalid overtopping mode " + std::to_string(mode));
}

Vec EnergyOvertopping::time_derivative(int mode, const Vec& v, const BoundaryLocal& local) const {
  Vec gt = Vec::Zero(algebraic_count(mode));
  if (mode == EnergyOutflow && local.length_rate != 0.0) {
    // The barrier end is normally fixed; a moving domain only changes the length.
    const double step = 1e-7 * local.length;
    const double up = energy_condition(v(kDepth), v(kMomentum), local.length + step, barrier_).value;
    const double down = energy_condition(v(kDepth), v(kMomentum), local.length - step, barrier_).value;
    gt(0) = (up - down) / (2.0 * step) * local.length_rate;
  }
  return gt;
}

namespace {

struct OvertoppingTerms {
  double speed;  // slowest outward speed over the capped root depth at the end
  double energy;
  double depth;  // min(depth at end, depth at nearest point)
};

OvertoppingTerms overtopping_terms(const Vec& v, const BoundaryLocal& local, double barrier) {
  const double s = outward_sign(local.side);
  const Vec& speeds = local.selection->speeds;
  const double slowest = (s * speeds).minCoeff();
  const double denom = std::min(std::sqrt(physical_depth(v, local.length)), 1e-4);
  double ratio;
  if (denom > 0.0) ratio = slowest / denom;
  else ratio = slowest > 0.0 ? std::numeric_limits<double>::infinity()
                             : (slowest < 0.0 ? -std::numeric_limits<double>::infinity() : 0.0);
  const EnergyParts e = energy_parts(local.q_near(kDepth), local.q_near(kMomentum), local.length, barrier);
  return {ratio, e.e, std::min(local.q_near(kDepth), v(kDepth))};
}

}  // namespace

int EnergyOvertopping::refine_mode(int mode, const Vec& v_next, const BoundaryLocal& local) const {
  if (mode == Supercritical) return mode;
  const double depth = std::min(physical_depth(v_next, local.length), physical_depth(local.q_near, local.length));
  if (depth < 1e-9) return NoFlow;
  if (depth > 1e-8) return EnergyOutflow;
  return mode;
}

std::optional<double> EnergyOvertopping::event(int mode, const Vec& v, const BoundaryLocal& local) const {
  const OvertoppingTerms t = overtopping_terms(v, local, barrier_);
  // Leave supercritical outflow below about 1e-9 depth, enter above about 1e-8.
  if (mode == Supercritical) return std::min({t.speed, t.energy * 1e12, t.depth * 1e9 - 1.0}) + 1e-3;
  return -std::min({t.speed, t.energy * 1e12, t.depth * 1e8 - 1.0}) + 1e-3;
}

int EnergyOvertopping::mode_after_event(int mode, const Vec& v, const BoundaryLocal& local) const {
  if (mode != Supercritical) return Supercritical;
  return refine_mode(EnergyOutflow, v, local) == NoFlow ? NoFlow : EnergyOutflow;
}

int EnergyOvertopping::initial_mode(const Vec& v, const BoundaryLocal& local) const {
  if (!(*event(NoFlow, v, local) > 0.0)) return Supercritical;
  const double depth = std::min(physical_depth(v, local.length), physical_depth(local.q_near, local.length));
  return depth > 1e-8 ? EnergyOutflow : NoFlow;
}

// ---------------------------------------------------------------------------

Primitive dambreak_exact(double x, double t) {
  if (!(t >= 0.0 && t <= 0.5)) throw OutOfValidityError("dam-break solution holds for 0 <= t <= 1/2");
  const double xi = x - 0.5;
  if (xi <= -t) return {1.0, 1.0, 0.0};
  if (xi >= 2.0 * t) return {0.0, kNaN, kNaN};
  const double r = xi / t;
  return {(2.0 - r) * (2.0 - r) / 9.0, 1.0, 2.0 / 3.0 * (1.0 + r)};
}

AlphaWave AlphaWave::standard() {
  AlphaWave w;
  w.h0 = [](double t) { return 1.0 + std::sin(std::numbers::pi * t / 2.0) / 10.0; };
  w.c_min = 3.0 * std::sqrt(0.9) - 2.0;
  return w;
}

double AlphaWave::foot(double x, double t, double tol) const {
  if (x == 0.0) return t;
  const auto residual = [&](double tau) { return x - (t - tau) * (3.0 * std::sqrt(h0(tau)) - 2.0); };
  double lo = t - x / c_min;
  double hi = t;
  double r_lo = residual(lo);
  if (r_lo > 0.0 || residual(hi) < 0.0) throw OutOfValidityError("alpha-wave foot is not bracketed");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = residual(mid);
    if (r == 0.0) return mid;
    if ((r < 0.0) == (r_lo < 0.0)) {
      lo = mid;
      r_lo = r;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Primitive AlphaWave::at(double x, double t) const {
  const double h = h0(foot(x, t));
  return {h, 1.0, 2.0 * std::sqrt(h) - 2.0};
}

double SemiInfiniteLock::front_depth() const {
  const double c = 2.0 / (froude + 2.0);
  return c * c;
}

double SemiInfiniteLock::front_speed() const { return froude * std::sqrt(front_depth()); }

Primitive SemiInfiniteLock::at(double x, double t) const {
  if (t < 0.0) throw OutOfValidityError("lock release starts at t = 0");
  if (x > front_position(t)) return {0.0, kNaN, kNaN};
  if (t == 0.0) return {1.0, 1.0, 0.0};
  const double xi = (x - 1.0) / t;
  if (xi <= -1.0) return {1.0, 1.0, 0.0};
  const double fan_end = front_speed() - std::sqrt(front_depth());
  if (xi <= fan_end) return {(2.0 - xi) * (2.0 - xi) / 9.0, 1.0, 2.0 * (1.0 + xi) / 3.0};
  return {front_depth(), 1.0, front_speed()};
}

}  // namespace hypbc::sw
