#pragma once

#include "hypbc/boundary.hpp"
#include "hypbc/core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace hypbc::sw {

// Shallow water with a passive tracer. Physical density (h, phi h, u h);
// transformed density q = (l h, l phi h, l^2 (u - r) h) on the unit interval.

inline constexpr int kDepth = 0;
inline constexpr int kTracer = 1;
inline constexpr int kMomentum = 2;

/// Depths below this use the desingularized velocity.
inline constexpr double kDryDepth = 1e-8;

struct Primitive {
  double h = 0.0;
  double phi = 0.0;
  double u = 0.0;
};

Vec to_transformed(const Primitive& p, double length, double rate);
/// Tracer and velocity are taken as 0 where the transformed depth vanishes.
Primitive to_primitive(const Vec& q, double length, double rate);

/// Velocity relative to the mesh, momentum / (l^2 depth), desingularized below kDryDepth.
double relative_velocity(const Vec& q, double length);
/// Tracer concentration, tracer / depth for positive depth and 0 where dry.
double concentration(const Vec& q);

/// Transformed flux in unit coordinates; the tracer flux is concentration times mass flux.
Vec flux(const Vec& q, double length);
/// Transformed source at mesh acceleration rate_dt; only the momentum entry is non-zero.
Vec source(const Vec& q, double length, double rate_dt);

/// Kernels on three contiguous doubles for the bulk loop; same values as flux / speed_bounds.
void flux_kernel(const double* q, double length, double* out);
void speed_bounds_kernel(const double* q, double length, double& lo, double& hi);

/// Throws DegenerateStateError for depth <= 0.
EigenDecomposition eigen(const Vec& q, double length);
/// Smallest and largest characteristic speeds, finite for any depth >= 0.
std::pair<double, double> speed_bounds(const Vec& q, double length);

struct Invariants {
  double alpha;  // u + 2 sqrt(h)
  double beta;   // u - 2 sqrt(h)
  double phi;
};

Invariants invariants(const Vec& q, double length, double rate);

/// Physical law Q_t + F(Q)_x = 0 used to check the transformed closed forms.
class PhysicalLaw : public BalanceLaw {
 public:
  int size() const override { return 3; }
  Vec flux(const Vec& q, double x, double t) const override;
  Vec source(const Vec& q, double x, double t) const override;
  EigenDecomposition eigen(const Vec& q, double x, double t) const override;
};

/// Density scales l, l, l^2 with the momentum taken relative to the mesh; advected with u.
TransformSpec transform_spec(std::function<DomainFrame(double)> frame);

// ---------------------------------------------------------------------------
// Finite volume pieces.

double minmod(double a, double b, double c);

/// Limited slopes of cell averages (rows = cells) on a uniform grid of width dy,
/// with exterior values `left_ghost` and `right_ghost`.
Mat minmod_slopes(const Mat& cells, const Vec& left_ghost, const Vec& right_ghost, double dy, double theta = 1.5);

struct InterfaceFlux {
  Vec flux;
  double a_plus;
  double a_minus;
};

using FluxFn = std::function<Vec(const Vec&)>;
using SpeedBoundsFn = std::function<std::pair<double, double>(const Vec&)>;

/// Central-upwind flux from one-sided speed bounds a+ >= 0 >= a-.
InterfaceFlux central_upwind_flux(const Vec& left, const Vec& right, const FluxFn& flux, const SpeedBoundsFn& bounds);

/// Momentum of cells shallower than kDryDepth is multiplied by `factor`.
void damp_dry_momentum(Mat& cells, double factor = 0.9);

// ---------------------------------------------------------------------------
// Barrier energy.

struct EnergyValues {
  double physical;         // u^2/2 + (h - h_b) - 3/2 (u h)^(2/3), velocity relative to the end
  double transformed;      // equals 2 l^4 h^2 times the physical value
  double d_transformed_du; // derivative with respect to the transformed momentum
};

EnergyValues energy_functional(const Vec& q, double length, double barrier);

struct EnergyCondition {
  double value;
  double d_depth;
  double d_momentum;
};

/// Transformed energy extended linearly outside 0 < momentum < l^(1/2) depth^(3/2),
/// and replaced by the momentum when the depth is below the barrier.
EnergyCondition energy_condition(double depth, double momentum, double length, double barrier, double delta = 1e-8);

// ---------------------------------------------------------------------------
// Boundary physics and conditions.

class BoundaryPhysicsSw : public BoundaryPhysics {
 public:
  int size() const override { return 3; }
  EigenDecomposition eigen(const Vec& q, double length) const override;
  Vec source(const Vec& q, double length) const override;
  Vec source_per_acceleration(const Vec& q, double length) const override;
  /// Momentum carries the rate, which varies at length_rate per unit coordinate.
  Vec uniform_gradient(const Vec& q, double length, double length_rate) const override;
  std::vector<int> positive_variables() const override { return {kDepth, kTracer}; }
  /// (h, phi, u) with the mesh rate at the end equal to the end speed.
  Vec primitive(const Vec& v, double length) const override;
  Mat primitive_jacobian(const Vec& v, double length) const override;
};

/// No flux through a fixed end: momentum = 0, end speed = 0.
class Wall : public BoundaryCondition {
 public:
  std::string name() const override { return "wall"; }
  int algebraic_count(int) const override { return 2; }
  Vec residual(int mode, const Vec& v, const BoundaryLocal& local) const override;
  Mat jacobian(int mode, const Vec& v, const BoundaryLocal& local) const override;
};

/// Gravity-current front moving with the fluid at Fr sqrt(h) outward.
class FroudeFront : public BoundaryCondition {
 public:
  explicit FroudeFront(double froude) : froude_(froude) {}
  std::string name() const override { return "froude"; }
  int algebraic_count(int) const override { return 2; }
  Vec residual(int mode, const Vec& v, const BoundaryLocal& local) const override;
  Mat jacobian(int mode, const Vec& v, const BoundaryLocal& local) const override;
  Vec time_derivative(int mode, const Vec& v, const BoundaryLocal& local) const override;
  double froude() const { return froude_; }

 private:
  double froude_;
};

/// Only the end motion is imposed; all characteristic rows are kept.
class NonReflecting : public BoundaryCondition {
 public:
  std::string name() const override { return "non-reflecting"; }
  int algebraic_count(int) const override { return 1; }
  Vec residual(int mode, const Vec& v, const BoundaryLocal& local) const override;
  Mat jacobian(int mode, const Vec& v, const BoundaryLocal& local) const override;
};

/// Prescribed depth at a fixed end.
class PrescribedDepth : public BoundaryCondition {
 public:
  PrescribedDepth(std::function<double(double)> depth, std::function<double(double)> depth_rate)
      : depth_(std::move(depth)), depth_rate_(std::move(depth_rate)) {}
  std::string name() const override { return "depth"; }
  int algebraic_count(int) const override { return 2; }
  Vec residual(int mode, const Vec& v, const BoundaryLocal& local) const override;
  Mat jacobian(int mode, const Vec& v, const BoundaryLocal& local) const override;
  Vec time_derivative(int mode, const Vec& v, const BoundaryLocal& local) const override;

 private:
  std::function<double(double)> depth_;
  std::function<double(double)> depth_rate_;
};

/// Outflow over a barrier of height h_b at a fixed end.
class EnergyOvertopping : public BoundaryCondition {
 public:
  enum Mode { NoFlow = 0, EnergyOutflow = 1, Supercritical = 2 };

  explicit EnergyOvertopping(double barrier) : barrier_(barrier) {}
  std::string name() const override { return "overtopping"; }
  std::vector<std::string> mode_names() const override { return {"no-flow", "energy", "supercritical"}; }
  int algebraic_count(int mode) const override { return mode == Supercritical ? 1 : 2; }
  Vec residual(int mode, const Vec& v, const BoundaryLocal& local) const override;
  Mat jacobian(int mode, const Vec& v, const BoundaryLocal& local) const override;
  Vec time_derivative(int mode, const Vec& v, const BoundaryLocal& local) const override;
  /// No-flow below 1e-9 depth at either point, energy outflow once both exceed 1e-8.
  int refine_mode(int mode, const Vec& v_next, const BoundaryLocal& local) const override;
  std::optional<double> event(int mode, const Vec& v, const BoundaryLocal& local) const override;
  int mode_after_event(int mode, const Vec& v, const BoundaryLocal& local) const override;
  int initial_mode(const Vec& v, const BoundaryLocal& local) const override;
  double barrier() const { return barrier_; }

 private:
  double barrier_;
};

// ---------------------------------------------------------------------------
// Closed-form solutions.

/// Dam break from x = 1/2 into a dry bed, valid for 0 <= t <= 1/2. u is NaN where dry.
Primitive dambreak_exact(double x, double t);

/// Simple wave driven by depth h0 at x = 0 into fluid with beta = -2.
struct AlphaWave {
  std::function<double(double)> h0;
  double c_min;  // lower bound of 3 sqrt(h0) - 2

  static AlphaWave standard();  // h0 = 1 + sin(pi t / 2) / 10
  /// Foot time tau with x = (t - tau)(3 sqrt(h0(tau)) - 2).
  double foot(double x, double t, double tol = 1e-13) const;
  Primitive at(double x, double t) const;
};

/// Release of unit depth behind a Froude front starting at x = 1, left end open.
struct SemiInfiniteLock {
  double froude = 1.2;

  double front_depth() const;
  double front_speed() const;
  double front_position(double t) const { return 1.0 + front_speed() * t; }
  Primitive at(double x, double t) const;
};

}  // namespace hypbc::sw
