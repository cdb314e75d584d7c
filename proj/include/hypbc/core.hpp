#pragma once

#include "hypbc/linalg.hpp"

#include <functional>
#include <vector>

namespace hypbc {

/// Characteristic structure of a flux Jacobian: eigenvalues ascending, `left`
/// holds left eigenvectors as rows, `right` its inverse (left * right == I).
struct EigenDecomposition {
  Vec speeds;
  Mat left;
  Mat right;
};

/// A 1D balance law Q_t + F(Q, x, t)_x = Psi(Q, x, t).
class BalanceLaw {
 public:
  virtual ~BalanceLaw() = default;
  virtual int size() const = 0;
  virtual Vec flux(const Vec& q, double x, double t) const = 0;
  virtual Vec source(const Vec& q, double x, double t) const = 0;
  virtual EigenDecomposition eigen(const Vec& q, double x, double t) const = 0;
};

/// Positions, speeds and accelerations of both domain ends at one instant.
struct DomainFrame {
  double x_left = 0.0;
  double x_right = 1.0;
  double v_left = 0.0;
  double v_right = 0.0;
  double a_left = 0.0;
  double a_right = 0.0;

  double length() const { return x_right - x_left; }
  double length_rate() const { return v_right - v_left; }
  /// Mesh velocity at unit coordinate y.
  double rate(double y) const { return (1.0 - y) * v_left + y * v_right; }
  /// Time derivative of the mesh velocity at fixed y.
  double rate_dt(double y) const { return (1.0 - y) * a_left + y * a_right; }
  double to_physical(double y) const { return (1.0 - y) * x_left + y * x_right; }
  /// Throws DomainCollapseError when the ends have met or crossed.
  void require_valid() const;
};

/// Moving-domain map plus density rescaling Q -> T(rate, length) Q.
struct TransformSpec {
  std::function<DomainFrame(double t)> frame;
  std::function<Mat(double rate, double length)> density;
  std::function<Mat(double rate, double length)> density_d_rate;
  std::function<Mat(double rate, double length)> density_d_length;
  /// Advection velocity used to split F = u Q + F_hat.
  std::function<double(const Vec& q, double x, double t)> advection_velocity;
};

/// y = (x - x_L) / (x_R - x_L).
double map_to_unit(double x, const DomainFrame& frame);
/// x = (1 - y) x_L + y x_R.
double map_from_unit(double y, const DomainFrame& frame);

Vec transform_state(const Vec& q, double y, double t, const TransformSpec& spec);
Vec untransform_state(const Vec& q_hat, double y, double t, const TransformSpec& spec);

struct FluxSource {
  Vec flux;
  Vec source;
};

/// Flux and source of the transformed law in unit coordinates, composed from the
/// physical law and the transform.
FluxSource transformed_flux_source(const Vec& q_hat, double y, double t, const TransformSpec& spec,
                                   const BalanceLaw& law);

/// Characteristic speed seen in unit coordinates: (lambda - rate) / length.
double transform_speed(double lambda, double y, const DomainFrame& frame);

/// Cell-centred grid on an interval with non-decreasing interfaces.
struct Grid1D {
  std::vector<double> interfaces;

  static Grid1D uniform(int cells, double lo = 0.0, double hi = 1.0);
  int cells() const { return static_cast<int>(interfaces.size()) - 1; }
  double centre(int j) const { return 0.5 * (interfaces[j] + interfaces[j + 1]); }
  double width(int j) const { return interfaces[j + 1] - interfaces[j]; }
  double min_width() const;
};

}  // namespace hypbc
