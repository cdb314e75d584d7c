#include "hypbc/core.hpp"

#include "hypbc/errors.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace hypbc {

namespace {

constexpr double kMaxDensityCondition = 1e12;

Vec apply_inverse(const Mat& t, const Vec& v) {
  Eigen::PartialPivLU<Mat> lu(t);
  const double rc = lu.rcond();
  if (!(rc > 1.0 / kMaxDensityCondition)) {
    throw TransformError("density transform is singular or ill-conditioned (rcond " + std::to_string(rc) + ")");
  }
  return lu.solve(v);
}

}  // namespace

void DomainFrame::require_valid() const {
  if (!(x_right > x_left)) {
    throw DomainCollapseError("domain collapsed: x_R = " + std::to_string(x_right) +
                              " <= x_L = " + std::to_string(x_left));
  }
}

double map_to_unit(double x, const DomainFrame& frame) {
  frame.require_valid();
  return (x - frame.x_left) / frame.length();
}

double map_from_unit(double y, const DomainFrame& frame) { return frame.to_physical(y); }

Vec transform_state(const Vec& q, double y, double t, const TransformSpec& spec) {
  const DomainFrame f = spec.frame(t);
  f.require_valid();
  return spec.density(f.rate(y), f.length()) * q;
}

Vec untransform_state(const Vec& q_hat, double y, double t, const TransformSpec& spec) {
  const DomainFrame f = spec.frame(t);
  f.require_valid();
  return apply_inverse(spec.density(f.rate(y), f.length()), q_hat);
}

FluxSource transformed_flux_source(const Vec& q_hat, double y, double t, const TransformSpec& spec,
                                   const BalanceLaw& law) {
  const DomainFrame f = spec.frame(t);
  f.require_valid();
  const double r = f.rate(y);
  const double len = f.length();
  const double len_dt = f.length_rate();
  const double r_dt = f.rate_dt(y);
  const double x = f.to_physical(y);

  const Mat tr = spec.density(r, len);
  const Mat tr_r = spec.density_d_rate(r, len);
  const Mat tr_l = spec.density_d_length(r, len);
  const Vec q = apply_inverse(tr, q_hat);
  const double adv = spec.advection_velocity(q, x, t);
  const Vec flux_rest = law.flux(q, x, t) - adv * q;

  FluxSource out;
  out.flux = ((adv - r) * q_hat + tr * flux_rest) / len;
  out.source = r_dt * (tr_r * q) + len_dt * ((tr_l - tr / len + ((adv - r) / len) * tr_r) * q) +
               (len_dt / len) * (tr_r * flux_rest) + tr * law.source(q, x, t);
  return out;
}

double transform_speed(double lambda, double y, const DomainFrame& frame) {
  frame.require_valid();
  return (lambda - frame.rate(y)) / frame.length();
}

Grid1D Grid1D::uniform(int cells, double lo, double hi) {
  Grid1D g;
  g.interfaces.resize(static_cast<std::size_t>(cells) + 1);
  for (int j = 0; j <= cells; ++j) g.interfaces[j] = lo + (hi - lo) * static_cast<double>(j) / cells;
  g.interfaces.back() = hi;
  return g;
}

double Grid1D::min_width() const {
  double w = std::numeric_limits<double>::infinity();
  for (int j = 0; j < cells(); ++j) w = std::min(w, width(j));
  return w;
}

}  // namespace hypbc
