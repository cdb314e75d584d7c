#include <doctest.h>

#include "hypbc/core.hpp"
#include "hypbc/errors.hpp"

#include <cmath>
#include <random>

using namespace hypbc;

namespace {

// Scalar law q_t + (a q)_x = -k q with exact solution exp(-k t) sin(x - a t).
class DampedAdvection : public BalanceLaw {
 public:
  DampedAdvection(double a, double k) : a_(a), k_(k) {}
  int size() const override { return 1; }
  Vec flux(const Vec& q, double, double) const override { return a_ * q; }
  Vec source(const Vec& q, double, double) const override { return -k_ * q; }
  EigenDecomposition eigen(const Vec&, double, double) const override {
    return {Vec::Constant(1, a_), Mat::Identity(1, 1), Mat::Identity(1, 1)};
  }
  double exact(double x, double t) const { return std::exp(-k_ * t) * std::sin(x - a_ * t); }

 private:
  double a_, k_;
};

DomainFrame moving_frame(double t) {
  DomainFrame f;
  f.x_left = 0.1 * t * t;
  f.v_left = 0.2 * t;
  f.a_left = 0.2;
  f.x_right = 2.0 + std::sin(t);
  f.v_right = std::cos(t);
  f.a_right = -std::sin(t);
  return f;
}

// Rate- and length-dependent scalar density so every source term is exercised.
TransformSpec scalar_spec(double advect) {
  TransformSpec s;
  s.frame = moving_frame;
  s.density = [](double r, double l) { return Mat::Constant(1, 1, l * l * (1.0 + r * r)); };
  s.density_d_rate = [](double r, double l) { return Mat::Constant(1, 1, 2.0 * l * l * r); };
  s.density_d_length = [](double r, double l) { return Mat::Constant(1, 1, 2.0 * l * (1.0 + r * r)); };
  s.advection_velocity = [advect](const Vec&, double, double) { return advect; };
  return s;
}

}  // namespace

TEST_CASE("unit map round-trips and matches the linear interpolation") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    DomainFrame f;
    f.x_left = -5.0 + 10.0 * u(rng);
    f.x_right = f.x_left + 1e-3 + 10.0 * u(rng);
    const double y = u(rng);
    const double x = map_from_unit(y, f);
    CHECK(map_to_unit(x, f) == doctest::Approx(y).epsilon(1e-12));
  }
}

TEST_CASE("collapsed domain is rejected") {
  DomainFrame f;
  f.x_left = 1.0;
  f.x_right = 1.0;
  CHECK_THROWS_AS(map_to_unit(0.5, f), DomainCollapseError);
}

TEST_CASE("transformed speed") {
  DomainFrame f;
  f.x_left = 0.0;
  f.x_right = 2.0;
  f.v_left = 0.5;
  f.v_right = 0.5;
  CHECK(transform_speed(1.5, 0.3, f) == doctest::Approx(0.5));
}

TEST_CASE("identity-like density on a static domain leaves only the scaled source") {
  DampedAdvection law(0.7, 0.3);
  TransformSpec s;
  s.frame = [](double) { return DomainFrame{0.0, 2.0, 0, 0, 0, 0}; };
  s.density = [](double, double l) { return Mat::Constant(1, 1, l); };
  s.density_d_rate = [](double, double) { return Mat::Zero(1, 1); };
  s.density_d_length = [](double, double) { return Mat::Identity(1, 1); };
  s.advection_velocity = [](const Vec&, double, double) { return 0.7; };
  const Vec qh = Vec::Constant(1, 1.3);
  const FluxSource fs = transformed_flux_source(qh, 0.4, 0.0, s, law);
  // Q = qh / l, so the scaled source is l * (-k qh / l) = -k qh.
  CHECK(fs.source(0) == doctest::Approx(-0.3 * 1.3).epsilon(1e-14));
  CHECK(fs.flux(0) == doctest::Approx(0.7 * 1.3 / 2.0).epsilon(1e-14));
}

TEST_CASE("transformed law is satisfied by the transformed exact solution") {
  // Finite-difference residual of Q_t + F_y - S for the mapped exact solution.
  DampedAdvection law(0.8, 0.25);
  for (double advect : {0.8, 0.3}) {
    const TransformSpec s = scalar_spec(advect);
    auto qhat = [&](double y, double t) {
      const DomainFrame f = s.frame(t);
      return transform_state(Vec::Constant(1, law.exact(f.to_physical(y), t)), y, t, s)(0);
    };
    const double h = 1e-5;
    for (double y : {0.1, 0.5, 0.9}) {
      for (double t : {0.3, 1.1}) {
        const double dqdt = (qhat(y, t + h) - qhat(y, t - h)) / (2 * h);
        auto flux_at = [&](double yy) {
          return transformed_flux_source(Vec::Constant(1, qhat(yy, t)), yy, t, s, law).flux(0);
        };
        const double dfdy = (flux_at(y + h) - flux_at(y - h)) / (2 * h);
        const double src = transformed_flux_source(Vec::Constant(1, qhat(y, t)), y, t, s, law).source(0);
        CHECK(std::abs(dqdt + dfdy - src) < 1e-7);
      }
    }
  }
}

TEST_CASE("singular density is reported") {
  DampedAdvection law(1.0, 0.0);
  TransformSpec s = scalar_spec(1.0);
  s.density = [](double, double) { return Mat::Zero(1, 1); };
  CHECK_THROWS_AS(untransform_state(Vec::Constant(1, 1.0), 0.5, 0.0, s), TransformError);
}

TEST_CASE("uniform grid geometry") {
  const Grid1D g = Grid1D::uniform(4);
  CHECK(g.cells() == 4);
  CHECK(g.centre(0) == doctest::Approx(0.125));
  CHECK(g.width(3) == doctest::Approx(0.25));
  CHECK(g.interfaces.back() == 1.0);
}
