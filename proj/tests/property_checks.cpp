#include "property_checks.hpp"

#include "hypbc/boundary.hpp"
#include "hypbc/errors.hpp"
#include "hypbc/linalg.hpp"
#include "hypbc/rk.hpp"
#include "hypbc/shallow_water.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hypbc::checks {

namespace {

class Recorder {
 public:
  explicit Recorder(std::string name) { out_.name = std::move(name); }

  // Counts a case; `defect` is already normalised so that 1 is the tolerance.
  void record(double defect, const std::string& what) {
    ++out_.cases;
    if (!(defect <= 1.0)) {
      ++out_.failures;
      if (out_.first_failure.empty()) out_.first_failure = what;
    }
    if (std::isfinite(defect)) out_.worst = std::max(out_.worst, defect);
    else out_.worst = defect;
  }

  void require(bool ok, const std::string& what) { record(ok ? 0.0 : 2.0, what); }

  CheckOutcome done() { return out_; }

 private:
  CheckOutcome out_;
};

double inf_norm(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

Vec random_vec(std::mt19937& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

Mat random_mat(std::mt19937& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

std::string describe(const Vec& v) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
  return os.str();
}

}  // namespace

CheckOutcome eigen_invariants(int count, unsigned seed) {
  Recorder rec("eigendecomposition invariants");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> depth(0.05, 10.0), conc(0.0, 2.0), vel(-3.0, 3.0), len(0.2, 5.0);
  for (int i = 0; i < count; ++i) {
    const double l = len(rng);
    const Vec q = sw::to_transformed({depth(rng), conc(rng), vel(rng)}, l, 0.0);
    const EigenDecomposition e = sw::eigen(q, l);
    const Mat lr = e.left * e.right;
    const double cond = inf_norm(e.left) * inf_norm(e.right);
    rec.record(inf_norm(lr - Mat::Identity(3, 3)) / (1e-12 * cond), "L R = I at q=" + describe(q));
    rec.require(e.speeds(0) <= e.speeds(1) && e.speeds(1) <= e.speeds(2), "ascending speeds at q=" + describe(q));

    // Central differences; truncation and rounding together stay far below 1e-6 relative.
    Mat jac(3, 3);
    for (int k = 0; k < 3; ++k) {
      const double step = 1e-6 * std::max(1.0, std::abs(q(k)));
      Vec hi = q, lo = q;
      hi(k) += step;
      lo(k) -= step;
      jac.col(k) = (sw::flux(hi, l) - sw::flux(lo, l)) / (2.0 * step);
    }
    const Mat defect = e.left * jac - e.speeds.asDiagonal() * e.left;
    const double scale = inf_norm(e.left) * (inf_norm(jac) + 1.0);
    rec.record(inf_norm(defect) / (1e-6 * scale), "L J = diag(speeds) L at q=" + describe(q));
  }
  return rec.done();
}

CheckOutcome stencil_moments(int count, unsigned seed) {
  Recorder rec("stencil moment constraints");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> gap(0.01, 0.5), coeff(-3.0, 3.0);
  std::uniform_int_distribution<int> pick(0, 1);
  for (int i = 0; i < count; ++i) {
    const bool right = pick(rng) == 1;
    const double end = coeff(rng);
    const double dir = right ? -1.0 : 1.0;  // from the end into the bulk
    std::vector<double> nodes{end + dir * gap(rng)};
    nodes.push_back(nodes[0] + dir * gap(rng));
    for (int order = 0; order <= 1; ++order) {
      const ExtrapolationRule rule = ExtrapolationRule::make(order, nodes, end);
      bool valid = true;
      try {
        validate_stencil(rule, nodes, end);
      } catch (const StencilError&) {
        valid = false;
      }
      rec.require(valid, "generated stencil of order " + std::to_string(order) + " rejected");

      ExtrapolationRule broken = rule;
      broken.kappa[0] += 1e-6;
      bool rejected = false;
      try {
        validate_stencil(broken, nodes, end);
      } catch (const StencilError&) {
        rejected = true;
      }
      rec.require(rejected, "perturbed stencil of order " + std::to_string(order) + " accepted");

      // Polynomials of degree <= order are reproduced at the end.
      const double c0 = coeff(rng), c1 = order >= 1 ? coeff(rng) : 0.0;
      std::vector<Vec> bulk;
      for (double x : nodes) bulk.push_back(Vec::Constant(1, c0 + c1 * x));
      const double exact = c0 + c1 * end;
      const double got = rule.value(bulk)(0);
      rec.record(std::abs(got - exact) / (1e-12 * (1.0 + std::abs(c0) + std::abs(c1))), "extrapolated value");
      if (order >= 1) {
        const double slope = rule.gradient(Vec::Constant(1, exact), bulk)(0);
        const double scale = (std::abs(c0) + std::abs(c1) * (1.0 + std::abs(end))) / std::abs(rule.spacing);
        rec.record(std::abs(slope - c1) / (1e-12 * (1.0 + scale)), "extrapolated gradient");
      }
    }
  }
  return rec.done();
}

CheckOutcome ghost_identities(int count, unsigned seed) {
  Recorder rec("ghost-point identities");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> gap(0.01, 0.5);
  const double tol = 1e-12;
  for (int i = 0; i < count; ++i) {
    // Right end at 0 with bulk points at -h and -h - h_prev; the ghost lies h_g beyond it.
    const double h = gap(rng), h_prev = gap(rng), h_g = gap(rng);
    const std::vector<double> nodes{-h, -h - h_prev};
    const Vec q_prev = random_vec(rng, 3, -2.0, 2.0), q_near = random_vec(rng, 3, -2.0, 2.0);
    const Vec q_end = random_vec(rng, 3, -2.0, 2.0);
    const std::vector<Vec> bulk{q_near, q_prev};
    for (int order = 0; order <= 1; ++order) {
      const ExtrapolationRule rule = ExtrapolationRule::make(order, nodes, 0.0);
      const Vec q_hat = rule.value(bulk);
      const Vec ghost = ghost_point_value(q_hat, q_near, rule.spacing, h_g);
      const Vec d2_end = second_difference(q_near, q_end, ghost, h, h_g);
      const double scale = (1.0 + q_hat.cwiseAbs().maxCoeff() + q_end.cwiseAbs().maxCoeff()) / (h * h_g) *
                           (1.0 + (h + h_prev) / h_prev);

      const Vec general = 2.0 / (h * h_g) * (q_hat - q_end);
      rec.record((d2_end - general).cwiseAbs().maxCoeff() / (tol * scale), "ghost second difference");

      Vec reduced;
      if (order == 0) {
        reduced = -2.0 * (q_end - q_near) / h / h_g;
      } else {
        const Vec d2_near = second_difference(q_prev, q_near, q_end, h_prev, h);
        reduced = -(h + h_prev) * d2_near / h_g;
      }
      rec.record((d2_end - reduced).cwiseAbs().maxCoeff() / (tol * scale),
                 "order " + std::to_string(order) + " reduced identity");
    }
  }
  return rec.done();
}

CheckOutcome projector_idempotence(int count, unsigned seed) {
  Recorder rec("projector idempotence");
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dim(2, 6);
  for (int i = 0; i < count; ++i) {
    const int n = dim(rng);
    const int k = std::uniform_int_distribution<int>(1, n - 1)(rng);
    const Mat basis = Eigen::HouseholderQR<Mat>(random_mat(rng, n, n)).householderQ();
    // Mixed rows spanning complementary orthogonal subspaces.
    const Mat mix_b = random_mat(rng, k, k) + 3.0 * Mat::Identity(k, k);
    const Mat mix_g = random_mat(rng, n - k, n - k) + 3.0 * Mat::Identity(n - k, n - k);
    const Mat rows_b = mix_b * basis.topRows(k).eval();
    const Mat rows_g = mix_g * basis.bottomRows(n - k).eval();
    const Mat pb = row_space_projector(rows_b);
    const Mat pg = row_space_projector(rows_g);
    const double tol = 1e-12;
    rec.record(inf_norm(pb * pb - pb) / tol, "P_B idempotent");
    rec.record(inf_norm(pg * pg - pg) / tol, "P_G idempotent");
    rec.record(inf_norm(pb - pb.transpose()) / tol, "P_B symmetric");
    rec.record(inf_norm(pb + pg - Mat::Identity(n, n)) / tol, "P_B + P_G = I");
    rec.record(inf_norm(pb * rows_b.transpose() - rows_b.transpose()) / (tol * (1.0 + inf_norm(rows_b))),
               "P_B fixes its rows");
  }
  return rec.done();
}

CheckOutcome minmod_central_upwind(int count, unsigned seed) {
  Recorder rec("minmod and central-upwind consistency");
  rec.require(sw::minmod(1.0, 2.0, 3.0) == 1.0, "minmod(1,2,3) = 1");
  rec.require(sw::minmod(-1.0, 2.0, 3.0) == 0.0, "minmod(-1,2,3) = 0");
  rec.require(sw::minmod(-3.0, -2.0, -1.0) == -1.0, "minmod(-3,-2,-1) = -1");
  rec.require(sw::minmod(0.0, 2.0, 3.0) == 0.0, "minmod(0,2,3) = 0");

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> depth(0.05, 5.0), conc(0.0, 2.0), vel(-2.0, 2.0), len(0.5, 2.0);
  for (int i = 0; i < count; ++i) {
    const double l = len(rng);
    const sw::FluxFn flux = [l](const Vec& q) { return sw::flux(q, l); };
    const sw::SpeedBoundsFn bounds = [l](const Vec& q) { return sw::speed_bounds(q, l); };
    const Vec a = sw::to_transformed({depth(rng), conc(rng), vel(rng)}, l, 0.0);
    const Vec b = sw::to_transformed({depth(rng), conc(rng), vel(rng)}, l, 0.0);
    const double scale = 1e-12 * (1.0 + sw::flux(a, l).cwiseAbs().maxCoeff() + sw::flux(b, l).cwiseAbs().maxCoeff());

    const sw::InterfaceFlux same = sw::central_upwind_flux(a, a, flux, bounds);
    rec.record((same.flux - sw::flux(a, l)).cwiseAbs().maxCoeff() / scale, "F(q, q) = F(q)");

    const sw::InterfaceFlux ab = sw::central_upwind_flux(a, b, flux, bounds);
    rec.require(ab.a_plus >= 0.0 && ab.a_minus <= 0.0, "one-sided speed bounds");

    // Both states supercritical in the same direction: pure upwinding.
    const double fast = 3.0 * std::sqrt(5.0);
    const Vec ra = sw::to_transformed({depth(rng), conc(rng), fast}, l, 0.0);
    const Vec rb = sw::to_transformed({depth(rng), conc(rng), fast}, l, 0.0);
    const double sc = 1e-12 * (1.0 + sw::flux(ra, l).cwiseAbs().maxCoeff() + sw::flux(rb, l).cwiseAbs().maxCoeff());
    rec.record((sw::central_upwind_flux(ra, rb, flux, bounds).flux - sw::flux(ra, l)).cwiseAbs().maxCoeff() / sc,
               "rightward supercritical takes the left flux");
    const Vec la = sw::to_transformed({depth(rng), conc(rng), -fast}, l, 0.0);
    const Vec lb = sw::to_transformed({depth(rng), conc(rng), -fast}, l, 0.0);
    const double sl = 1e-12 * (1.0 + sw::flux(la, l).cwiseAbs().maxCoeff() + sw::flux(lb, l).cwiseAbs().maxCoeff());
    rec.record((sw::central_upwind_flux(la, lb, flux, bounds).flux - sw::flux(lb, l)).cwiseAbs().maxCoeff() / sl,
               "leftward supercritical takes the right flux");
  }

  // Scalar advection at speed c: the central-upwind flux is the upwind flux.
  for (double c : {-1.5, 0.0, 0.7}) {
    const sw::FluxFn f = [c](const Vec& q) { return Vec(c * q); };
    const sw::SpeedBoundsFn s = [c](const Vec&) { return std::pair<double, double>(c, c); };
    const Vec ql = Vec::Constant(1, 2.0), qr = Vec::Constant(1, -1.0);
    const double expect = c >= 0.0 ? c * 2.0 : c * -1.0;
    const double got = sw::central_upwind_flux(ql, qr, f, s).flux(0);
    rec.record(std::abs(got - expect) / 1e-14, "scalar upwind flux");
  }
  return rec.done();
}

CheckOutcome growth_polynomial(int count, unsigned seed) {
  Recorder rec("growth polynomial closed forms");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int order = 1; order <= 3; ++order) {
    const RkScheme sch = RkScheme::of_order(order);
    for (int i = 0; i < count; ++i) {
      const double k = u(rng), b = u(rng), c = u(rng);
      const double a = 1.0;
      double closed = 0.0;
      if (order == 1) closed = a * k + c;
      if (order == 2) closed = 0.5 * a * k * k + 0.5 * c * k + 0.5 * b + c;
      if (order == 3) closed = a * k * k * k / 6.0 + c * k * k / 6.0 + (0.5 * b + 2.0 * c / 3.0) * k + b / 3.0 + c;
      const double got = f_tilde(k, order, a, b, c, sch);
      rec.record(std::abs(got - closed) / (1e-13 * (1.0 + std::abs(closed))), "closed form S=" + std::to_string(order));
    }
  }
  rec.require(f_tilde(1.0, 1, 0.0, -0.5, 1.0, RkScheme::of_order(1)) == 1.0, "tabulated S=1 value 1");
  rec.require(f_tilde(1.0, 2, 0.0, -0.5, 1.0, RkScheme::of_order(2)) == 1.25, "tabulated S=2 value 5/4");
  rec.record(std::abs(f_tilde(1.0, 3, 0.0, -0.5, 1.0, RkScheme::of_order(3)) - 17.0 / 12.0) / 4e-16,
             "tabulated S=3 value 17/12");
  return rec.done();
}

CheckOutcome blended_euler_bound(int count, unsigned seed, double slack) {
  // Euler map z -> (1 + a dt) z with |1 + a dt| <= 1 against z_ref(t) = A sin(w t) + B t, whose derivative
  // is Lipschitz with constant A w^2. K is the largest per-substep excess of the Euler gap over its input gap.
  Recorder rec("blended-Euler perturbation bound");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int order = 1; order <= 3; ++order) {
    const RkScheme sch = RkScheme::of_order(order);
    const double cs = (7.0 + 9.0 * order) / (12.0 + 4.0 * order);
    for (int trial = 0; trial < count; ++trial) {
      const double dt = 0.01 + 0.2 * u(rng);
      const double a = -2.0 * u(rng) / dt;
      const double amp = 2.0 * u(rng), w = 5.0 * u(rng), slope = u(rng) - 0.5;
      auto ref = [&](double t) { return amp * std::sin(w * t) + slope * t; };
      const double lip = amp * w * w;
      const double t0 = 3.0 * u(rng);
      const double z0 = ref(t0) + (u(rng) - 0.5);
      double k_excess = 0.0, ts = t0, z = z0;
      for (int s = 0; s < order; ++s) {
        const double e = (1.0 + a * dt) * z;
        k_excess = std::max(k_excess, std::abs(e - ref(ts + dt)) - std::abs(z - ref(ts)));
        ts = sch.next_time(s, t0, ts, dt);
        z = sch.eta[s] * z0 + (1.0 - sch.eta[s]) * e;
      }
      const double gap0 = std::abs(z0 - ref(t0));
      const double gap1 = std::abs(z - ref(t0 + dt));
      const double bound = gap0 + std::max(k_excess, 0.0) + cs * lip * dt * dt;
      rec.require(gap1 <= bound + slack, "S=" + std::to_string(order) + " trial " + std::to_string(trial));
    }
  }
  return rec.done();
}

std::vector<CheckOutcome> all_property_checks() {
  return {eigen_invariants(), stencil_moments(), ghost_identities(), projector_idempotence(),
          minmod_central_upwind()};
}

}  // namespace hypbc::checks
