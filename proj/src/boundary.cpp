#include "hypbc/boundary.hpp"

#include "hypbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace hypbc {

namespace {

// Lagrange weights at `at` for interpolation through `pts`.
std::vector<double> lagrange_weights(const std::vector<double>& pts, double at) {
  std::vector<double> w(pts.size(), 1.0);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j) w[i] *= (at - pts[j]) / (pts[i] - pts[j]);
  return w;
}

// Weights of the derivative at `at` of the interpolant through `pts`.
std::vector<double> lagrange_derivative_weights(const std::vector<double>& pts, double at) {
  const std::size_t n = pts.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) denom *= pts[i] - pts[j];
    double num = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      double p = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && j != k) p *= at - pts[j];
      num += p;
    }
    w[i] = num / denom;
  }
  return w;
}

std::vector<int> sorted_by_outward_speed(const EigenDecomposition& e, Side side) {
  const double s = outward_sign(side);
  std::vector<int> idx(static_cast<std::size_t>(e.speeds.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double sa = s * e.speeds(a), sb = s * e.speeds(b);
    if (sa != sb) return sa > sb;
    return e.speeds(a) > e.speeds(b);
  });
  return idx;
}

/// Zeroed variables replace the fastest outgoing rows. Drop sets are tried
/// fastest first; one is accepted when the kept rows stay well conditioned on
/// the free variables, otherwise the best conditioned set is used.
std::vector<int> select_characteristic_fields(const EigenDecomposition& evo, Side side, const std::vector<int>& zeroed,
                                              int n_char) {
  const std::vector<int> order = sorted_by_outward_speed(evo, side);
  const int m = static_cast<int>(order.size());
  const int n_z = static_cast<int>(zeroed.size());
  auto keep_for = [&](const std::vector<int>& drop) {
    std::vector<int> kept;
    for (int f : order) {
      if (static_cast<int>(kept.size()) == n_char) break;
      if (std::find(drop.begin(), drop.end(), f) == drop.end()) kept.push_back(f);
    }
    return kept;
  };
  if (n_z == 0 || n_char == 0) return keep_for({});

  std::vector<int> free_vars;
  for (int k = 0; k < m; ++k)
    if (std::find(zeroed.begin(), zeroed.end(), k) == zeroed.end()) free_vars.push_back(k);
  auto conditioning = [&](const std::vector<int>& kept) {
    Mat rows(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(free_vars.size()));
    for (std::size_t r = 0; r < kept.size(); ++r) {
      const Eigen::RowVectorXd l = evo.left.row(kept[r]);
      const double scale = l.lpNorm<Eigen::Infinity>();
      for (std::size_t c = 0; c < free_vars.size(); ++c)
        rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = scale > 0.0 ? l(free_vars[c]) / scale : 0.0;
    }
    if (rows.rows() > rows.cols()) return 0.0;
    Eigen::JacobiSVD<Mat> svd(rows);
    const Vec sv = svd.singularValues();
    return sv.size() && sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  };

  // Drop sets of size n_z over positions in `order`, lexicographic from the fastest.
  std::vector<int> pos(static_cast<std::size_t>(n_z));
  std::iota(pos.begin(), pos.end(), 0);
  std::vector<int> best;
  double best_cond = -1.0;
  while (true) {
    std::vector<int> drop;
    for (int p : pos) drop.push_back(order[static_cast<std::size_t>(p)]);
    const std::vector<int> kept = keep_for(drop);
    const double cond = conditioning(kept);
    if (cond > 1e-6) return kept;
    if (cond > best_cond) {
      best_cond = cond;
      best = kept;
    }
    int i = n_z - 1;
    while (i >= 0 && pos[static_cast<std::size_t>(i)] == m - n_z + i) --i;
    if (i < 0) break;
    ++pos[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n_z; ++j) pos[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

double max_abs_speed(const EigenDecomposition& a, const EigenDecomposition& b) {
  return std::max(a.speeds.cwiseAbs().maxCoeff(), b.speeds.cwiseAbs().maxCoeff());
}

}  // namespace

// ---------------------------------------------------------------------------

ExtrapolationRule ExtrapolationRule::make(int order, std::span<const double> nodes, double end) {
  if (order < 0) throw StencilError("extrapolation order must be non-negative");
  if (nodes.size() < static_cast<std::size_t>(order) + 1) {
    throw StencilError("extrapolation of order " + std::to_string(order) + " needs " + std::to_string(order + 1) +
                       " bulk points, got " + std::to_string(nodes.size()));
  }
  ExtrapolationRule r;
  r.order = order;
  r.spacing = end - nodes[0];
  if (r.spacing == 0.0) throw StencilError("nearest bulk point coincides with the domain end");
  const std::vector<double> value_pts(nodes.begin(), nodes.begin() + order + 1);
  r.kappa = lagrange_weights(value_pts, end);
  if (order == 0) {
    r.gamma_end = 0.0;
    r.gamma = {0.0};
    return r;
  }
  // Derivative through the end point and the `order` nearest bulk points.
  std::vector<double> grad_pts{end};
  grad_pts.insert(grad_pts.end(), nodes.begin(), nodes.begin() + order);
  const std::vector<double> dw = lagrange_derivative_weights(grad_pts, end);
  r.gamma_end = dw[0] * r.spacing;
  r.gamma.assign(dw.begin() + 1, dw.end());
  for (double& g : r.gamma) g *= r.spacing;
  return r;
}

Vec ExtrapolationRule::value(std::span<const Vec> bulk) const {
  if (bulk.size() < kappa.size()) throw StencilError("too few bulk values for extrapolation");
  Vec out = Vec::Zero(bulk[0].size());
  for (std::size_t j = 0; j < kappa.size(); ++j) out += kappa[j] * bulk[j];
  return out;
}

Vec ExtrapolationRule::gradient(const Vec& q_end, std::span<const Vec> bulk) const {
  if (bulk.size() < gamma.size()) throw StencilError("too few bulk values for the end derivative");
  Vec out = gamma_end * q_end;
  for (std::size_t j = 0; j < gamma.size(); ++j) out += gamma[j] * bulk[j];
  return out / spacing;
}

void validate_stencil(const ExtrapolationRule& rule, std::span<const double> nodes, double end, double tol) {
  if (nodes.size() < rule.kappa.size()) throw StencilError("stencil geometry has too few nodes");
  for (int i = 0; i <= rule.order; ++i) {
    double m = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < rule.kappa.size(); ++j) {
      const double term = rule.kappa[j] * std::pow(nodes[j] - end, i);
      m += term;
      scale += std::abs(term);
    }
    const double target = i == 0 ? 1.0 : 0.0;
    if (std::abs(m - target) > tol * std::max(1.0, scale)) {
      throw StencilError("value moment " + std::to_string(i) + " is " + std::to_string(m) + ", expected " +
                         std::to_string(target));
    }
  }
  if (rule.order == 0) return;
  for (int i = 0; i <= rule.order; ++i) {
    double m = i == 0 ? rule.gamma_end : 0.0;
    double scale = std::abs(m);
    for (std::size_t j = 0; j < rule.gamma.size(); ++j) {
      const double term = rule.gamma[j] * std::pow(nodes[j] - end, i);
      m += term;
      scale += std::abs(term);
    }
    // sum gamma (x_j - x_end)^i = spacing * delta_i1
    const double target = i == 1 ? rule.spacing : 0.0;
    if (std::abs(m - target) > tol * std::max(std::abs(rule.spacing), scale)) {
      throw StencilError("derivative moment " + std::to_string(i) + " is " + std::to_string(m) + ", expected " +
                         std::to_string(target));
    }
  }
}

Vec ghost_point_value(const Vec& q_hat, const Vec& q_near, double spacing, double ghost_offset) {
  return q_hat + ghost_offset * (q_hat - q_near) / spacing;
}

Vec second_difference(const Vec& left, const Vec& centre, const Vec& right, double h_minus, double h_plus) {
  return 2.0 / (h_minus + h_plus) * ((right - centre) / h_plus - (centre - left) / h_minus);
}

// ---------------------------------------------------------------------------

ForcingScope forcing_scope_from_string(const std::string& name) {
  if (name == "outgoing-static" || name == "outgoing_static") return ForcingScope::OutgoingStatic;
  if (name == "all") return ForcingScope::All;
  if (name == "none") return ForcingScope::None;
  throw ConfigError("forcing_scope", "unknown forcing scope '" + name + "'");
}

std::string to_string(ForcingScope s) {
  switch (s) {
    case ForcingScope::OutgoingStatic: return "outgoing-static";
    case ForcingScope::All: return "all";
    case ForcingScope::None: return "none";
  }
  return "?";
}

double forcing_coefficient(const ForcingSpec& spec, int field, const EigenDecomposition& at_end,
                           const EigenDecomposition& at_near, double spacing, Side side) {
  if (spec.coefficient == 0.0 || spec.scope == ForcingScope::None) return 0.0;
  const double s = outward_sign(side);
  const bool eligible = spec.scope == ForcingScope::All ||
                        std::max(s * at_end.speeds(field), s * at_near.speeds(field)) > -spec.static_tol;
  if (!eligible) return 0.0;
  return 4.0 * spec.coefficient * max_abs_speed(at_end, at_near) / std::abs(spacing);
}

bool check_forcing_bound(double coefficient, double c_max, double gamma_end) {
  return coefficient >= 0.0 && 4.0 * coefficient < 1.0 / c_max - gamma_end;
}

// ---------------------------------------------------------------------------

EigenPolicy eigen_policy_from_string(const std::string& name) {
  if (name == "default" || name == "nearest-selects") return EigenPolicy::NearestSelectsEndEvolves;
  if (name == "centre" || name == "center") return EigenPolicy::Centre;
  if (name == "end") return EigenPolicy::End;
  if (name == "nearest") return EigenPolicy::Nearest;
  throw ConfigError("eigen_policy", "unknown eigen policy '" + name + "'");
}

Vec floor_positive(const BoundaryPhysics& physics, Vec q, double floor) {
  for (int k : physics.positive_variables()) q(k) = std::max(q(k), floor);
  return q;
}

EigenPair eigen_evaluation(EigenPolicy policy, const BoundaryPhysics& physics, const Vec& q_end, const Vec& q_near,
                           double length) {
  const Vec e = floor_positive(physics, q_end);
  const Vec n = floor_positive(physics, q_near);
  switch (policy) {
    case EigenPolicy::NearestSelectsEndEvolves: return {physics.eigen(n, length), physics.eigen(e, length)};
    case EigenPolicy::Centre: {
      const EigenDecomposition c = physics.eigen(floor_positive(physics, 0.5 * (q_end + q_near)), length);
      return {c, c};
    }
    case EigenPolicy::End: {
      const EigenDecomposition c = physics.eigen(e, length);
      return {c, c};
    }
    case EigenPolicy::Nearest: {
      const EigenDecomposition c = physics.eigen(n, length);
      return {c, c};
    }
  }
  throw ConfigError("eigen_policy", "unhandled policy");
}

// ---------------------------------------------------------------------------

int BoundaryCondition::differential_count(int) const { return 0; }

void BoundaryCondition::differential_rows(int, const Vec& v, const BoundaryLocal&, Mat& rows, Vec& rhs) const {
  rows.resize(0, v.size());
  rhs.resize(0);
}

Vec BoundaryCondition::time_derivative(int mode, const Vec&, const BoundaryLocal&) const {
  return Vec::Zero(algebraic_count(mode));
}

int BoundaryCondition::refine_mode(int mode, const Vec&, const BoundaryLocal&) const { return mode; }

std::optional<double> BoundaryCondition::event(int, const Vec&, const BoundaryLocal&) const { return std::nullopt; }

int BoundaryCondition::mode_after_event(int mode, const Vec&, const BoundaryLocal&) const { return mode; }

int BoundaryCondition::initial_mode(const Vec&, const BoundaryLocal&) const { return 0; }

// ---------------------------------------------------------------------------

BoundaryLocal boundary_local(const BoundarySetup& setup, const Vec& v, double t, EigenPair* storage) {
  const int m = setup.physics->size();
  BoundaryLocal local;
  local.side = setup.side;
  local.t = t;
  local.length = setup.length(t);
  local.length_rate = setup.length_rate;
  local.q_near = setup.bulk.at(0);
  *storage = eigen_evaluation(setup.eigen_policy, *setup.physics, v.head(m), local.q_near, local.length);
  local.selection = &storage->selection;
  return local;
}

Vec BoundaryPhysics::uniform_gradient(const Vec& q, double, double) const { return Vec::Zero(q.size()); }

namespace {

struct RowBlock {
  Mat B;
  Vec b;
  std::vector<int> fields;
  int incoming = 0;
};

RowBlock characteristic_rows(const BoundarySetup& setup, const Vec& v, double t, int mode,
                             const std::vector<int>& zeroed) {
  const BoundaryPhysics& ph = *setup.physics;
  const int m = ph.size();
  const int n = m + 1;
  const double s = outward_sign(setup.side);
  const double len = setup.length(t);
  const Vec q = v.head(m);

  EigenPair storage;
  const BoundaryLocal local = boundary_local(setup, v, t, &storage);
  const EigenDecomposition& evo = storage.evolution;
  const EigenDecomposition& sel = storage.selection;

  const int n_alg = setup.condition->algebraic_count(mode);
  const int n_diff = setup.condition->differential_count(mode);
  const int n_z = static_cast<int>(zeroed.size());
  const int n_char = n - n_alg - n_diff - n_z;
  if (n_char < 0) {
    throw ConfigError("boundary", setup.condition->name() + " imposes " + std::to_string(n_alg + n_diff) +
                                      " conditions with " + std::to_string(n_z) + " zeroed variables on " +
                                      std::to_string(n) + " unknowns");
  }

  RowBlock out;
  for (int f = 0; f < m; ++f)
    if (s * sel.speeds(f) < -setup.forcing.static_tol) ++out.incoming;

  out.fields = select_characteristic_fields(evo, setup.side, zeroed, n_char);

  const Vec q_hat = setup.rule.value(setup.bulk);
  const Vec grad = setup.rule.gradient(q, setup.bulk);
  const Vec psi = ph.source(q, len);
  const Vec psi_acc = ph.source_per_acceleration(q, len);
  // Incoming fields are non-reflecting: zero physical gradient, not zero transformed gradient.
  const Vec grad_in = ph.uniform_gradient(q, len, setup.length_rate);

  Mat diff_rows;
  Vec diff_rhs;
  setup.condition->differential_rows(mode, v, local, diff_rows, diff_rhs);

  out.B.resize(n_char + n_diff, n);
  out.b.resize(n_char + n_diff);
  for (int r = 0; r < n_char; ++r) {
    const int f = out.fields[static_cast<std::size_t>(r)];
    const Eigen::RowVectorXd l = evo.left.row(f);
    const double outward = s * evo.speeds(f);
    const double d = forcing_coefficient(setup.forcing, f, evo, sel, setup.rule.spacing, setup.side);
    out.B.row(r).head(m) = l;
    out.B(r, m) = -l.dot(psi_acc);
    out.b(r) = -s * (std::max(outward, 0.0) * l.dot(grad) + std::min(outward, 0.0) * l.dot(grad_in)) + l.dot(psi) +
               d * l.dot(q_hat - q);
  }
  if (n_diff > 0) {
    out.B.bottomRows(n_diff) = diff_rows;
    out.b.tail(n_diff) = diff_rhs;
  }
  return out;
}

Vec algebraic_residual(const BoundarySetup& setup, const Vec& v, double t, int mode, const std::vector<int>& zeroed) {
  EigenPair storage;
  const BoundaryLocal local = boundary_local(setup, v, t, &storage);
  const Vec g = setup.condition->residual(mode, v, local);
  Vec out(g.size() + static_cast<Eigen::Index>(zeroed.size()));
  out.head(g.size()) = g;
  for (std::size_t k = 0; k < zeroed.size(); ++k) out(g.size() + static_cast<Eigen::Index>(k)) = v(zeroed[k]);
  return out;
}

Mat algebraic_jacobian(const BoundarySetup& setup, const Vec& v, double t, int mode, const std::vector<int>& zeroed) {
  EigenPair storage;
  const BoundaryLocal local = boundary_local(setup, v, t, &storage);
  const Mat gm = setup.condition->jacobian(mode, v, local);
  Mat out = Mat::Zero(gm.rows() + static_cast<Eigen::Index>(zeroed.size()), v.size());
  out.topRows(gm.rows()) = gm;
  for (std::size_t k = 0; k < zeroed.size(); ++k) out(gm.rows() + static_cast<Eigen::Index>(k), zeroed[k]) = 1.0;
  return out;
}

Vec algebraic_time_derivative(const BoundarySetup& setup, const Vec& v, double t, int mode,
                              const std::vector<int>& zeroed) {
  EigenPair storage;
  const BoundaryLocal local = boundary_local(setup, v, t, &storage);
  const Vec gt = setup.condition->time_derivative(mode, v, local);
  Vec out = Vec::Zero(gt.size() + static_cast<Eigen::Index>(zeroed.size()));
  out.head(gt.size()) = gt;
  return out;
}

void apply_zero_and_cap(const BoundarySetup& setup, Vec& v, const std::vector<int>& zeroed) {
  for (int k : zeroed) v(k) = 0.0;
  const Vec& near = setup.bulk.at(0);
  for (int k : setup.physics->positive_variables()) {
    const double cap = kEndToNearCap * std::max(near(k), 0.0);
    if (v(k) > cap) v(k) = cap;
  }
}

}  // namespace

BoundaryAssembly assemble_boundary_dae(const BoundarySetup& setup, const Vec& v, double t, int mode,
                                       const std::vector<int>& zeroed) {
  BoundaryAssembly out;
  const RowBlock block = characteristic_rows(setup, v, t, mode, zeroed);
  out.characteristic_fields = block.fields;
  out.incoming = block.incoming;
  out.count_consistent = setup.condition->algebraic_count(mode) + setup.condition->differential_count(mode) ==
                         block.incoming + 1;

  auto shared = std::make_shared<BoundarySetup>(setup);
  DaeSystem& d = out.dae;
  d.dim = setup.physics->size() + 1;
  d.B = [shared, mode, zeroed](const Vec& w, double tt) { return characteristic_rows(*shared, w, tt, mode, zeroed).B; };
  d.b = [shared, mode, zeroed](const Vec& w, double tt) { return characteristic_rows(*shared, w, tt, mode, zeroed).b; };
  d.g = [shared, mode, zeroed](const Vec& w, double tt) { return algebraic_residual(*shared, w, tt, mode, zeroed); };
  d.G = [shared, mode, zeroed](const Vec& w, double tt) { return algebraic_jacobian(*shared, w, tt, mode, zeroed); };
  d.g_t = [shared, mode, zeroed](const Vec& w, double tt) {
    return algebraic_time_derivative(*shared, w, tt, mode, zeroed);
  };
  return out;
}

BoundaryStepResult step_boundary(const BoundaryStepRequest& req) {
  const BoundarySetup& setup = *req.setup;
  const BoundaryPhysics& ph = *setup.physics;
  const double w = 1.0 - req.eta;
  BoundaryStepResult out;
  int mode = req.mode;
  std::vector<int> zeroed;
  BoundarySetup next_setup = setup;
  if (!std::isnan(req.length_next)) {
    const double l = req.length_next;
    next_setup.length = [l](double) { return l; };
  }

  if (req.policy == Projection::NR) {
    int mode_changes = 0;
    NrProvider provider = [&](const Vec& v_next, int iteration, bool& changed) {
      if (iteration > 0) {
        for (int k : ph.positive_variables()) {
          if (v_next(k) < kPositivityFloor && std::find(zeroed.begin(), zeroed.end(), k) == zeroed.end()) {
            zeroed.push_back(k);
            changed = true;
          }
        }
        if (mode_changes < 4) {
          EigenPair storage;
          const BoundaryLocal local = boundary_local(next_setup, v_next, req.t_next, &storage);
          const int refined = setup.condition->refine_mode(mode, v_next, local);
          if (refined != mode) {
            mode = refined;
            changed = true;
            ++mode_changes;
          }
        }
      }
      const RowBlock rows = characteristic_rows(setup, req.v_stage, req.t_stage, mode, zeroed);
      return NrLinearization{rows.B, rows.b, algebraic_jacobian(next_setup, v_next, req.t_next, mode, zeroed),
                             algebraic_residual(next_setup, v_next, req.t_next, mode, zeroed)};
    };
    const Vec seed = req.seed.size() == req.v_stage.size() ? req.seed : Vec(Vec::Zero(req.v_stage.size()));
    const NrSubstepResult r =
        rknr_iterate(provider, req.v_stage, req.v_initial, req.dt, req.eta, seed, req.tol, req.max_iter,
                     req.explicit_variant);
    out.delta = r.delta;
    out.iterations = r.iterations;
  } else {
    const BoundaryAssembly a = assemble_boundary_dae(setup, req.v_stage, req.t_stage, mode, zeroed);
    Vec at = req.v_stage;
    if (req.policy == Projection::I1) at = project_p1(a.dae, at, req.t_stage, req.tol, req.max_iter);
    if (req.policy == Projection::I2) at = project_p2(a.dae, at, req.t_stage, req.tol, req.max_iter);
    out.delta = req.dt * rk0_derivative(a.dae, at, req.t_stage);
  }

  Vec v_next = req.eta * req.v_initial + w * (req.v_stage + out.delta);
  if (req.policy != Projection::NR) {
    for (int k : ph.positive_variables())
      if (v_next(k) < kPositivityFloor) zeroed.push_back(k);
  }
  std::sort(zeroed.begin(), zeroed.end());
  apply_zero_and_cap(setup, v_next, zeroed);
  out.next = BoundaryState{v_next, mode, zeroed};
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct FitResult {
  Vec v;
  std::vector<int> at_floor;
  double infeasibility;
};

FitResult fit_primitive(const BoundarySetup& setup, const Vec& v_start, double t, int mode) {
  const BoundaryPhysics& ph = *setup.physics;
  const int n = static_cast<int>(v_start.size());
  Vec v = v_start;
  const int m = ph.size();
  v.head(m) = floor_positive(ph, v.head(m));
  const double len = setup.length(t);
  const Vec target = ph.primitive(v, len);

  std::vector<int> active;
  for (int k : ph.positive_variables())
    if (v(k) <= kPositivityFloor) active.push_back(k);

  double infeas = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    EigenPair storage;
    const BoundaryLocal local = boundary_local(setup, v, t, &storage);
    const Vec g = setup.condition->residual(mode, v, local);
    const Mat gj = setup.condition->jacobian(mode, v, local);
    const int nc = static_cast<int>(g.size() + active.size());
    Vec c(nc);
    Mat cj = Mat::Zero(nc, n);
    c.head(g.size()) = g;
    cj.topRows(g.size()) = gj;
    for (std::size_t k = 0; k < active.size(); ++k) {
      c(g.size() + static_cast<Eigen::Index>(k)) = v(active[k]) - kPositivityFloor;
      cj(g.size() + static_cast<Eigen::Index>(k), active[k]) = 1.0;
    }
    infeas = c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0;

    const Vec r = ph.primitive(v, len) - target;
    const Mat j = ph.primitive_jacobian(v, len);
    // Null-space Gauss-Newton step: the constraint part stays well conditioned
    // even when floored depths make the fit Jacobian very large.
    Vec dv = Vec::Zero(n);
    Mat basis = Mat::Identity(n, n);
    if (nc > 0) {
      Eigen::JacobiSVD<Mat> svd(cj, Eigen::ComputeFullU | Eigen::ComputeFullV);
      svd.setThreshold(1e-12);
      const auto rank = svd.rank();
      if (rank < nc) throw RankDeficiencyError("initialize_boundary: dependent constraints", {});
      dv = svd.solve(-c);
      basis = svd.matrixV().rightCols(n - rank);
    }
    if (basis.cols() > 0) {
      const Mat reduced = j * basis;
      dv += basis * reduced.colPivHouseholderQr().solve(-(r + j * dv));
    }

    // Keep positivity-preserved variables on or above the floor.
    bool newly_active = false;
    for (int k : ph.positive_variables()) {
      if (std::find(active.begin(), active.end(), k) != active.end()) continue;
      if (v(k) + dv(k) < kPositivityFloor) {
        dv(k) = kPositivityFloor - v(k);
        active.push_back(k);
        newly_active = true;
      }
    }
    v += dv;
    const double step = dv.lpNorm<Eigen::Infinity>();
    if (!newly_active && step <= 1e-14 * (1.0 + v.lpNorm<Eigen::Infinity>())) {
      EigenPair st;
      const BoundaryLocal loc = boundary_local(setup, v, t, &st);
      infeas = setup.condition->residual(mode, v, loc).lpNorm<Eigen::Infinity>();
      break;
    }
  }
  FitResult out{v, {}, infeas};
  for (int k : ph.positive_variables())
    if (v(k) <= kPositivityFloor * (1.0 + 1e-9)) out.at_floor.push_back(k);
  return out;
}

}  // namespace

BoundaryState initialize_boundary(const BoundarySetup& setup, const Vec& v_start, double t,
                                  std::optional<int> forced_mode) {
  const BoundaryCondition& cond = *setup.condition;
  std::vector<int> candidates;
  if (forced_mode) {
    candidates.push_back(*forced_mode);
  } else {
    EigenPair storage;
    const BoundaryLocal local = boundary_local(setup, v_start, t, &storage);
    const int first = cond.initial_mode(v_start, local);
    candidates.push_back(first);
    for (int m = 0; m < static_cast<int>(cond.mode_names().size()); ++m)
      if (m != first) candidates.push_back(m);
  }

  std::optional<BoundaryState> fallback;
  double worst = 0.0;
  for (int mode : candidates) {
    FitResult fit;
    try {
      fit = fit_primitive(setup, v_start, t, mode);
    } catch (const RankDeficiencyError&) {
      continue;
    }
    worst = std::max(worst, fit.infeasibility);
    if (!(fit.infeasibility <= 1e-9)) continue;
    BoundaryState st{fit.v, mode, fit.at_floor};
    for (int k : st.zeroed) st.v(k) = 0.0;
    if (forced_mode) return st;
    EigenPair storage;
    const BoundaryLocal local = boundary_local(setup, st.v, t, &storage);
    const auto ev = cond.event(mode, st.v, local);
    if (!ev || *ev > 0.0) return st;
    if (!fallback) fallback = st;
  }
  if (fallback) return *fallback;
  throw InitializationError("no boundary mode of " + cond.name() + " admits a feasible initial value", worst);
}

std::optional<double> detect_event(const std::function<double(double)>& f, double dt, double rel_tol) {
  double lo = 0.0, hi = dt;
  const double f0 = f(lo);
  if (f0 == 0.0) return 0.0;
  const bool positive = f0 > 0.0;
  auto keeps_sign = [positive](double v) { return positive ? v > 0.0 : v < 0.0; };
  if (keeps_sign(f(hi))) return std::nullopt;
  while (hi - lo > dt * rel_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (keeps_sign(f(mid))) lo = mid;
    else hi = mid;
  }
  return hi;
}

}  // namespace hypbc
