#pragma once

#include "hypbc/linalg.hpp"
#include "hypbc/rk.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hypbc {

/// Semi-explicit DAE over v in R^n:  B(v,t) dv/dt = b(v,t),  g(v,t) = 0,
/// with B having n - m rows and g having m components.
struct DaeSystem {
  int dim = 0;
  std::function<Mat(const Vec&, double)> B;
  std::function<Vec(const Vec&, double)> b;
  std::function<Vec(const Vec&, double)> g;
  std::function<Mat(const Vec&, double)> G;    // dg/dv
  std::function<Vec(const Vec&, double)> g_t;  // dg/dt at fixed v
};

enum class Projection { None, P1, P2, I1, I2, NR };

std::string to_string(Projection p);
/// Accepts RK0 (alias None), P1, P2, I1, I2, NR.
Projection projection_from_string(const std::string& name);

struct ProjectionPolicy {
  Projection variant = Projection::None;
  double tol = 1e-14;
  int max_iter = 50;
  bool explicit_nr = false;  // single Newton iteration seeded from the previous substep
};

/// Derivative from the stacked system [B; G] v' = [b; -g_t].
Vec rk0_derivative(const DaeSystem& sys, const Vec& v, double t);

/// Newton projection v <- v - G^T (G G^T)^{-1} g.
Vec project_p1(const DaeSystem& sys, const Vec& v, double t, double tol = 1e-14, int max_iter = 50);
/// Newton projection v <- v - [B; G]^{-1} [0; g].
Vec project_p2(const DaeSystem& sys, const Vec& v, double t, double tol = 1e-14, int max_iter = 50);

struct NrIteration {
  double residual;   // ||g(v_i[s+1])||_inf after the update
  double increment;  // ||dv_{i+1} - dv_i||_inf
};

struct NrSubstepResult {
  Vec euler;  // v + dv, the Euler value fed into the RK blend
  Vec delta;  // dv
  int iterations = 0;
  std::vector<NrIteration> history;
};

/// One RKNR substep from v at t_stage towards t_next. Iterates the Newton update
/// until the increment of dv falls below tol, or once when explicit.
NrSubstepResult rknr_substep(const DaeSystem& sys, const Vec& v, const Vec& v0, double t_stage, double t_next,
                             double dt, double eta, const Vec& delta_seed, double tol, int max_iter,
                             bool explicit_variant);

/// Builds linear RKNR data for one iteration. Supplied by callers whose system
/// depends on discrete choices (modes, zeroed variables) re-evaluated each iteration.
struct NrLinearization {
  Mat B;  // at (v, t_stage)
  Vec b;
  Mat G;  // at (v_next, t_next)
  Vec g;
};

using NrProvider = std::function<NrLinearization(const Vec& v_next, int iteration, bool& changed)>;

NrSubstepResult rknr_iterate(const NrProvider& provider, const Vec& v, const Vec& v0, double dt, double eta,
                             const Vec& delta_seed, double tol, int max_iter, bool explicit_variant);

/// Integrates one RK step under a projection policy. Holds the previous RKNR
/// increment so successive steps can seed the Newton iteration.
class DaeStepper {
 public:
  DaeStepper(DaeSystem sys, RkScheme scheme, ProjectionPolicy policy);
  Vec step(const Vec& v, double t, double dt);
  /// Residual ||g||_inf after the first Newton iteration of every RKNR substep so far.
  const std::vector<double>& first_iteration_residuals() const { return first_residuals_; }
  int total_nr_iterations() const { return nr_iterations_; }

 private:
  DaeSystem sys_;
  RkScheme scheme_;
  ProjectionPolicy policy_;
  std::optional<Vec> last_delta_;
  std::vector<double> first_residuals_;
  int nr_iterations_ = 0;
};

Vec step_with_projection(const DaeSystem& sys, const Vec& v, double t, double dt, const RkScheme& scheme,
                         const ProjectionPolicy& policy);

struct ErrorParts {
  Vec differential;  // P_B e
  Vec algebraic;     // P_G e
};

/// Splits an error vector with P_B = B^T (B B^T)^{-1} B and P_G likewise, at (v, t).
ErrorParts error_projections(const DaeSystem& sys, const Vec& v, double t, const Vec& error);

}  // namespace hypbc
