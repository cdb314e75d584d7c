#pragma once

#include "hypbc/core.hpp"
#include "hypbc/dae.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypbc {

enum class Side { Left, Right };

/// +1 when outward is the positive direction.
inline double outward_sign(Side s) { return s == Side::Right ? 1.0 : -1.0; }

// ---------------------------------------------------------------------------
// Extrapolation from the bulk towards a domain end.

/// Linear stencils giving the extrapolated end value sum_j kappa_j Q_j and
/// the end derivative (gamma_end Q_end + sum_j gamma_j Q_j) / spacing.
/// Bulk points are ordered nearest first; spacing is x_end - x_nearest (signed).
struct ExtrapolationRule {
  int order = 1;
  std::vector<double> kappa;
  double gamma_end = 1.0;
  std::vector<double> gamma;
  double spacing = 0.0;

  /// Order 0 copies the nearest value and drops the derivative; order 1 is linear.
  static ExtrapolationRule make(int order, std::span<const double> nodes, double end);
  Vec value(std::span<const Vec> bulk) const;
  Vec gradient(const Vec& q_end, std::span<const Vec> bulk) const;
};

/// Checks the moment conditions sum kappa (x_j - x_end)^i = delta_i0 for i <= order
/// and, for order >= 1, the derivative moments. Throws StencilError.
void validate_stencil(const ExtrapolationRule& rule, std::span<const double> nodes, double end, double tol = 1e-12);

/// Ghost value on the line from the nearest point through the extrapolated end value.
Vec ghost_point_value(const Vec& q_hat, const Vec& q_near, double spacing, double ghost_offset);

/// Three-point second difference with unequal spacings h_minus (left) and h_plus (right).
Vec second_difference(const Vec& left, const Vec& centre, const Vec& right, double h_minus, double h_plus);

// ---------------------------------------------------------------------------
// Forcing towards the extrapolated value.

enum class ForcingScope { OutgoingStatic, All, None };

struct ForcingSpec {
  double coefficient = 0.5;  // dimensionless; D = 4 c lambda_max / |spacing|
  double static_tol = 1e-8;
  ForcingScope scope = ForcingScope::OutgoingStatic;
};

ForcingScope forcing_scope_from_string(const std::string& name);
std::string to_string(ForcingScope s);

/// Forcing rate for field m given the two eigen evaluations at the end.
double forcing_coefficient(const ForcingSpec& spec, int field, const EigenDecomposition& at_end,
                           const EigenDecomposition& at_near, double spacing, Side side);

/// 0 <= 4 c < 1 / c_max - gamma_end.
bool check_forcing_bound(double coefficient, double c_max, double gamma_end);

// ---------------------------------------------------------------------------
// Physics seen by the boundary engine: a transformed law evaluated at an end.

class BoundaryPhysics {
 public:
  virtual ~BoundaryPhysics() = default;
  virtual int size() const = 0;
  /// Eigenstructure with speeds relative to the end of the (unit) domain.
  virtual EigenDecomposition eigen(const Vec& q, double length) const = 0;
  /// Source at the end excluding the part proportional to the end acceleration.
  virtual Vec source(const Vec& q, double length) const = 0;
  /// d(source)/d(end acceleration).
  virtual Vec source_per_acceleration(const Vec& q, double length) const = 0;
  /// Unit-coordinate gradient of the transformed variables when the physical
  /// gradient vanishes; non-zero only if the transform varies along the domain.
  virtual Vec uniform_gradient(const Vec& q, double length, double length_rate) const;
  /// Indices floored for eigen evaluation and eligible for zeroing.
  virtual std::vector<int> positive_variables() const = 0;
  /// Physical variables fitted during initialization, for v = (q, end speed).
  virtual Vec primitive(const Vec& v, double length) const = 0;
  virtual Mat primitive_jacobian(const Vec& v, double length) const = 0;
};

enum class EigenPolicy { NearestSelectsEndEvolves, Centre, End, Nearest };

EigenPolicy eigen_policy_from_string(const std::string& name);

struct EigenPair {
  EigenDecomposition selection;  // decides classification and modes
  EigenDecomposition evolution;  // builds characteristic rows
};

inline constexpr double kPositivityFloor = 1e-8;

/// Floors positivity-preserved variables before evaluating eigenstructure.
Vec floor_positive(const BoundaryPhysics& physics, Vec q, double floor = kPositivityFloor);

EigenPair eigen_evaluation(EigenPolicy policy, const BoundaryPhysics& physics, const Vec& q_end, const Vec& q_near,
                           double length);

// ---------------------------------------------------------------------------
// Algebraic boundary conditions over v = (Q_end, end speed).

struct BoundaryLocal {
  Side side = Side::Right;
  double t = 0.0;
  double length = 1.0;
  double length_rate = 0.0;
  Vec q_near;                                     // nearest bulk value
  const EigenDecomposition* selection = nullptr;  // eigen used for mode decisions
};

class BoundaryCondition {
 public:
  virtual ~BoundaryCondition() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> mode_names() const { return {name()}; }
  virtual int algebraic_count(int mode) const = 0;
  /// Rows B_q dq/dt + B_speed d(speed)/dt = b imposed in place of characteristic rows.
  virtual int differential_count(int mode) const;
  virtual void differential_rows(int mode, const Vec& v, const BoundaryLocal& local, Mat& rows, Vec& rhs) const;
  virtual Vec residual(int mode, const Vec& v, const BoundaryLocal& local) const = 0;
  virtual Mat jacobian(int mode, const Vec& v, const BoundaryLocal& local) const = 0;
  /// Partial time derivative of the residual at fixed v.
  virtual Vec time_derivative(int mode, const Vec& v, const BoundaryLocal& local) const;
  /// Mode update inside the Euler iteration; must not change algebraic_count.
  virtual int refine_mode(int mode, const Vec& v_next, const BoundaryLocal& local) const;
  /// Event function of the current mode: positive while the mode remains valid.
  virtual std::optional<double> event(int mode, const Vec& v, const BoundaryLocal& local) const;
  virtual int mode_after_event(int mode, const Vec& v, const BoundaryLocal& local) const;
  virtual int initial_mode(const Vec& v, const BoundaryLocal& local) const;
};

// ---------------------------------------------------------------------------
// Assembly and stepping.

struct BoundarySetup {
  const BoundaryPhysics* physics = nullptr;
  const BoundaryCondition* condition = nullptr;
  Side side = Side::Right;
  std::vector<Vec> bulk;  // nearest first
  ExtrapolationRule rule;
  ForcingSpec forcing;
  EigenPolicy eigen_policy = EigenPolicy::NearestSelectsEndEvolves;
  std::function<double(double)> length;  // domain length at time t
  double length_rate = 0.0;
};

struct BoundaryAssembly {
  DaeSystem dae;
  std::vector<int> characteristic_fields;  // in row order
  int incoming = 0;                        // strictly incoming fields by the selection eigen
  bool count_consistent = true;            // algebraic rows == incoming + 1
};

/// Builds the DAE for one end. Characteristic rows are kept for the fields with
/// the largest outward speeds; zeroed variables replace the fastest of those.
/// `v` and `t` fix the reported field selection; the DAE re-selects at its arguments.
BoundaryAssembly assemble_boundary_dae(const BoundarySetup& setup, const Vec& v, double t, int mode,
                                       const std::vector<int>& zeroed);

/// Local information at time t for condition evaluation.
BoundaryLocal boundary_local(const BoundarySetup& setup, const Vec& v, double t, EigenPair* storage);

struct BoundaryState {
  Vec v;  // (Q_end, end speed)
  int mode = 0;
  std::vector<int> zeroed;
};

struct BoundaryStepRequest {
  const BoundarySetup* setup = nullptr;
  Vec v_stage;
  Vec v_initial;
  double t_stage = 0.0;
  double t_next = 0.0;
  double dt = 0.0;
  double eta = 0.0;
  /// Domain length attached to the blended value; NaN uses setup.length(t_next).
  double length_next = std::numeric_limits<double>::quiet_NaN();
  int mode = 0;
  Vec seed;
  Projection policy = Projection::NR;
  double tol = 1e-12;
  int max_iter = 50;
  bool explicit_variant = false;
};

struct BoundaryStepResult {
  BoundaryState next;  // blended substep value with zeroed and clamped entries applied
  Vec delta;           // unclamped Euler increment
  int iterations = 0;
};

inline constexpr double kEndToNearCap = 1e4;

BoundaryStepResult step_boundary(const BoundaryStepRequest& request);

/// Least-squares fit of the primitive variables to v_start subject to the
/// condition and positivity floors. Floored variables come back zeroed.
BoundaryState initialize_boundary(const BoundarySetup& setup, const Vec& v_start, double t,
                                  std::optional<int> forced_mode = std::nullopt);

/// Bisection for the first sign change of f on (0, dt], to width dt * rel_tol.
/// Returns the right end of the final bracket, or nullopt if f(dt) keeps the sign of f(0).
std::optional<double> detect_event(const std::function<double(double)>& f, double dt, double rel_tol = 1e-12);

}  // namespace hypbc
