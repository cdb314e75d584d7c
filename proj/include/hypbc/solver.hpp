#pragma once

#include "hypbc/boundary.hpp"
#include "hypbc/dae.hpp"
#include "hypbc/rk.hpp"
#include "hypbc/shallow_water.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace hypbc::sw {

struct SwProblem {
  std::string name;
  double x_left = 0.0;
  double x_right = 1.0;
  /// Physical initial data; NaN tracer or velocity is read as 0 where dry.
  std::function<Primitive(double x)> initial;
  std::shared_ptr<const BoundaryCondition> left;
  std::shared_ptr<const BoundaryCondition> right;
};

struct SolverOptions {
  int cells = 100;
  int order = 2;  // RK stages
  Projection policy = Projection::NR;
  bool explicit_nr = false;
  ForcingSpec forcing;
  EigenPolicy eigen_policy = EigenPolicy::NearestSelectsEndEvolves;
  int extrapolation_order = 1;
  double c_max = 0.125;
  double theta = 1.5;
  double blowup = 1e10;
  double nr_tol = 1e-12;
  int nr_max_iter = 50;
};

/// Boundary values at one end after an accepted step.
struct EndSample {
  double t;
  Side side;
  double h, u, phi;
  double speed;     // end velocity
  double position;  // end location
  int mode;
  double residual;  // |g|_inf of the active condition
};

struct Snapshot {
  double t;
  double x_left, x_right;
  Mat cells;  // rows = cells, columns = transformed (depth, tracer, momentum)
  Vec left, right;  // boundary unknowns (q_end, end speed)
};

struct EventRecord {
  double t;
  Side side;
  int from;
  int to;
};

/// Method-of-lines shallow-water solver on a moving domain mapped to [0, 1].
/// State layout: cells row-major, left end (4), right end (4), x_left, x_right.
class Solver {
 public:
  Solver(SwProblem problem, SolverOptions options);

  double time() const { return t_; }
  int cells() const { return cells_; }
  double dy() const { return dy_; }
  double x_left() const;
  double x_right() const;
  double length() const { return x_right() - x_left(); }
  /// Transformed cell averages.
  Mat cell_values() const;
  Vec end_values(Side side) const;
  const BoundaryState& end_state(Side side) const { return ends_[index(side)]; }
  const SwProblem& problem() const { return problem_; }
  const SolverOptions& options() const { return options_; }

  /// Steps until exactly t_target, calling on_step after every accepted step.
  /// Throws InstabilityError on blow-up or when the boundary solve breaks down.
  void advance_to(double t_target, const std::function<void(const Solver&)>& on_step = {});

  Snapshot snapshot() const;
  EndSample end_sample(Side side) const;
  /// Integrals of transformed depth and tracer over [0, 1].
  double volume() const;
  double tracer() const;

  long steps() const { return steps_; }
  long rejected() const { return rejected_; }
  const std::vector<EventRecord>& events() const { return events_; }

 private:
  struct Attempt;

  static int index(Side s) { return s == Side::Left ? 0 : 1; }
  Eigen::Index end_offset(Side s) const { return 3 * cells_ + 4 * index(s); }
  Eigen::Index position_offset(Side s) const { return 3 * cells_ + 8 + index(s); }

  BoundarySetup make_setup(Side side, const Vec& state, double t, double length, double length_rate) const;
  double bulk_rhs(const Vec& state, double a_left, double a_right, Vec& rhs) const;
  Attempt attempt(const Vec& state, double t, double dt, const RkScheme& scheme) const;
  void accept(const Attempt& a, double t_new);
  std::optional<double> event_value(Side side, const Vec& state, double t, int mode) const;
  void switch_mode(Side side);
  void post_project();
  void check_finite() const;

  SwProblem problem_;
  SolverOptions options_;
  int cells_;
  double dy_;
  BoundaryPhysicsSw physics_;
  std::array<ExtrapolationRule, 2> rules_;
  RkScheme scheme_;
  StepController controller_;
  Vec state_;
  double t_ = 0.0;
  double max_dt_ = 0.0;
  std::array<BoundaryState, 2> ends_;
  std::array<Vec, 2> seeds_;
  std::vector<EventRecord> events_;
  long steps_ = 0;
  long rejected_ = 0;
};

struct RunResult {
  std::vector<Snapshot> snapshots;      // at each requested output time
  std::vector<EndSample> boundary;      // both ends, every accepted step
  std::vector<EventRecord> events;
  std::vector<double> volume, tracer;   // per accepted step, starting with t = 0
  long steps = 0;
  long rejected = 0;
};

/// Runs to the last output time, storing snapshots at every output time.
RunResult run_sw_problem(const SwProblem& problem, const SolverOptions& options, const std::vector<double>& output_times);

/// Columns t, y, x, h_hat, phih_hat, uh_hat, h, u, phi.
void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snapshots);
/// Columns t, side, h, u, phi, speed, position, mode, residual.
void write_boundary_csv(std::ostream& os, const std::vector<EndSample>& samples);

}  // namespace hypbc::sw
