#pragma once

#include "hypbc/boundary.hpp"
#include "hypbc/convergence.hpp"
#include "hypbc/solver.hpp"
#include "hypbc/testbed.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hypbc::sim {

inline constexpr int kConfigVersion = 1;

/// One simulation request. Problem ids: critwall, particle, alphawave,
/// lockrel-semi, lockrel-finite, manifold:tp1 ... manifold:tp4.
struct RunConfig {
  int version = kConfigVersion;
  std::string problem = "critwall";
  int resolution = 100;  // cells, or time steps for manifold problems
  double forcing = 0.5;
  ForcingScope scope = ForcingScope::OutgoingStatic;
  int order = 2;
  Projection policy = Projection::NR;
  bool explicit_nr = false;
  EigenPolicy eigen_policy = EigenPolicy::NearestSelectsEndEvolves;
  std::optional<double> t_end;      // problem default when empty
  std::vector<double> output_times;  // snapshot times; {end time} when empty
  bool deterministic = true;
  std::vector<int> ladder;  // sweep resolutions; problem default when empty
};

struct ParsedConfig {
  RunConfig config;
  std::vector<std::string> warnings;
};

/// Parses the JSON form. Unknown keys, bad types and out-of-range values throw
/// ConfigError naming the field; forcing outside the stability bound only warns.
ParsedConfig parse_config(const std::string& text);
std::string to_json(const RunConfig& config);

bool is_manifold(const std::string& problem);
std::vector<std::string> problem_ids();
double end_time(const RunConfig& config);
std::vector<int> ladder(const RunConfig& config);

/// Initial data and boundary conditions of a shallow-water problem id.
sw::SwProblem make_sw_problem(const std::string& problem);
sw::SolverOptions solver_options(const RunConfig& config);

struct Metric {
  std::string name;
  double value;
};

struct RunOutcome {
  RunConfig config;
  std::vector<Metric> metrics;  // fixed order per problem
  bool failed = false;
  std::string failure;             // error text when failed
  std::optional<double> failure_time;  // set for instability reports
  sw::RunResult result;            // shallow-water runs
  std::optional<TestbedRow> testbed;  // manifold runs
  std::vector<std::string> warnings;

  const Metric* metric(const std::string& name) const;
};

/// Metric names reported for a problem id, in output order.
std::vector<std::string> metric_names(const std::string& problem);

/// Runs one configuration. Solver failures are captured in the outcome, not thrown.
RunOutcome run(const RunConfig& config);

// ---------------------------------------------------------------------------
// Resolution sweeps.

struct Expectation {
  enum Kind { Order, NotConverging };
  std::string metric;
  Kind kind = Order;
  double target = 0.0;     // expected order
  double tolerance = 0.0;  // allowed deviation of the fitted order
};

/// Expectations attached to a configuration, e.g. first order for critwall.
std::vector<Expectation> declared_expectations(const RunConfig& config);

struct MetricFit {
  std::string metric;
  std::optional<OrderFit> fit;  // empty when fewer than two finite positive errors
};

struct CheckResult {
  Expectation expectation;
  bool pass = false;
  std::string detail;
};

struct SweepRow {
  int resolution;
  std::vector<Metric> metrics;
  bool failed = false;
  std::string failure;
};

struct ConvergenceReport {
  RunConfig base;
  std::vector<SweepRow> rows;  // ascending resolution
  std::vector<MetricFit> fits;
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Worker count for a sweep of `jobs` runs; HYPBC_THREADS caps it.
int sweep_threads(std::size_t jobs);

/// Runs every resolution concurrently and fits orders over the finest four.
ConvergenceReport sweep(const RunConfig& base, std::vector<int> resolutions = {}, int threads = 0);

/// Columns resolution, metric, value, status.
void write_sweep_csv(std::ostream& os, const ConvergenceReport& report);
/// Deterministic JSON: keys in fixed order, doubles with 17 significant digits.
std::string report_json(const ConvergenceReport& report);
/// Plain-text table of a report previously written by report_json.
std::string render_report(const std::string& json_text);

void write_metrics_json(std::ostream& os, const RunOutcome& outcome);

}  // namespace hypbc::sim
