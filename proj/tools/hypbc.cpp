// Command-line front end: run, sweep, manifold-test, report.

#include "hypbc/csv.hpp"
#include "hypbc/errors.hpp"
#include "hypbc/sim.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace fs = std::filesystem;
using namespace hypbc;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

std::string read_text(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

sim::RunConfig load_config(const std::string& path) {
  sim::ParsedConfig parsed = sim::parse_config(read_text(path));
  for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
  return parsed.config;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(fs::path(dir) / name);
  if (!os) throw ConfigError("out", "cannot write into '" + dir + "'");
  return os;
}

int do_run(const std::string& config_path, const std::string& out, bool check) {
  const sim::RunConfig config = load_config(config_path);
  const sim::RunOutcome o = sim::run(config);
  for (const sim::Metric& m : o.metrics) std::cout << m.name << " " << format_double(m.value) << "\n";
  if (o.failed) {
    std::cout << "failed";
    if (o.failure_time) std::cout << " at t=" << format_double(*o.failure_time);
    std::cout << ": " << o.failure << "\n";
  }
  if (!out.empty()) {
    auto metrics = open_out(out, "metrics.json");
    sim::write_metrics_json(metrics, o);
    if (o.testbed) {
      auto os = open_out(out, "testbed.csv");
      write_testbed_csv(os, {*o.testbed});
    } else if (!o.failed) {
      auto snaps = open_out(out, "snapshots.csv");
      sw::write_snapshots_csv(snaps, o.result.snapshots);
      auto bnd = open_out(out, "boundary.csv");
      sw::write_boundary_csv(bnd, o.result.boundary);
    }
  }
  return check && o.failed ? kExitCheckFailed : 0;
}

int finish_sweep(const sim::ConvergenceReport& report, const std::string& out, bool check) {
  const std::string text = sim::report_json(report);
  std::cout << sim::render_report(text);
  if (!out.empty()) {
    auto csv = open_out(out, "sweep.csv");
    sim::write_sweep_csv(csv, report);
    auto js = open_out(out, "report.json");
    js << text;
  }
  return check && !report.passed() ? kExitCheckFailed : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-condition experiments for hyperbolic systems"};
  app.require_subcommand(1);

  std::string config_path, out, report_path;
  bool check = false;
  std::vector<int> ladder;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "Run one configuration");
  run->add_option("config", config_path, "JSON configuration ('-' for stdin)")->required();
  run->add_option("--out", out, "Directory for CSV and JSON artifacts");
  run->add_flag("--check", check, "Exit non-zero when the run fails");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a resolution ladder and fit convergence orders");
  sweep->add_option("config", config_path, "JSON configuration ('-' for stdin)")->required();
  sweep->add_option("--ladder", ladder, "Resolutions (default from the configuration or problem)")->delimiter(',');
  sweep->add_option("--threads", threads, "Worker threads (default: HYPBC_THREADS or all cores)");
  sweep->add_option("--out", out, "Directory for sweep.csv and report.json");
  sweep->add_flag("--check", check, "Exit non-zero when a declared expectation fails");

  std::string tp = "tp1", policy = "RK0";
  int order = 2;
  bool explicit_nr = false;
  CLI::App* manifold = app.add_subcommand("manifold-test", "Manifold testbed convergence for one scheme");
  manifold->add_option("--problem", tp, "tp1 .. tp4")->check(CLI::IsMember({"tp1", "tp2", "tp3", "tp4"}));
  manifold->add_option("--order", order, "RK stages S")->check(CLI::Range(1, 3));
  manifold->add_option("--policy", policy, "RK0, P1, P2, I1, I2 or NR");
  manifold->add_flag("--explicit", explicit_nr, "Single Newton iteration per RKNR substep");
  manifold->add_option("--ladder", ladder, "Step counts")->delimiter(',');
  manifold->add_option("--threads", threads, "Worker threads");
  manifold->add_option("--out", out, "Directory for sweep.csv and report.json");
  manifold->add_flag("--check", check, "Exit non-zero when a declared expectation fails");

  CLI::App* report = app.add_subcommand("report", "Print a report.json written by sweep");
  report->add_option("report", report_path, "Path to report.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(config_path, out, check);
    if (*sweep) {
      sim::RunConfig config = load_config(config_path);
      return finish_sweep(sim::sweep(config, ladder, threads), out, check);
    }
    if (*manifold) {
      sim::RunConfig config;
      config.problem = "manifold:" + tp;
      config.order = order;
      config.policy = projection_from_string(policy);
      config.explicit_nr = explicit_nr;
      return finish_sweep(sim::sweep(config, ladder, threads), out, check);
    }
    if (*report) {
      std::cout << sim::render_report(read_text(report_path));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
