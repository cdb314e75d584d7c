#include "hypbc/sim.hpp"

#include "hypbc/csv.hpp"
#include "hypbc/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace hypbc::sim {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFroude = 1.2;
constexpr double kBarrier = 0.5;

const std::vector<std::string> kProblems = {"critwall",       "particle",     "alphawave",    "lockrel-semi",
                                            "lockrel-finite", "manifold:tp1", "manifold:tp2", "manifold:tp3",
                                            "manifold:tp4"};

const std::set<std::string> kKeys = {"version", "problem",      "resolution",   "forcing",       "scope",
                                     "order",   "policy",       "explicit_nr",  "eigen_policy",  "t_end",
                                     "output_times", "deterministic", "ladder"};

std::string policy_name(Projection p) { return p == Projection::None ? "RK0" : to_string(p); }

std::string eigen_policy_name(EigenPolicy p) {
  switch (p) {
    case EigenPolicy::NearestSelectsEndEvolves: return "default";
    case EigenPolicy::Centre: return "centre";
    case EigenPolicy::End: return "end";
    case EigenPolicy::Nearest: return "nearest";
  }
  return "default";
}

double number_field(const json& j, const char* key) {
  if (!j.at(key).is_number()) throw ConfigError(key, "expected a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

int int_field(const json& j, const char* key) {
  if (!j.at(key).is_number_integer()) throw ConfigError(key, "expected an integer");
  return j.at(key).get<int>();
}

std::string string_field(const json& j, const char* key) {
  if (!j.at(key).is_string()) throw ConfigError(key, "expected a string");
  return j.at(key).get<std::string>();
}

bool bool_field(const json& j, const char* key) {
  if (!j.at(key).is_boolean()) throw ConfigError(key, "expected true or false");
  return j.at(key).get<bool>();
}

double exact_forcing_bound_gamma(int cells) {
  const double dy = 1.0 / cells;
  const std::vector<double> nodes = {1.0 - 0.5 * dy, 1.0 - 1.5 * dy};
  return ExtrapolationRule::make(1, nodes, 1.0).gamma_end;
}

// Physical (h, u) at cell centres and the mesh rate there.
struct CentreSample {
  double x;
  sw::Primitive p;
};

std::vector<CentreSample> centre_samples(const sw::Snapshot& s) {
  const int n = static_cast<int>(s.cells.rows());
  const double l = s.x_right - s.x_left;
  const double vl = s.left(3), vr = s.right(3);
  std::vector<CentreSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double y = (j + 0.5) / n;
    out.push_back({s.x_left + y * l, sw::to_primitive(s.cells.row(j).transpose(), l, (1.0 - y) * vl + y * vr)});
  }
  return out;
}

// Mean of |h - h_exact| and |u - u_exact|; u is skipped where the exact depth vanishes.
template <class Exact>
double whole_domain_l1(const sw::Snapshot& s, const Exact& exact) {
  std::vector<double> sim, ref;
  for (const CentreSample& c : centre_samples(s)) {
    const sw::Primitive e = exact(c.x);
    sim.push_back(c.p.h);
    ref.push_back(e.h);
    if (e.h > 0.0) {
      sim.push_back(c.p.u);
      ref.push_back(e.u);
    }
  }
  return l1_error(sim, ref);
}

std::vector<const sw::EndSample*> right_samples(const sw::RunResult& r) {
  std::vector<const sw::EndSample*> out;
  for (const sw::EndSample& e : r.boundary)
    if (e.side == Side::Right) out.push_back(&e);
  return out;
}

double froude_residual(const sw::RunResult& r) {
  double worst = 0.0;
  for (const sw::EndSample* e : right_samples(r)) {
    const double target = kFroude * std::sqrt(std::max(e->h, 0.0));
    worst = std::max({worst, std::abs(e->u - target), std::abs(e->speed - target)});
  }
  return worst;
}

double relative_drift(const std::vector<double>& series) {
  if (series.empty() || series.front() == 0.0) return kNaN;
  double worst = 0.0;
  for (double v : series) worst = std::max(worst, std::abs(v / series.front() - 1.0));
  return worst;
}

std::vector<Metric> sw_metrics(const RunConfig& c, const sw::RunResult& r) {
  const sw::Snapshot& last = r.snapshots.back();
  const double t = last.t;
  const std::vector<const sw::EndSample*> right = right_samples(r);
  std::vector<Metric> out;
  if (c.problem == "critwall") {
    const double l1 = t <= 0.5 ? whole_domain_l1(last, [t](double x) { return sw::dambreak_exact(x, t); }) : kNaN;
    double transitions = 0.0, first = kNaN;
    for (const sw::EventRecord& e : r.events) {
      if (e.side != Side::Right) continue;
      if (transitions == 0.0) first = e.t;
      transitions += 1.0;
    }
    out = {{"l1_whole", l1}, {"transitions", transitions}, {"first_transition", first}};
  } else if (c.problem == "particle") {
    // Wet fluid carries phi = 2 everywhere.
    const double end_error = right.empty() ? kNaN : std::abs(right.back()->phi - 2.0);
    double since = kNaN;
    for (auto it = right.rbegin(); it != right.rend() && (*it)->phi == 2.0; ++it) since = (*it)->t;
    double drift = kNaN;
    const auto q = std::find_if(right.begin(), right.end(), [](const sw::EndSample* e) { return e->t >= 0.25; });
    if (q != right.end()) {
      drift = 0.0;
      for (auto it = q; it != right.end(); ++it) drift = std::max(drift, std::abs((*it)->phi - (*q)->phi));
    }
    out = {{"phi_error_end", end_error}, {"phi_exact_since", since}, {"phi_drift_after_quarter", drift}};
  } else if (c.problem == "alphawave") {
    const sw::AlphaWave w = sw::AlphaWave::standard();
    double beta = 0.0;
    for (const sw::EndSample* e : right) beta = std::max(beta, std::abs(e->u - 2.0 * std::sqrt(std::max(e->h, 0.0)) + 2.0));
    out = {{"l1_whole", whole_domain_l1(last, [&w, t](double x) { return w.at(x, t); })}, {"beta_max", beta}};
  } else if (c.problem == "lockrel-semi") {
    const sw::SemiInfiniteLock lock{kFroude};
    const double xr = lock.front_position(t);
    const sw::Primitive er = lock.at(xr, t);
    const sw::EndSample& e = *right.back();
    const double boundary = l1_error(std::vector<double>{e.h, e.u, e.position}, std::vector<double>{er.h, er.u, xr});
    out = {{"l1_whole", whole_domain_l1(last, [&lock, t](double x) { return lock.at(x, t); })},
           {"l1_boundary", boundary},
           {"froude_residual", froude_residual(r)}};
  } else if (c.problem == "lockrel-finite") {
    out = {{"volume_drift", relative_drift(r.volume)},
           {"tracer_drift", relative_drift(r.tracer)},
           {"froude_residual", froude_residual(r)}};
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ParsedConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKeys.contains(key)) throw ConfigError(key, "unknown key");

  ParsedConfig out;
  RunConfig& c = out.config;
  if (j.contains("version")) {
    c.version = int_field(j, "version");
    if (c.version != kConfigVersion)
      throw ConfigError("version", "unsupported schema version " + std::to_string(c.version));
  }
  if (!j.contains("problem")) throw ConfigError("problem", "required");
  c.problem = string_field(j, "problem");
  if (std::find(kProblems.begin(), kProblems.end(), c.problem) == kProblems.end())
    throw ConfigError("problem", "unknown problem '" + c.problem + "'");
  const bool manifold = is_manifold(c.problem);
  const int min_resolution = manifold ? 1 : 4;

  if (j.contains("resolution")) c.resolution = int_field(j, "resolution");
  if (c.resolution < min_resolution || c.resolution > 1000000)
    throw ConfigError("resolution", "must lie in [" + std::to_string(min_resolution) + ", 1000000]");
  if (j.contains("forcing")) c.forcing = number_field(j, "forcing");
  if (c.forcing < 0.0) throw ConfigError("forcing", "must be non-negative");
  if (j.contains("scope")) {
    try {
      c.scope = forcing_scope_from_string(string_field(j, "scope"));
    } catch (const ConfigError& e) {
      throw ConfigError("scope", e.what());
    }
  }
  if (j.contains("order")) c.order = int_field(j, "order");
  if (c.order < 1 || c.order > 3) throw ConfigError("order", "must be 1, 2 or 3");
  if (j.contains("policy")) {
    try {
      c.policy = projection_from_string(string_field(j, "policy"));
    } catch (const ConfigError& e) {
      throw ConfigError("policy", e.what());
    }
  }
  if (j.contains("explicit_nr")) c.explicit_nr = bool_field(j, "explicit_nr");
  if (j.contains("eigen_policy")) c.eigen_policy = eigen_policy_from_string(string_field(j, "eigen_policy"));
  if (j.contains("t_end")) {
    c.t_end = number_field(j, "t_end");
    if (!(*c.t_end > 0.0)) throw ConfigError("t_end", "must be positive");
    if (manifold && *c.t_end != 1.0) throw ConfigError("t_end", "manifold problems run on [0, 1]");
  }
  if (j.contains("output_times")) {
    if (!j["output_times"].is_array()) throw ConfigError("output_times", "expected an array of numbers");
    double prev = -1.0;
    for (const auto& v : j["output_times"]) {
      if (!v.is_number()) throw ConfigError("output_times", "expected an array of numbers");
      const double t = v.get<double>();
      if (!(t > prev) || !(t <= end_time(c))) throw ConfigError("output_times", "must increase within (0, t_end]");
      prev = t;
      c.output_times.push_back(t);
    }
  }
  if (j.contains("deterministic")) c.deterministic = bool_field(j, "deterministic");
  if (j.contains("ladder")) {
    if (!j["ladder"].is_array()) throw ConfigError("ladder", "expected an array of integers");
    for (const auto& v : j["ladder"]) {
      if (!v.is_number_integer() || v.get<int>() < min_resolution)
        throw ConfigError("ladder", "entries must be integers >= " + std::to_string(min_resolution));
      c.ladder.push_back(v.get<int>());
    }
    std::sort(c.ladder.begin(), c.ladder.end());
    c.ladder.erase(std::unique(c.ladder.begin(), c.ladder.end()), c.ladder.end());
  }

  if (!manifold) {
    const sw::SolverOptions o = solver_options(c);
    if (!check_forcing_bound(c.forcing, o.c_max, exact_forcing_bound_gamma(c.resolution))) {
      std::ostringstream w;
      w << "forcing " << c.forcing << " is outside the stability bound 0 <= 4 D < 1/C_max - gamma_end (D < "
        << (1.0 / o.c_max - exact_forcing_bound_gamma(c.resolution)) / 4.0 << ")";
      out.warnings.push_back(w.str());
    }
  }
  return out;
}

std::string to_json(const RunConfig& c) {
  json j;
  j["version"] = c.version;
  j["problem"] = c.problem;
  j["resolution"] = c.resolution;
  j["forcing"] = c.forcing;
  j["scope"] = to_string(c.scope);
  j["order"] = c.order;
  j["policy"] = policy_name(c.policy);
  j["explicit_nr"] = c.explicit_nr;
  j["eigen_policy"] = eigen_policy_name(c.eigen_policy);
  j["t_end"] = end_time(c);
  j["output_times"] = c.output_times;
  j["deterministic"] = c.deterministic;
  j["ladder"] = ladder(c);
  return j.dump(2);
}

bool is_manifold(const std::string& problem) { return problem.rfind("manifold:", 0) == 0; }

std::vector<std::string> problem_ids() { return kProblems; }

double end_time(const RunConfig& c) {
  if (c.t_end) return *c.t_end;
  if (c.problem == "critwall") return 0.5;
  if (c.problem == "alphawave") return 4.0;
  if (c.problem == "lockrel-semi") return 2.0;
  if (c.problem == "lockrel-finite") return 10.0;
  return 1.0;
}

std::vector<int> ladder(const RunConfig& c) {
  if (!c.ladder.empty()) return c.ladder;
  if (is_manifold(c.problem)) return {100, 176, 316, 564, 1000};
  return {100, 178, 316, 562, 1000};
}

sw::SwProblem make_sw_problem(const std::string& problem) {
  sw::SwProblem p;
  p.name = problem;
  if (problem == "critwall" || problem == "particle") {
    // Dam of unit depth on the left half over a dry bed.
    const double phi = problem == "critwall" ? 1.0 : 2.0;
    p.initial = [phi](double x) { return x <= 0.5 ? sw::Primitive{1.0, phi, 0.0} : sw::Primitive{0.0, 0.0, 0.0}; };
    p.left = std::make_shared<sw::Wall>();
    if (problem == "critwall")
      p.right = std::make_shared<sw::EnergyOvertopping>(kBarrier);
    else
      p.right = std::make_shared<sw::Wall>();
  } else if (problem == "alphawave") {
    const sw::AlphaWave w = sw::AlphaWave::standard();
    p.initial = [w](double x) {
      sw::Primitive q = w.at(x, 0.0);
      q.phi = 1.0;
      return q;
    };
    p.left = std::make_shared<sw::PrescribedDepth>(
        w.h0, [](double t) { return std::numbers::pi / 20.0 * std::cos(std::numbers::pi * t / 2.0); });
    p.right = std::make_shared<sw::NonReflecting>();
  } else if (problem == "lockrel-semi" || problem == "lockrel-finite") {
    p.initial = [](double) { return sw::Primitive{1.0, 1.0, 0.0}; };
    if (problem == "lockrel-semi")
      p.left = std::make_shared<sw::NonReflecting>();
    else
      p.left = std::make_shared<sw::Wall>();
    p.right = std::make_shared<sw::FroudeFront>(kFroude);
  } else {
    throw ConfigError("problem", "'" + problem + "' is not a shallow-water problem");
  }
  return p;
}

sw::SolverOptions solver_options(const RunConfig& c) {
  sw::SolverOptions o;
  o.cells = c.resolution;
  o.order = c.order;
  o.policy = c.policy;
  o.explicit_nr = c.explicit_nr;
  o.forcing.coefficient = c.forcing;
  o.forcing.scope = c.scope;
  o.eigen_policy = c.eigen_policy;
  return o;
}

const Metric* RunOutcome::metric(const std::string& name) const {
  for (const Metric& m : metrics)
    if (m.name == name) return &m;
  return nullptr;
}

std::vector<std::string> metric_names(const std::string& problem) {
  if (problem == "critwall") return {"l1_whole", "transitions", "first_transition"};
  if (problem == "particle") return {"phi_error_end", "phi_exact_since", "phi_drift_after_quarter"};
  if (problem == "alphawave") return {"l1_whole", "beta_max"};
  if (problem == "lockrel-semi") return {"l1_whole", "l1_boundary", "froude_residual"};
  if (problem == "lockrel-finite") return {"volume_drift", "tracer_drift", "froude_residual"};
  if (is_manifold(problem)) return {"err_differential", "err_algebraic"};
  throw ConfigError("problem", "unknown problem '" + problem + "'");
}

RunOutcome run(const RunConfig& config) {
  RunOutcome out;
  out.config = config;
  try {
    if (is_manifold(config.problem)) {
      ProjectionPolicy policy;
      policy.variant = config.policy;
      policy.explicit_nr = config.explicit_nr;
      const TestbedRow row =
          run_testbed(testbed_kind_from_string(config.problem.substr(9)), config.order, policy, config.resolution);
      out.testbed = row;
      out.metrics = {{"err_differential", row.err_differential}, {"err_algebraic", row.err_algebraic}};
      return out;
    }
    std::vector<double> times = config.output_times;
    const double t_end = end_time(config);
    if (times.empty() || times.back() < t_end) times.push_back(t_end);
    out.result = sw::run_sw_problem(make_sw_problem(config.problem), solver_options(config), times);
    out.metrics = sw_metrics(config, out.result);
  } catch (const InstabilityError& e) {
    out.failed = true;
    out.failure = e.what();
    out.failure_time = e.time();
  } catch (const std::exception& e) {
    out.failed = true;
    out.failure = e.what();
  }
  if (out.failed) {
    for (const std::string& name : metric_names(config.problem)) out.metrics.push_back({name, kNaN});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Expectation> declared_expectations(const RunConfig& c) {
  std::vector<Expectation> out;
  if (c.problem == "critwall" && c.forcing > 0.0) out.push_back({"l1_whole", Expectation::Order, 1.0, 0.3});
  if (c.problem == "alphawave" && c.scope == ForcingScope::OutgoingStatic)
    out.push_back({"l1_whole", Expectation::Order, 2.0, 0.3});
  if (c.problem == "alphawave" && c.scope == ForcingScope::All)
    out.push_back({"l1_whole", Expectation::Order, 1.0, 0.3});
  if (c.problem == "lockrel-semi" && c.policy == Projection::NR)
    out.push_back({"l1_whole", Expectation::Order, 1.0, 0.3});
  if (c.problem == "lockrel-semi" && c.policy == Projection::None)
    out.push_back({"l1_boundary", Expectation::NotConverging, 0.0, 0.0});
  if (c.problem == "manifold:tp1" && c.policy == Projection::None && c.order <= 2)
    out.push_back({"err_algebraic", Expectation::Order, static_cast<double>(c.order), 0.25});
  return out;
}

bool ConvergenceReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& r) { return r.pass; });
}

int sweep_threads(std::size_t jobs) {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("HYPBC_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return std::max(1, std::min(n, static_cast<int>(jobs)));
}

ConvergenceReport sweep(const RunConfig& base, std::vector<int> resolutions, int threads) {
  if (resolutions.empty()) resolutions = ladder(base);
  std::sort(resolutions.begin(), resolutions.end());
  resolutions.erase(std::unique(resolutions.begin(), resolutions.end()), resolutions.end());

  ConvergenceReport report;
  report.base = base;
  report.rows.resize(resolutions.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < resolutions.size(); i = next++) {
      RunConfig c = base;
      c.resolution = resolutions[i];
      RunOutcome o = run(c);
      report.rows[i] = SweepRow{resolutions[i], std::move(o.metrics), o.failed, o.failure};
    }
  };
  const int n = threads > 0 ? std::min<int>(threads, static_cast<int>(resolutions.size())) : sweep_threads(resolutions.size());
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const std::string& name : metric_names(base.problem)) {
    std::vector<double> res, err;
    for (const SweepRow& row : report.rows) {
      for (const Metric& m : row.metrics) {
        if (m.name == name && !row.failed && std::isfinite(m.value) && m.value > 0.0) {
          res.push_back(row.resolution);
          err.push_back(m.value);
        }
      }
    }
    MetricFit fit{name, std::nullopt};
    if (res.size() >= 2) fit.fit = fit_order(res, err, 4);
    report.fits.push_back(fit);
    series[name] = {res, err};
  }

  for (const Expectation& e : declared_expectations(base)) {
    CheckResult r{e, false, ""};
    const bool any_failed = std::any_of(report.rows.begin(), report.rows.end(), [](const SweepRow& s) { return s.failed; });
    const auto& [res, err] = series[e.metric];
    std::ostringstream d;
    if (any_failed) {
      d << "run failure in sweep";
    } else if (e.kind == Expectation::Order) {
      const auto f = std::find_if(report.fits.begin(), report.fits.end(), [&](const MetricFit& m) { return m.metric == e.metric; });
      if (f != report.fits.end() && f->fit) {
        r.pass = std::abs(f->fit->order - e.target) <= e.tolerance;
        d << "order " << f->fit->order << " expected " << e.target << " +- " << e.tolerance;
      } else {
        d << "no fit";
      }
    } else if (err.size() >= 2) {
      // Less than a threefold decrease from the coarsest to the finest run.
      const double ratio = err.front() / err.back();
      r.pass = ratio < 3.0;
      d << "coarsest/finest " << ratio << (r.pass ? ": does not converge" : ": converges");
    } else {
      d << "too few values";
    }
    r.detail = d.str();
    report.checks.push_back(r);
  }
  return report;
}

void write_sweep_csv(std::ostream& os, const ConvergenceReport& report) {
  CsvWriter w(os, {"resolution", "metric", "value", "status"});
  for (const SweepRow& row : report.rows)
    for (const Metric& m : row.metrics) w.row(row.resolution, m.name, m.value, row.failed ? "failed" : "ok");
}

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_to_json(const ConvergenceReport& r) {
  json j;
  j["config"] = json::parse(to_json(r.base));
  j["rows"] = json::array();
  for (const SweepRow& row : r.rows) {
    json jr;
    jr["resolution"] = row.resolution;
    jr["failed"] = row.failed;
    jr["failure"] = row.failure;
    json m = json::object();
    for (const Metric& x : row.metrics) m[x.name] = number(x.value);
    jr["metrics"] = m;
    j["rows"].push_back(jr);
  }
  j["fits"] = json::array();
  for (const MetricFit& f : r.fits) {
    json jf;
    jf["metric"] = f.metric;
    jf["order"] = f.fit ? number(f.fit->order) : json(nullptr);
    jf["residual"] = f.fit ? number(f.fit->residual) : json(nullptr);
    j["fits"].push_back(jf);
  }
  j["checks"] = json::array();
  for (const CheckResult& c : r.checks) {
    json jc;
    jc["metric"] = c.expectation.metric;
    jc["kind"] = c.expectation.kind == Expectation::Order ? "order" : "not-converging";
    jc["target"] = c.expectation.target;
    jc["tolerance"] = c.expectation.tolerance;
    jc["pass"] = c.pass;
    jc["detail"] = c.detail;
    j["checks"].push_back(jc);
  }
  j["passed"] = r.passed();
  return j;
}

std::string cell_text(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_number()) {
    std::ostringstream s;
    s.precision(6);
    s << v.get<double>();
    return s.str();
  }
  return v.dump();
}

}  // namespace

std::string report_json(const ConvergenceReport& report) { return report_to_json(report).dump(2) + "\n"; }

std::string render_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("report", std::string("malformed JSON: ") + e.what());
  }
  if (!j.contains("rows") || !j.contains("config")) throw ConfigError("report", "not a sweep report");
  std::ostringstream os;
  const json& c = j["config"];
  os << "problem " << c.value("problem", "?") << "  D=" << cell_text(c["forcing"]) << "  scope=" << c.value("scope", "?")
     << "  S=" << cell_text(c["order"]) << "  policy=" << c.value("policy", "?") << "\n";
  std::vector<std::string> names;
  if (!j["rows"].empty())
    for (const auto& [k, v] : j["rows"][0]["metrics"].items()) names.push_back(k);
  os << "resolution";
  for (const std::string& n : names) os << "  " << n;
  os << "\n";
  for (const json& row : j["rows"]) {
    os << row["resolution"].get<int>();
    for (const std::string& n : names) os << "  " << cell_text(row["metrics"][n]);
    if (row.value("failed", false)) os << "  FAILED: " << row.value("failure", "");
    os << "\n";
  }
  for (const json& f : j["fits"]) os << "fit " << f["metric"].get<std::string>() << ": order " << cell_text(f["order"])
                                     << " residual " << cell_text(f["residual"]) << "\n";
  for (const json& k : j["checks"])
    os << (k["pass"].get<bool>() ? "PASS " : "FAIL ") << k["metric"].get<std::string>() << " " << k["kind"].get<std::string>()
       << ": " << k["detail"].get<std::string>() << "\n";
  return os.str();
}

void write_metrics_json(std::ostream& os, const RunOutcome& outcome) {
  json j;
  j["config"] = json::parse(to_json(outcome.config));
  j["failed"] = outcome.failed;
  j["failure"] = outcome.failure;
  j["failure_time"] = outcome.failure_time ? number(*outcome.failure_time) : json(nullptr);
  json m = json::object();
  for (const Metric& x : outcome.metrics) m[x.name] = number(x.value);
  j["metrics"] = m;
  j["steps"] = outcome.result.steps;
  j["rejected"] = outcome.result.rejected;
  j["warnings"] = outcome.warnings;
  os << j.dump(2) << "\n";
}

}  // namespace hypbc::sim
