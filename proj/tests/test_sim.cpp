#include <doctest.h>

#include "hypbc/convergence.hpp"
#include "hypbc/errors.hpp"
#include "hypbc/sim.hpp"

#include <cmath>
#include <sstream>

using namespace hypbc;

TEST_CASE("configuration defaults") {
  const sim::ParsedConfig p = sim::parse_config(R"({"problem": "critwall"})");
  const sim::RunConfig& c = p.config;
  CHECK(c.version == sim::kConfigVersion);
  CHECK(c.resolution == 100);
  CHECK(c.forcing == 0.5);
  CHECK(c.scope == ForcingScope::OutgoingStatic);
  CHECK(c.order == 2);
  CHECK(c.policy == Projection::NR);
  CHECK(c.deterministic);
  CHECK(sim::end_time(c) == 0.5);
  CHECK(p.warnings.empty());
}

TEST_CASE("configuration round trip") {
  sim::RunConfig c;
  c.problem = "lockrel-semi";
  c.resolution = 178;
  c.forcing = 1.25;
  c.scope = ForcingScope::All;
  c.policy = Projection::None;
  c.t_end = 1.5;
  c.output_times = {0.5, 1.5};
  c.ladder = {100, 316};
  const sim::RunConfig back = sim::parse_config(sim::to_json(c)).config;
  CHECK(back.problem == c.problem);
  CHECK(back.resolution == c.resolution);
  CHECK(back.forcing == c.forcing);
  CHECK(back.scope == c.scope);
  CHECK(back.policy == c.policy);
  CHECK(back.t_end == c.t_end);
  CHECK(back.output_times == c.output_times);
  CHECK(back.ladder == c.ladder);
  CHECK(sim::to_json(back) == sim::to_json(c));
}

TEST_CASE("forcing outside the stability bound warns") {
  CHECK(sim::parse_config(R"({"problem": "alphawave", "forcing": 1.5})").warnings.empty());
  for (const char* f : {"1.75", "2", "2.25"}) {
    const std::string text = std::string(R"({"problem": "alphawave", "forcing": )") + f + "}";
    CHECK_FALSE(sim::parse_config(text).warnings.empty());
  }
}

TEST_CASE("invalid configurations name the field") {
  auto field_of = [](const std::string& text) {
    try {
      sim::parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  CHECK(field_of(R"({"problem": "critwall", "resolutoin": 100})").find("resolutoin") != std::string::npos);
  CHECK(field_of(R"({"resolution": 100})").find("problem") != std::string::npos);
  CHECK(field_of(R"({"problem": "tsunami"})").find("problem") != std::string::npos);
  CHECK(field_of(R"({"problem": "critwall", "version": 2})").find("version") != std::string::npos);
  CHECK(field_of(R"({"problem": "critwall", "resolution": 2})").find("resolution") != std::string::npos);
  CHECK(field_of(R"({"problem": "critwall", "forcing": -1})").find("forcing") != std::string::npos);
  CHECK(field_of(R"({"problem": "critwall", "order": 4})").find("order") != std::string::npos);
  CHECK(field_of(R"({"problem": "critwall", "output_times": [0.3, 0.2]})").find("output_times") !=
        std::string::npos);
  CHECK(field_of(R"({"problem": "manifold:tp1", "t_end": 2})").find("t_end") != std::string::npos);
  CHECK(field_of("{not json") != "accepted");
}

TEST_CASE("l1 error and order fit") {
  CHECK(l1_error(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 4.0}) == doctest::Approx(1.0));
  const std::vector<double> res{100, 178, 316, 562, 1000};
  std::vector<double> err;
  for (double n : res) err.push_back(3.0 / (n * n));
  const OrderFit f = fit_order(res, err);
  CHECK(f.order == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
}

TEST_CASE("manifold run reports both error parts") {
  sim::RunConfig c;
  c.problem = "manifold:tp1";
  c.policy = Projection::None;
  c.resolution = 100;
  const sim::RunOutcome o = sim::run(c);
  REQUIRE_FALSE(o.failed);
  REQUIRE(o.metric("err_algebraic") != nullptr);
  CHECK(o.metric("err_algebraic")->value > 0.0);
  CHECK(o.metric("err_differential")->value > 0.0);
  CHECK(o.metric("nonsense") == nullptr);
}

TEST_CASE("sweep reports are deterministic") {
  sim::RunConfig c;
  c.problem = "manifold:tp1";
  c.order = 2;
  c.policy = Projection::None;
  const sim::ConvergenceReport a = sim::sweep(c, {100, 176, 316}, 1);
  const sim::ConvergenceReport b = sim::sweep(c, {316, 100, 176}, 3);
  CHECK(sim::report_json(a) == sim::report_json(b));
  REQUIRE(a.rows.size() == 3);
  CHECK(a.rows.front().resolution == 100);
  CHECK(a.passed());

  const std::string table = sim::render_report(sim::report_json(a));
  CHECK(table.find("err_algebraic") != std::string::npos);

  std::ostringstream csv;
  sim::write_sweep_csv(csv, a);
  CHECK(csv.str().rfind("resolution,metric,value,status\n", 0) == 0);
}

TEST_CASE("finite lock release conserves volume on a coarse grid") {
  sim::RunConfig c;
  c.problem = "lockrel-finite";
  c.resolution = 40;
  c.t_end = 2.0;
  const sim::RunOutcome o = sim::run(c);
  REQUIRE_FALSE(o.failed);
  CHECK(o.metric("volume_drift")->value <= 1e-12);
  CHECK(o.metric("tracer_drift")->value <= 1e-12);
}
