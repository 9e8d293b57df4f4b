#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "nullinf/scenario.hpp"

using namespace nullinf;

namespace {

const char* pulse_config = R"({
  "name": "pulse",
  "kind": "gaussian-pulse",
  "grid": {"sphere": [12, 24]},
  "pulse": {"width": 0.5},
  "outputs": ["asymptote", "radiate"]
})";

std::string with(std::string_view base, std::string_view key, std::string_view value) {
  auto j = nlohmann::json::parse(base);
  j[std::string(key)] = nlohmann::json::parse(value);
  return j.dump();
}

double value(const Report& r, std::string_view key) {
  const ReportValue* v = r.find(key);
  REQUIRE(v != nullptr);
  return v->value;
}

}  // namespace

TEST_CASE("config parsing") {
  const ScenarioConfig c = parse_config(pulse_config);
  CHECK(c.name == "pulse");
  CHECK(c.kind == ScenarioKind::gaussian_pulse);
  CHECK(c.n_theta == 12);
  CHECK(c.n_phi == 24);
  REQUIRE(c.pulse.has_value());
  CHECK(c.pulse->width == 0.5);
  REQUIRE(c.outputs.size() == 2);
  CHECK(c.outputs[1] == Block::radiate);
  CHECK(c.tolerances == default_tolerances());

  // 4-vectors are normalized; rapidity form matches
  const ScenarioConfig q = parse_config(R"({"name": "q", "kind": "static-charge",
      "charges": [{"Q": [0.6, 0.8], "u_in": [2, 0, 0, 1]}]})");
  const FourVector u = q.charges.front().u_in;
  CHECK(std::abs(dot(u, u) - 1.0) < 1e-15);
  CHECK(std::abs(u[0] - 2.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(q.charges.front().Q == cplx{0.6, 0.8});
  CHECK(euclidean_norm(q.charges.front().u_out - u) == 0.0);
  const ScenarioConfig r = parse_config(R"({"name": "r", "kind": "static-charge",
      "charges": [{"u_in": {"rapidity": 0.7, "direction": [0, 0, 2]}}]})");
  CHECK(std::abs(r.charges.front().u_in[0] - std::cosh(0.7)) < 1e-15);
  CHECK(std::abs(r.charges.front().u_in[3] - std::sinh(0.7)) < 1e-15);

  // tolerance overrides merge with the defaults
  const ScenarioConfig t = parse_config(with(pulse_config, "tolerances", R"({"defect.budget.P": 1e-3})"));
  CHECK(t.tolerances.at("defect.budget.P") == 1e-3);
  CHECK(t.tolerances.at("defect.budget.M") == default_tolerances().at("defect.budget.M"));
  ScenarioConfig s = t;
  scale_tolerances(s, 10.0);
  CHECK(s.tolerances.at("defect.budget.P") == doctest::Approx(1e-2));
  CHECK_THROWS_AS(scale_tolerances(s, 0.0), DomainError);
}

TEST_CASE("config rejection") {
  CHECK_THROWS_AS(parse_config("{"), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "bogus", "1")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "kind", R"("tachyon")")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "grid", R"({"sphere": [2, 24]})")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "grid", R"({"sphere": [12, 1024]})")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "grid", R"({"sphere": [12.5, 24]})")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "grid", R"({"s_window": {"nodes": 2}})")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "outputs", R"(["spectrum"])")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "tolerances", R"({"defect.unknown": 1})")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "tolerances", R"({"defect.budget.P": -1})")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "pulse", R"({"width": 0})")), DomainError);
  CHECK_THROWS_AS(parse_config(with(pulse_config, "dressing", R"({})")), DomainError);
  CHECK_THROWS_AS(parse_config(R"({"name": "x", "kind": "gaussian-pulse"})"), DomainError);
  CHECK_THROWS_AS(parse_config(R"({"name": "x", "kind": "static-charge", "charges": [{"u_in": [1, 2, 0, 0]}]})"),
                  DomainError);
  CHECK_THROWS_AS(parse_config(R"({"name": "x", "kind": "static-charge",
      "charges": [{"u_in": [1, 0, 0, 0], "u_out": {"rapidity": 1}}]})"),
                  DomainError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), DomainError);
  CHECK_THROWS_AS(run_scenario(parse_config(R"({"name": "x", "kind": "gaussian-pulse", "pulse": {}})")),
                  DomainError);
}

TEST_CASE("block names round trip") {
  for (Block b : {Block::asymptote, Block::radiate, Block::budget, Block::longrange, Block::shift, Block::dirac})
    CHECK(parse_block(block_name(b)) == b);
  CHECK_FALSE(parse_block("verify").has_value());
}

TEST_CASE("pulse report values and formats") {
  const ScenarioConfig c = parse_config(pulse_config);
  const Report r = run_scenario(c);
  CHECK(r.violations.empty());
  // P.t = 2 sqrt(pi/2) / width for the isotropic Gaussian news
  CHECK(std::abs(value(r, "P.out-n.t") - 5.0132565492620005) < 1e-6);
  CHECK(std::abs(value(r, "P.out-n.z")) < 1e-12);
  CHECK(value(r, "Q.re") == 0.0);
  CHECK(r.find("P.out-n.t")->error < 1e-6);
  CHECK(r.find("nothing") == nullptr);
  CHECK(r.provenance.at("blocks") == "asymptote,radiate");
  CHECK(r.provenance.at("grid.sphere") == "12x24");
  CHECK(r.provenance.at("config.hash").size() == 16);

  // the table carries every value exactly
  std::istringstream in(r.table());
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    if (line == "key\tvalue\terror") {
      header = true;
      continue;
    }
    std::istringstream f(line);
    std::string key, val, err;
    std::getline(f, key, '\t');
    std::getline(f, val, '\t');
    std::getline(f, err, '\t');
    CHECK(std::stod(val) == value(r, key));
    ++rows;
  }
  CHECK(header);
  CHECK(rows == r.values.size());

  const auto j = nlohmann::json::parse(r.structured());
  CHECK(j.at("scenario") == "pulse");
  REQUIRE(j.at("values").size() == r.values.size());
  CHECK(j.at("values")[0].at("key") == r.values[0].key);
  CHECK(j.at("values")[0].at("value").get<double>() == r.values[0].value);

  // a single block can be selected
  const std::array<Block, 1> only{Block::asymptote};
  const Report a = run_scenario(c, only);
  CHECK(a.find("P.out-n.t") == nullptr);
  CHECK(a.find("Q.re") != nullptr);
}

TEST_CASE("reports are identical across thread counts") {
  const ScenarioConfig c = parse_config(pulse_config);
  const int before = threads();
  set_threads(1);
  const std::string one = run_scenario(c).table();
  set_threads(3);
  const std::string three = run_scenario(c).table();
  set_threads(before);
  CHECK(one == three);
  // and the hash follows the config text
  const ScenarioConfig d = parse_config(with(pulse_config, "name", R"("other")"));
  CHECK(run_scenario(d).provenance.at("config.hash") != run_scenario(c).provenance.at("config.hash"));
}

TEST_CASE("violations and block errors") {
  ScenarioConfig c = parse_config(R"({"name": "q", "kind": "static-charge", "grid": {"sphere": [8, 16]},
      "charges": [{"Q": 1, "u_in": {"rapidity": 0.5, "direction": [1, 0, 0]}}]})");
  const std::array<Block, 1> asym{Block::asymptote};
  CHECK(run_scenario(c, asym).violations.empty());
  scale_tolerances(c, 1e-30);
  CHECK_FALSE(run_scenario(c, asym).violations.empty());

  const std::array<Block, 1> dirac{Block::dirac};
  try {
    run_scenario(c, dirac);
    FAIL("expected a DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).starts_with("dirac: "));
  }

  const ScenarioConfig w = parse_config(R"({"name": "w", "kind": "gaussian-pulse",
      "grid": {"sphere": [8, 16], "s_window": {"max_half_width": 0.5}}, "pulse": {"width": 1}})");
  const std::array<Block, 1> rad{Block::radiate};
  CHECK_THROWS_AS(run_scenario(w, rad), ConvergenceError);
}

TEST_CASE("static charge long-range values") {
  const ScenarioConfig c = parse_config(R"({"name": "q", "kind": "static-charge", "grid": {"sphere": [16, 32]},
      "charges": [{"Q": 0.8, "u_in": {"rapidity": 0.9, "direction": [1, 1, 0]}}], "outputs": ["longrange"]})");
  const Report r = run_scenario(c);
  CHECK(r.violations.empty());
  CHECK(std::abs(value(r, "q.mean.re") - 0.8) < 1e-10);
  CHECK(std::abs(value(r, "qp.mean.re") - 0.8) < 1e-10);
  CHECK(value(r, "mu.mix.norm") < 1e-10);
}

TEST_CASE("kink shift scenario") {
  // mirrored kink at rapidity xi: |dy| m / |Q Q0| = 4 (sinh xi cosh xi - xi) / sinh^2 xi
  const double xi = 0.5, sh = std::sinh(xi), ch = std::cosh(xi);
  const ScenarioConfig c = parse_config(R"({"name": "k", "kind": "particle-kink", "grid": {"sphere": [24, 48]},
      "charges": [{"Q": 1.5, "u_in": {"rapidity": 0.5, "direction": [0, 1, 0]},
                   "u_out": {"rapidity": 0.5, "direction": [0, -1, 0]}, "accel_time": 0.5}],
      "shift": {"Q": 0.5, "m": 2.0, "v": [1, 0, 0, 0]}, "outputs": ["shift"]})");
  const Report r = run_scenario(c);
  CHECK(r.violations.empty());
  CHECK(std::abs(value(r, "shift.ratio") - 4.0 * (sh * ch - xi) / (sh * sh)) < 1e-8);
  CHECK(std::abs(value(r, "shift.norm") - value(r, "shift.ratio") * 1.5 * 0.5 / 2.0) < 1e-12);
  CHECK(std::abs(value(r, "shift.dy.x")) < 1e-10);
  CHECK(std::abs(value(r, "shift.dy.t")) < 1e-12);
}

TEST_CASE("packet scenario with dressing") {
  const ScenarioConfig c = parse_config(R"({"name": "p", "kind": "dirac-packet",
      "packet": {"v0": [1, 0, 0, 0], "width": 0.4, "spinor": [1, 0, [0, 0.5], 0], "coupling": 0.7,
                 "grid": [16, 8, 16]},
      "dressing": {"Q0": 0.5, "u1": {"rapidity": 0.6, "direction": [0, 0, 1]}, "u2": [1, 0, 0, 0]},
      "outputs": ["dirac"]})");
  const Report r = run_scenario(c);
  CHECK(r.violations.empty());
  CHECK(std::abs(value(r, "dirac.norm") - 1.0) < 1e-12);
  CHECK(std::abs(value(r, "dirac.charge") - 0.7) < 1e-12);
  CHECK(std::abs(value(r, "dirac.q.mean") - 0.7) < 1e-7);
  CHECK(value(r, "defect.dirac.dressing") < 1e-5);
  CHECK(r.provenance.at("grid.hyperboloid") == "16x8x16");
}

TEST_CASE("verification suites") {
  const auto spin = verify_suite("minkowski_spinors", 60.0);
  CHECK_FALSE(spin.empty());
  for (const auto& r : spin) CHECK_MESSAGE(r.passed, r.name);
  const std::string table = check_table(spin);
  CHECK(table.starts_with("suite\tcheck\tstatus"));
  CHECK(table.find("PASS") != std::string::npos);

  // an exhausted budget times out every check instead of failing it
  const auto late = verify_suite("null_sphere", -1.0);
  for (const auto& r : late) {
    CHECK(r.timed_out);
    CHECK_FALSE(r.passed);
  }
  CHECK(check_table(late).find("TIMEOUT") != std::string::npos);
  CHECK_THROWS_AS(verify_suite("nonsense", 10.0), DomainError);
}
