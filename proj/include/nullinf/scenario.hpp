// Configuration-driven scenarios, reports and the verification suites.
//
// Configs are JSON documents; the schema is documented in configs/README.md.
// Reports are deterministic: values are printed with 17 significant digits
// and every reduction runs through the fixed-tree kernels.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nullinf/charges.hpp"

namespace nullinf {

enum class ScenarioKind { static_charge, particle_kink, gaussian_pulse, dirac_packet, composite };
enum class Block { asymptote, radiate, budget, longrange, shift, dirac };

std::string_view block_name(Block b);
std::optional<Block> parse_block(std::string_view name);

struct ChargeConfig {
  cplx Q{1.0};
  FourVector u_in{{1.0, 0.0, 0.0, 0.0}}, u_out{{1.0, 0.0, 0.0, 0.0}};
  double accel_time = 0.0;
  FourVector origin{};
};

struct PulseConfig {
  double width = 1.0;
  double theta = 0.0, phi = 0.0;  // singular direction of the spin phase
};

struct BumpConfig {
  FourVector v0{{1.0, 0.0, 0.0, 0.0}};
  double width = 0.4;
  DiracSpinor u = DiracSpinor::Zero();
  Branch branch = Branch::plus;
};

struct PacketConfig {
  std::string profile = "gaussian-bump";  // gaussian-bump | two-bump | eigenpacket
  BumpConfig first, second;
  double mass = 1.0, coupling = 1.0;
  int n_rap = 32, n_theta = 16, n_phi = 32;
};

// Kink potential Phi = Q0 ln(u1.l / u2.l) used to dress a packet.
struct DressingConfig {
  double Q0 = 1.0;
  FourVector u1{{1.0, 0.0, 0.0, 0.0}}, u2{{1.0, 0.0, 0.0, 0.0}};
};

// Test particle scattered by the scenario's infrared potential Phi.
struct ShiftConfig {
  double Q = 1.0, m = 1.0;
  FourVector v{{1.0, 0.0, 0.0, 0.0}};
};

struct Expectation {
  double value = 0.0, tolerance = 0.0;
};

struct ScenarioConfig {
  std::string name;
  ScenarioKind kind = ScenarioKind::static_charge;
  FourVector t{{1.0, 0.0, 0.0, 0.0}};
  int n_theta = 24, n_phi = 48;
  ChargeOptions s_window;
  std::vector<ChargeConfig> charges;
  std::optional<PulseConfig> pulse;
  std::optional<PacketConfig> packet;
  std::optional<DressingConfig> dressing;
  ShiftConfig shift;
  std::vector<Block> outputs;
  std::map<std::string, double> tolerances;      // defaults merged with overrides
  std::map<std::string, Expectation> expected;   // golden values
  std::string canonical;                         // normalized config text
};

// Default invariant tolerances by report key.
const std::map<std::string, double>& default_tolerances();

// DomainError on malformed input, unknown keys or out-of-range resolutions.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
// Multiplies every tolerance (not the expectations).
void scale_tolerances(ScenarioConfig& c, double factor);

struct ReportValue {
  std::string key;
  double value = 0.0, error = 0.0;  // error: change against a coarser resolution
};

struct Report {
  std::string scenario;
  std::vector<ReportValue> values;                 // in emission order
  std::map<std::string, std::string> provenance;  // config hash, grids, tolerances
  std::vector<std::string> violations;            // defects above tolerance

  const ReportValue* find(std::string_view key) const;
  std::string table() const;       // tab-separated
  std::string structured() const;  // JSON
};

// Runs the requested blocks (the config outputs when empty). Errors carry the
// block name; defects above tolerance are listed in Report::violations.
Report run_scenario(const ScenarioConfig& config, std::span<const Block> blocks = {});

struct CheckResult {
  std::string suite, name;
  double residual = 0.0, tolerance = 0.0;
  bool passed = false, timed_out = false;
  std::string note;
};

// Suite names: the module names, "scenario_cli" (golden configs from
// golden_dir) and "all". Checks that would start after the budget is spent
// are reported as timed out. DomainError for an unknown suite.
std::vector<CheckResult> verify_suite(std::string_view name, double budget_seconds,
                                      const std::filesystem::path& golden_dir = {}, double tolerance_scale = 1.0);
std::string check_table(std::span<const CheckResult> results);

}  // namespace nullinf
