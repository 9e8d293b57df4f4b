// Command-line front end: one subcommand per report block, plus verify.
//
// Exit codes: 0 success, 2 bad input, 3 convergence failure,
// 4 invariant violation or failed check.
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nullinf/scenario.hpp"

namespace {

constexpr int exit_input = 2, exit_convergence = 3, exit_invariant = 4;

struct Common {
  std::string config, out_dir, format = "table";
  int threads = 1;
  double tolerance_scale = 1.0;
};

void emit(const std::string& text, const std::string& out_dir, const std::string& file) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / file;
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw nullinf::DomainError("cannot write " + path.string());
}

int run_block(const Common& o, nullinf::Block block) {
  nullinf::ScenarioConfig c = nullinf::load_config(o.config);
  nullinf::scale_tolerances(c, o.tolerance_scale);
  const std::array<nullinf::Block, 1> blocks{block};
  const nullinf::Report r = nullinf::run_scenario(c, blocks);
  const bool table = o.format == "table";
  emit(table ? r.table() : r.structured(), o.out_dir,
       c.name + "." + std::string(nullinf::block_name(block)) + (table ? ".tsv" : ".json"));
  for (const auto& v : r.violations) std::cerr << "violation: " << v << "\n";
  return r.violations.empty() ? 0 : exit_invariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic charges of Maxwell and Dirac fields at null infinity"};
  app.require_subcommand(1);
  Common o;
  std::string suite = "all", config_dir;
  double budget = 600.0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "scenario JSON file");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "write the report into this directory instead of stdout");
    sub->add_option("--format", o.format, "table or structured")->check(CLI::IsMember({"table", "structured"}));
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 256));
    sub->add_option("--tolerance-scale", o.tolerance_scale, "multiply every tolerance")
        ->check(CLI::PositiveNumber);
  };

  std::vector<std::pair<CLI::App*, nullinf::Block>> block_cmds;
  for (nullinf::Block b : {nullinf::Block::asymptote, nullinf::Block::radiate, nullinf::Block::budget,
                           nullinf::Block::longrange, nullinf::Block::shift, nullinf::Block::dirac}) {
    auto* sub = app.add_subcommand(std::string(nullinf::block_name(b)), "compute the " +
                                                                           std::string(nullinf::block_name(b)) +
                                                                           " block of a scenario");
    add_common(sub, true);
    block_cmds.emplace_back(sub, b);
  }
  auto* verify = app.add_subcommand("verify", "run the verification suites");
  add_common(verify, false);
  verify->add_option("--suite", suite, "module name or all");
  verify->add_option("--budget", budget, "wall-clock budget in seconds")->check(CLI::PositiveNumber);
  verify->add_option("--config-dir", config_dir, "directory of golden scenario configs")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_input;
  }

  try {
    nullinf::set_threads(o.threads);
    for (const auto& [sub, b] : block_cmds)
      if (sub->parsed()) return run_block(o, b);
    const auto results = nullinf::verify_suite(suite, budget, config_dir, o.tolerance_scale);
    emit(nullinf::check_table(results), o.out_dir, "verify.tsv");
    bool ok = true;
    for (const auto& r : results) ok = ok && (r.passed || r.timed_out);
    return ok ? 0 : exit_invariant;
  } catch (const nullinf::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const nullinf::ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return exit_convergence;
  } catch (const nullinf::InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return exit_invariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  }
}
