#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ranmlb/runner.hpp"
#include "ranmlb/scenario.hpp"

namespace {

int run_command(const std::string& scenario_path, std::uint64_t duration_ms, bool has_duration,
                std::uint64_t seed, bool has_seed, const std::string& out_dir, bool slot_log) {
  auto spec = ranmlb::harness::load_scenario_file(scenario_path);
  if (has_duration) {
    spec.duration_ms = duration_ms;
  }
  if (has_seed) {
    spec.sim.seed = seed;
  }
  const auto artifacts = ranmlb::harness::run_scenario(spec, slot_log);
  ranmlb::harness::write_outputs(artifacts, out_dir, slot_log);

  std::cout << "ran " << artifacts.duration_ms << " ms (seed " << artifacts.seed << "), "
            << artifacts.handover_count() << " handover(s)\n";
  for (const auto& ho : artifacts.handovers) {
    std::cout << "  t=" << ho.time_us / 1000 << " ms: UE " << ho.ue_id << " DU "
              << ho.source_du << " -> DU " << ho.target_du << " (control " << ho.control_id
              << ")\n";
  }
  for (const auto& [ue_id, acct] : artifacts.per_ue) {
    std::cout << "  UE " << ue_id << ": delivered " << acct.served_bits << " bits, final DU "
              << acct.final_du << "\n";
  }
  std::cout << "outputs in " << out_dir << "\n";
  return 0;
}

int validate_command(const std::string& scenario_path) {
  const auto spec = ranmlb::harness::load_scenario_file(scenario_path);
  spec.validate(/*require_duration=*/false);
  std::cout << "scenario OK: " << spec.cells.size() << " cell(s), " << spec.ues.size()
            << " ue(s), home DU " << spec.xapp.home_du;
  if (spec.duration_ms > 0) {
    std::cout << ", duration " << spec.duration_ms << " ms";
  }
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic closed-loop RAN load-balancing testbench"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::uint64_t duration_ms = 0;
  std::uint64_t seed = 0;
  bool slot_log = false;

  auto* run = app.add_subcommand("run", "run a scenario and write metric/event files");
  run->add_option("--scenario", scenario_path, "scenario file")->required();
  auto* duration_opt = run->add_option("--duration-ms", duration_ms, "override run duration");
  auto* seed_opt = run->add_option("--seed", seed, "override scenario seed");
  run->add_option("--out", out_dir, "output directory (default: out)");
  run->add_flag("--slot-log", slot_log, "also write per-slot scheduling log");

  auto* validate = app.add_subcommand("validate", "parse and validate a scenario file");
  validate->add_option("--scenario", scenario_path, "scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(scenario_path, duration_ms, duration_opt->count() > 0, seed,
                         seed_opt->count() > 0, out_dir, slot_log);
    }
    return validate_command(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
