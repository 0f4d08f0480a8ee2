#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranmlb/domain.hpp"
#include "ranmlb/ransim.hpp"
#include "ranmlb/xapp.hpp"

namespace ranmlb::harness {

struct ScenarioParseError : std::runtime_error {
  ScenarioParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "scenario:" + std::to_string(line) + ": " + what
                                    : "scenario: " + what),
        line(line) {}

  int line;  // 0 for file-level errors
};

/// Everything one run needs: radio layout, UE population, traffic, policy
/// parameters and duration.
struct ScenarioSpec {
  sim::SimConfig sim;
  std::vector<CellConfig> cells;
  std::vector<sim::UeSetup> ues;
  xapp::XappConfig xapp;
  std::uint64_t duration_ms = 0;

  /// Cross-checks the assembled spec; duration_ms may still be zero after
  /// parsing when the caller intends to supply it on the command line.
  void validate(bool require_duration = true) const;
};

// Line-oriented `section.key = value` format, `#` starts a comment.
//
//   sim.slot_duration_ms = 0.5         # whole microseconds required
//   sim.granularity_ms   = 1000
//   sim.ho_interruption_ms = 50
//   sim.seed             = 0
//   sim.flush_buffer_on_ho = false
//   run.duration_ms      = 80000
//   cell.<cell_id>.du    = <du_id>     # required per cell
//   cell.<cell_id>.total_prbs / bandwidth_hz / scs_hz / center_frequency_hz
//   ue.<ue_id>.role      = mobile | stationary
//   ue.<ue_id>.initial_du = <du_id>
//   ue.<ue_id>.spectral_efficiency = 4
//   ue.<ue_id>.traffic   = <start_ms>:<cbr_bps>[,<start_ms>:<cbr_bps>...]
//   xapp.home_du         = <du_id>     # required
//   xapp.prb_high_percent / prb_low_percent / buf_high_bits / buf_low_bits
//   xapp.ttt_ms / window_ms / granularity_ms / use_disjunction
ScenarioSpec parse_scenario(const std::string& text);

ScenarioSpec load_scenario_file(const std::string& path);

}  // namespace ranmlb::harness
