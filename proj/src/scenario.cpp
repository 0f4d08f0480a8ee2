#include "ranmlb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ranmlb::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return "";
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) {
    parts.push_back(part);
  }
  return parts;
}

std::uint64_t parse_u64(const std::string& value, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    if (!value.empty() && value[0] == '-') {
      throw std::invalid_argument("negative");
    }
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const std::exception&) {
    throw ScenarioParseError(line, key + ": expected an unsigned integer, got '" + value + "'");
  }
}

std::uint32_t parse_u32(const std::string& value, int line, const std::string& key) {
  const std::uint64_t v = parse_u64(value, line, key);
  if (v > 0xFFFFFFFFull) {
    throw ScenarioParseError(line, key + ": value out of range");
  }
  return static_cast<std::uint32_t>(v);
}

double parse_double(const std::string& value, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const std::exception&) {
    throw ScenarioParseError(line, key + ": expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& value, int line, const std::string& key) {
  if (value == "true" || value == "1") {
    return true;
  }
  if (value == "false" || value == "0") {
    return false;
  }
  throw ScenarioParseError(line, key + ": expected true/false, got '" + value + "'");
}

sim::TrafficProfile parse_traffic(const std::string& value, int line, const std::string& key) {
  std::vector<sim::TrafficPhase> phases;
  for (const auto& entry : split(value, ',')) {
    const auto pieces = split(trim(entry), ':');
    if (pieces.size() != 2) {
      throw ScenarioParseError(line, key + ": malformed phase '" + entry +
                                         "', expected <start_ms>:<cbr_bps>");
    }
    sim::TrafficPhase phase;
    phase.start_time_ms = parse_u64(trim(pieces[0]), line, key);
    phase.cbr_bps = parse_u64(trim(pieces[1]), line, key);
    phases.push_back(phase);
  }
  try {
    return sim::TrafficProfile(std::move(phases));
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError(line, key + ": " + e.what());
  }
}

struct Assignments {
  // key -> (line, value); remembers lines for error reporting and rejects
  // duplicate definitions.
  std::map<std::string, std::pair<int, std::string>> entries;

  void add(const std::string& key, int line, const std::string& value) {
    auto [it, inserted] = entries.emplace(key, std::make_pair(line, value));
    if (!inserted) {
      throw ScenarioParseError(line, "duplicate key '" + key + "' (first set on line " +
                                         std::to_string(it->second.first) + ")");
    }
  }
};

}  // namespace

void ScenarioSpec::validate(bool require_duration) const {
  sim.validate();
  if (cells.empty()) {
    throw std::invalid_argument("scenario: at least one cell required");
  }
  std::set<DuId> du_ids;
  std::set<CellId> cell_ids;
  for (const auto& cell : cells) {
    cell.validate();
    if (!cell_ids.insert(cell.cell_id).second) {
      throw std::invalid_argument("scenario: duplicate cell_id " + std::to_string(cell.cell_id));
    }
    if (!du_ids.insert(cell.du_id).second) {
      throw std::invalid_argument("scenario: DU " + std::to_string(cell.du_id) +
                                  " has more than one cell");
    }
  }
  std::set<UeId> ue_ids;
  for (const auto& ue : ues) {
    if (!ue_ids.insert(ue.ue_id).second) {
      throw std::invalid_argument("scenario: duplicate ue_id " + std::to_string(ue.ue_id));
    }
    if (du_ids.count(ue.initial_du) == 0) {
      throw std::invalid_argument("scenario: ue " + std::to_string(ue.ue_id) +
                                  " placed on unknown DU " + std::to_string(ue.initial_du));
    }
    if (ue.spectral_efficiency <= 0.0) {
      throw std::invalid_argument("scenario: ue " + std::to_string(ue.ue_id) +
                                  " spectral_efficiency must be > 0");
    }
  }
  xapp.validate();
  if ((static_cast<std::uint64_t>(xapp.granularity_ms) * 1000) % sim.slot_duration_us != 0) {
    throw std::invalid_argument(
        "scenario: xapp.granularity_ms must be a multiple of the slot duration");
  }
  if (require_duration && duration_ms == 0) {
    throw std::invalid_argument("scenario: run.duration_ms must be > 0");
  }
}

ScenarioSpec parse_scenario(const std::string& text) {
  ScenarioSpec spec;
  Assignments seen;
  std::map<CellId, std::map<std::string, std::pair<int, std::string>>> cell_keys;
  std::map<UeId, std::map<std::string, std::pair<int, std::string>>> ue_keys;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ScenarioParseError(line_no, "expected 'section.key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ScenarioParseError(line_no, "expected 'section.key = value'");
    }
    const auto parts = split(key, '.');

    if (parts.size() == 3 && (parts[0] == "cell" || parts[0] == "ue")) {
      const std::uint32_t id = parse_u32(parts[1], line_no, parts[0] + " id");
      auto& keys = parts[0] == "cell" ? cell_keys[id] : ue_keys[id];
      auto [it, inserted] = keys.emplace(parts[2], std::make_pair(line_no, value));
      if (!inserted) {
        throw ScenarioParseError(line_no, "duplicate key '" + key + "' (first set on line " +
                                              std::to_string(it->second.first) + ")");
      }
      continue;
    }
    if (parts.size() == 2) {
      seen.add(key, line_no, value);
      continue;
    }
    throw ScenarioParseError(line_no, "unknown key '" + key + "'");
  }

  // sim / run / xapp scalars
  const auto take = [&seen](const std::string& key) -> const std::pair<int, std::string>* {
    auto it = seen.entries.find(key);
    return it == seen.entries.end() ? nullptr : &it->second;
  };
  std::set<std::string> consumed;
  const auto scalar = [&](const std::string& key, auto&& apply) {
    if (const auto* entry = take(key)) {
      apply(entry->first, entry->second);
    }
    consumed.insert(key);
  };

  scalar("sim.slot_duration_ms", [&](int ln, const std::string& v) {
    const double ms = parse_double(v, ln, "sim.slot_duration_ms");
    const double us = ms * 1000.0;
    const auto rounded = static_cast<std::uint64_t>(std::llround(us));
    if (!(ms > 0.0) || std::abs(us - static_cast<double>(rounded)) > 1e-9 || rounded == 0) {
      throw ScenarioParseError(ln,
                               "sim.slot_duration_ms must be a positive whole number of microseconds");
    }
    spec.sim.slot_duration_us = static_cast<std::uint32_t>(rounded);
  });
  scalar("sim.granularity_ms", [&](int ln, const std::string& v) {
    spec.sim.granularity_ms = parse_u32(v, ln, "sim.granularity_ms");
  });
  scalar("sim.ho_interruption_ms", [&](int ln, const std::string& v) {
    spec.sim.ho_interruption_ms = parse_u32(v, ln, "sim.ho_interruption_ms");
  });
  scalar("sim.seed",
         [&](int ln, const std::string& v) { spec.sim.seed = parse_u64(v, ln, "sim.seed"); });
  scalar("sim.flush_buffer_on_ho", [&](int ln, const std::string& v) {
    spec.sim.flush_buffer_on_ho = parse_bool(v, ln, "sim.flush_buffer_on_ho");
  });
  scalar("run.duration_ms", [&](int ln, const std::string& v) {
    spec.duration_ms = parse_u64(v, ln, "run.duration_ms");
  });
  scalar("xapp.prb_high_percent", [&](int ln, const std::string& v) {
    spec.xapp.prb_high_percent = parse_double(v, ln, "xapp.prb_high_percent");
  });
  scalar("xapp.prb_low_percent", [&](int ln, const std::string& v) {
    spec.xapp.prb_low_percent = parse_double(v, ln, "xapp.prb_low_percent");
  });
  scalar("xapp.buf_high_bits", [&](int ln, const std::string& v) {
    spec.xapp.buf_high_bits = parse_u64(v, ln, "xapp.buf_high_bits");
  });
  scalar("xapp.buf_low_bits", [&](int ln, const std::string& v) {
    spec.xapp.buf_low_bits = parse_u64(v, ln, "xapp.buf_low_bits");
  });
  scalar("xapp.ttt_ms",
         [&](int ln, const std::string& v) { spec.xapp.ttt_ms = parse_u32(v, ln, "xapp.ttt_ms"); });
  scalar("xapp.window_ms", [&](int ln, const std::string& v) {
    spec.xapp.window_ms = parse_u32(v, ln, "xapp.window_ms");
  });
  scalar("xapp.granularity_ms", [&](int ln, const std::string& v) {
    spec.xapp.granularity_ms = parse_u32(v, ln, "xapp.granularity_ms");
  });
  scalar("xapp.home_du", [&](int ln, const std::string& v) {
    spec.xapp.home_du = parse_u32(v, ln, "xapp.home_du");
  });
  scalar("xapp.use_disjunction", [&](int ln, const std::string& v) {
    spec.xapp.use_disjunction = parse_bool(v, ln, "xapp.use_disjunction");
  });

  for (const auto& [key, entry] : seen.entries) {
    if (consumed.count(key) == 0) {
      throw ScenarioParseError(entry.first, "unknown key '" + key + "'");
    }
  }

  // cells
  for (const auto& [cell_id, keys] : cell_keys) {
    CellConfig cell;
    cell.cell_id = cell_id;
    bool has_du = false;
    for (const auto& [field, entry] : keys) {
      const auto& [ln, v] = entry;
      const std::string full = "cell." + std::to_string(cell_id) + "." + field;
      if (field == "du") {
        cell.du_id = parse_u32(v, ln, full);
        has_du = true;
      } else if (field == "total_prbs") {
        cell.total_prbs = parse_u32(v, ln, full);
      } else if (field == "bandwidth_hz") {
        cell.bandwidth_hz = parse_u64(v, ln, full);
      } else if (field == "scs_hz") {
        cell.scs_hz = parse_u32(v, ln, full);
      } else if (field == "center_frequency_hz") {
        cell.center_frequency_hz = parse_u64(v, ln, full);
      } else {
        throw ScenarioParseError(ln, "unknown key '" + full + "'");
      }
    }
    if (!has_du) {
      throw ScenarioParseError(0, "cell " + std::to_string(cell_id) + ": missing required key '" +
                                      "cell." + std::to_string(cell_id) + ".du'");
    }
    spec.cells.push_back(cell);
  }

  // ues
  for (const auto& [ue_id, keys] : ue_keys) {
    sim::UeSetup ue;
    ue.ue_id = ue_id;
    bool has_role = false;
    bool has_du = false;
    bool has_traffic = false;
    for (const auto& [field, entry] : keys) {
      const auto& [ln, v] = entry;
      const std::string full = "ue." + std::to_string(ue_id) + "." + field;
      if (field == "role") {
        if (v == "mobile") {
          ue.role = sim::UeRole::mobile;
        } else if (v == "stationary") {
          ue.role = sim::UeRole::stationary;
        } else {
          throw ScenarioParseError(ln, full + ": expected 'mobile' or 'stationary'");
        }
        has_role = true;
      } else if (field == "initial_du") {
        ue.initial_du = parse_u32(v, ln, full);
        has_du = true;
      } else if (field == "spectral_efficiency") {
        ue.spectral_efficiency = parse_double(v, ln, full);
      } else if (field == "traffic") {
        ue.traffic = parse_traffic(v, ln, full);
        has_traffic = true;
      } else {
        throw ScenarioParseError(ln, "unknown key '" + full + "'");
      }
    }
    const std::string prefix = "ue." + std::to_string(ue_id) + ".";
    if (!has_role) {
      throw ScenarioParseError(0, "missing required key '" + prefix + "role'");
    }
    if (!has_du) {
      throw ScenarioParseError(0, "missing required key '" + prefix + "initial_du'");
    }
    if (!has_traffic) {
      throw ScenarioParseError(0, "missing required key '" + prefix + "traffic'");
    }
    spec.ues.push_back(ue);
  }

  if (take("xapp.home_du") == nullptr) {
    throw ScenarioParseError(0, "missing required key 'xapp.home_du'");
  }

  for (const auto& cell : spec.cells) {
    spec.xapp.cells[cell.du_id] = cell.cell_id;
  }
  for (const auto& ue : spec.ues) {
    if (ue.role == sim::UeRole::mobile) {
      spec.xapp.mobile_ues.insert(ue.ue_id);
    }
  }

  try {
    spec.validate(/*require_duration=*/false);
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError(0, e.what());
  }
  return spec;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open scenario file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace ranmlb::harness
