#include "ranmlb/runner.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "ranmlb/e2_transport.hpp"
#include "ranmlb/xapp.hpp"

namespace ranmlb::harness {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  return out;
}

// Event timestamps are microseconds internally; emit whole milliseconds when
// exact, fractional otherwise.
void put_time_ms(nlohmann::ordered_json& j, std::uint64_t time_us) {
  if (time_us % 1000 == 0) {
    j["time_ms"] = time_us / 1000;
  } else {
    j["time_ms"] = static_cast<double>(time_us) / 1000.0;
  }
}

}  // namespace

RunArtifacts run_scenario(const ScenarioSpec& spec, bool record_slots) {
  spec.validate();
  RunArtifacts artifacts;
  artifacts.duration_ms = spec.duration_ms;
  artifacts.seed = spec.sim.seed;

  auto [ran_endpoint, ric_endpoint] = e2::make_loopback();
  sim::RanSimulator ransim(spec.sim, spec.cells, spec.ues, &ran_endpoint, &artifacts.events,
                           record_slots);
  const auto tap = [&artifacts](const e2::RicIndication& ind) {
    const KpmReport& r = ind.report;
    artifacts.du_metrics.push_back(DuMetricRow{r.timestamp_ms, r.du_id,
                                               r.dl_prb_utilization_percent,
                                               r.mac_dl_buffer_volume_bits, r.dl_throughput_bps});
    for (const auto& ue : r.ue_metrics) {
      artifacts.ue_metrics.push_back(
          UeMetricRow{r.timestamp_ms, ue.ue_id, r.du_id, ue.buffer_bits, ue.throughput_bps});
    }
  };
  xapp::MlbXapp app(spec.xapp, &ric_endpoint, &artifacts.events, tap);

  app.start(0);
  const std::uint64_t granularity = spec.xapp.granularity_ms;
  for (std::uint64_t t = granularity; t <= spec.duration_ms; t += granularity) {
    ransim.run_until_ms(t);
    app.tick(t);
  }
  if (spec.duration_ms % granularity != 0) {
    ransim.run_until_ms(spec.duration_ms);
  }

  for (const auto& [ue_id, ue] : ransim.ues()) {
    artifacts.per_ue[ue_id] =
        UeAccounting{ue.total_arrived_bits, ue.total_served_bits, ue.total_dropped_bits,
                     ue.buffer_bits,        ue.arrival_carry,     ue.serving_du};
  }
  artifacts.slot_records = ransim.slot_records();
  for (const auto* event : artifacts.events.of_type("HO_COMPLETED")) {
    artifacts.handovers.push_back(HandoverRecord{
        event->fields.at("control_id").get<std::uint32_t>(),
        event->fields.at("ue_id").get<UeId>(), event->fields.at("source_du").get<DuId>(),
        event->fields.at("target_du").get<DuId>(), event->time_us});
  }
  return artifacts;
}

nlohmann::ordered_json summary_json(const RunArtifacts& artifacts) {
  nlohmann::ordered_json j;
  j["duration_ms"] = artifacts.duration_ms;
  j["seed"] = artifacts.seed;
  j["handover_count"] = artifacts.handover_count();
  auto handovers = nlohmann::ordered_json::array();
  for (const auto& ho : artifacts.handovers) {
    nlohmann::ordered_json entry;
    entry["control_id"] = ho.control_id;
    entry["ue_id"] = ho.ue_id;
    entry["source_du"] = ho.source_du;
    entry["target_du"] = ho.target_du;
    put_time_ms(entry, ho.time_us);
    handovers.push_back(entry);
  }
  j["handovers"] = handovers;
  auto attachment = nlohmann::ordered_json::object();
  auto per_ue = nlohmann::ordered_json::object();
  for (const auto& [ue_id, acct] : artifacts.per_ue) {
    const std::string key = std::to_string(ue_id);
    attachment[key] = acct.final_du;
    per_ue[key] = {{"arrived_bits", acct.arrived_bits},
                   {"served_bits", acct.served_bits},
                   {"dropped_bits", acct.dropped_bits},
                   {"final_buffer_bits", acct.final_buffer_bits}};
  }
  j["final_attachment"] = attachment;
  j["per_ue"] = per_ue;
  return j;
}

void write_outputs(const RunArtifacts& artifacts, const std::filesystem::path& out_dir,
                   bool include_slot_log) {
  std::filesystem::create_directories(out_dir);

  {
    auto out = open_for_write(out_dir / "du_metrics.csv");
    out << "time_s,du_id,prb_util_percent,buffer_bits,throughput_bps\n";
    for (const auto& row : artifacts.du_metrics) {
      out << fixed6(static_cast<double>(row.time_ms) / 1000.0) << ',' << row.du_id << ','
          << fixed6(row.prb_util_percent) << ',' << row.buffer_bits << ','
          << row.throughput_bps << '\n';
    }
  }
  {
    auto out = open_for_write(out_dir / "ue_metrics.csv");
    out << "time_s,ue_id,serving_du,buffer_bits,throughput_bps\n";
    for (const auto& row : artifacts.ue_metrics) {
      out << fixed6(static_cast<double>(row.time_ms) / 1000.0) << ',' << row.ue_id << ','
          << row.serving_du << ',' << row.buffer_bits << ',' << row.throughput_bps << '\n';
    }
  }
  {
    auto out = open_for_write(out_dir / "events.jsonl");
    for (const auto& event : artifacts.events.events()) {
      nlohmann::ordered_json j;
      j["type"] = event.type;
      put_time_ms(j, event.time_us);
      for (const auto& [key, value] : event.fields.items()) {
        j[key] = value;
      }
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open_for_write(out_dir / "summary.json");
    out << summary_json(artifacts).dump(2) << '\n';
  }
  if (include_slot_log) {
    auto out = open_for_write(out_dir / "slot_log.csv");
    out << "time_s,du_id,used_prbs,served_bits\n";
    for (const auto& rec : artifacts.slot_records) {
      out << fixed6(static_cast<double>(rec.time_us) / 1e6) << ',' << rec.du_id << ','
          << rec.used_prbs << ',' << rec.served_bits << '\n';
    }
  }
}

}  // namespace ranmlb::harness
