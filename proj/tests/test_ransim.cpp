#include <random>

#include "doctest.h"
#include "ranmlb/ransim.hpp"

using namespace ranmlb;
using namespace ranmlb::sim;

namespace {

CellConfig make_cell(CellId cell_id, DuId du_id) {
  CellConfig c;
  c.cell_id = cell_id;
  c.du_id = du_id;
  return c;
}

UeSetup make_ue(UeId ue_id, DuId du, std::uint64_t cbr_bps,
                UeRole role = UeRole::stationary, double se = 4.0) {
  UeSetup ue;
  ue.ue_id = ue_id;
  ue.role = role;
  ue.initial_du = du;
  ue.spectral_efficiency = se;
  ue.traffic = TrafficProfile({{0, cbr_bps}});
  return ue;
}

UeContext backlogged_ue(UeId ue_id, std::uint64_t buffer_bits, double se = 4.0) {
  UeContext ue;
  ue.ue_id = ue_id;
  ue.buffer_bits = buffer_bits;
  ue.spectral_efficiency = se;
  return ue;
}

DuState make_du(DuId du_id = 1) {
  DuState du;
  du.du_id = du_id;
  du.cell = make_cell(du_id, du_id);
  return du;
}

void check_conservation(const RanSimulator& ransim) {
  for (const auto& [ue_id, ue] : ransim.ues()) {
    CHECK(ue.total_arrived_bits ==
          ue.total_served_bits + ue.total_dropped_bits + ue.buffer_bits);
    CHECK(ue.arrival_carry < 1'000'000);  // strictly less than one bit
  }
}

}  // namespace

TEST_CASE("bits_per_prb_per_slot link capacity model") {
  const CellConfig cell;
  CHECK(bits_per_prb_per_slot(cell, 4.0) == 672);  // 12 * 14 * 4
  CHECK(bits_per_prb_per_slot(cell, 1.0) == 168);  // 12 * 14
  CHECK(bits_per_prb_per_slot(cell, 0.01) == 1);   // floor clamped to 1
  CHECK_THROWS_AS(bits_per_prb_per_slot(cell, 0.0), std::invalid_argument);
}

TEST_CASE("traffic profile lookup and invariants") {
  const TrafficProfile p({{0, 100}, {1000, 200}, {5000, 0}});
  CHECK(p.rate_at(0) == 100);
  CHECK(p.rate_at(999) == 100);
  CHECK(p.rate_at(1000) == 200);
  CHECK(p.rate_at(99'999) == 0);

  CHECK_THROWS_AS(TrafficProfile({{5, 1}}), std::invalid_argument);           // must start at 0
  CHECK_THROWS_AS(TrafficProfile({{0, 1}, {0, 2}}), std::invalid_argument);   // strictly increasing
  CHECK_THROWS_AS(TrafficProfile(std::vector<TrafficPhase>{}), std::invalid_argument);
}

TEST_CASE("arrivals accumulate without drift") {
  UeContext ue = backlogged_ue(1, 0);

  SUBCASE("1 Mbps adds 500 bits per 0.5 ms slot") {
    ue.traffic = TrafficProfile({{0, 1'000'000}});
    enqueue_arrivals(ue, 0, 500);
    CHECK(ue.buffer_bits == 500);
    CHECK(ue.arrival_carry == 0);
  }

  SUBCASE("zero rate leaves the buffer untouched") {
    ue.traffic = TrafficProfile({{0, 0}});
    enqueue_arrivals(ue, 0, 500);
    CHECK(ue.buffer_bits == 0);
  }

  SUBCASE("999999 bps adds exactly 999999 bits over one second") {
    ue.traffic = TrafficProfile({{0, 999'999}});
    std::uint64_t previous = 0;
    for (int slot = 0; slot < 2000; ++slot) {
      enqueue_arrivals(ue, slot / 2, 500);
      const std::uint64_t added = ue.buffer_bits - previous;
      CHECK((added == 499 || added == 500));  // 499.9995 bits/slot, carried exactly
      previous = ue.buffer_bits;
    }
    CHECK(ue.buffer_bits == 999'999);
    CHECK(ue.arrival_carry == 0);
    CHECK(ue.total_arrived_bits == 999'999);
  }
}

TEST_CASE("step_slot serves a lone UE only what it needs") {
  DuState du = make_du();
  UeContext ue = backlogged_ue(1, 10'000);
  const auto outcome = step_slot(du, {&ue}, 0);

  CHECK(outcome.served_bits == 10'000);
  CHECK(outcome.used_prbs == 15);  // ceil(10000 / 672)
  CHECK(ue.buffer_bits == 0);
  CHECK(du.acc.used_prb_slots == 15);
  CHECK(du.acc.served_bits == 10'000);
  CHECK(du.acc.slot_count == 1);
}

TEST_CASE("step_slot splits PRBs evenly, remainder to the lowest ue_id") {
  DuState du = make_du();
  UeContext a = backlogged_ue(1, 100'000);
  UeContext b = backlogged_ue(2, 100'000);
  const auto outcome = step_slot(du, {&b, &a}, 0);  // order of the span must not matter

  REQUIRE(outcome.per_ue.size() == 2);
  CHECK(outcome.per_ue[0].ue_id == 1);
  CHECK(outcome.per_ue[0].used_prbs == 26);
  CHECK(outcome.per_ue[0].served_bits == 17'472);  // 26 * 672
  CHECK(outcome.per_ue[1].ue_id == 2);
  CHECK(outcome.per_ue[1].used_prbs == 25);
  CHECK(outcome.per_ue[1].served_bits == 16'800);  // 25 * 672
  CHECK(outcome.used_prbs == 51);
}

TEST_CASE("step_slot is work-conserving across rounds") {
  DuState du = make_du();
  UeContext a = backlogged_ue(1, 10'000);
  UeContext b = backlogged_ue(2, 1'000'000);
  const auto outcome = step_slot(du, {&a, &b}, 0);

  // Round 1: a takes 15 of its 26-PRB share (10000 bits), b fills its 25
  // (16800 bits). Round 2: the 11 leftover PRBs go to b (7392 bits).
  CHECK(outcome.used_prbs == 51);
  CHECK(outcome.served_bits == 34'192);
  CHECK(outcome.per_ue[0].served_bits == 10'000);
  CHECK(outcome.per_ue[0].used_prbs == 15);
  CHECK(outcome.per_ue[1].served_bits == 24'192);
  CHECK(outcome.per_ue[1].used_prbs == 36);
}

TEST_CASE("step_slot with empty buffers uses nothing") {
  DuState du = make_du();
  UeContext a = backlogged_ue(1, 0);
  const auto outcome = step_slot(du, {&a}, 0);
  CHECK(outcome.used_prbs == 0);
  CHECK(outcome.served_bits == 0);
  CHECK(outcome.per_ue.empty());
  CHECK(du.acc.slot_count == 1);
}

TEST_CASE("step_slot rotates single PRBs when queues outnumber PRBs") {
  DuState du = make_du();
  du.cell.total_prbs = 2;
  UeContext a = backlogged_ue(1, 1'000'000);
  UeContext b = backlogged_ue(2, 1'000'000);
  UeContext c = backlogged_ue(3, 1'000'000);
  const std::vector<UeContext*> ues = {&a, &b, &c};

  step_slot(du, ues, 0);   // cursor 0: serves UEs 1, 2
  step_slot(du, ues, 500); // cursor 2: serves UEs 3, 1
  CHECK(a.buffer_bits == 1'000'000 - 2 * 672);
  CHECK(b.buffer_bits == 1'000'000 - 672);
  CHECK(c.buffer_bits == 1'000'000 - 672);
}

TEST_CASE("collect_kpm_report aggregates and resets the period") {
  DuState du = make_du();
  UeContext ue = backlogged_ue(7, 123);
  du.attached_ues.insert(7);
  du.acc.served_bits = 5'000'000;
  du.acc.served_bits_per_ue[7] = 5'000'000;
  du.acc.used_prb_slots = 30'000;
  du.acc.slot_count = 2000;

  const auto report = collect_kpm_report(du, {&ue}, 1000, 1000);
  CHECK(report.du_id == 1);
  CHECK(report.timestamp_ms == 1000);
  CHECK(report.dl_throughput_bps == 5'000'000);
  CHECK(report.dl_prb_utilization_percent == doctest::Approx(100.0 * 30'000 / 102'000));
  CHECK(report.mac_dl_buffer_volume_bits == 123);
  REQUIRE(report.ue_metrics.size() == 1);
  CHECK(report.ue_metrics[0] == UeMetric{7, 123, 5'000'000});

  // accumulators reset
  CHECK(du.acc.slot_count == 0);
  CHECK(du.acc.served_bits == 0);
  CHECK(du.acc.used_prb_slots == 0);
  CHECK(du.acc.served_bits_per_ue.empty());

  // an idle follow-up period reports all zeros
  du.acc.slot_count = 2000;
  const auto idle = collect_kpm_report(du, {}, 2000, 1000);
  CHECK(idle.dl_prb_utilization_percent == 0.0);
  CHECK(idle.mac_dl_buffer_volume_bits == 0);
  CHECK(idle.dl_throughput_bps == 0);
}

TEST_CASE("collect_kpm_report reports 100% when saturated") {
  DuState du = make_du();
  du.acc.used_prb_slots = 102'000;  // 51 PRBs * 2000 slots
  du.acc.slot_count = 2000;
  const auto report = collect_kpm_report(du, {}, 1000, 1000);
  CHECK(report.dl_prb_utilization_percent == 100.0);
}

TEST_CASE("handover moves the context and conserves buffered bits") {
  const std::vector<CellConfig> cells = {make_cell(1, 1), make_cell(2, 2)};
  // 80 Mbps offered against 68.544 Mbps capacity builds real backlog to move.
  const std::vector<UeSetup> loaded = {make_ue(1, 1, 40'000'000), make_ue(2, 1, 40'000'000)};
  RanSimulator sim2(SimConfig{}, cells, loaded, nullptr, nullptr);
  sim2.run_until_ms(100);
  CHECK(sim2.ue(1).buffer_bits > 0);
  const std::uint64_t before_total = sim2.ue(1).buffer_bits + sim2.ue(2).buffer_bits;
  const std::uint64_t moved = sim2.ue(1).buffer_bits;

  const auto result = sim2.execute_handover(1, 1, 2);
  CHECK(result.ue_id == 1);
  CHECK(result.source_du == 1);
  CHECK(result.target_du == 2);
  CHECK(sim2.ue(1).serving_du == 2);
  CHECK(sim2.du(1).attached_ues.count(1) == 0);
  CHECK(sim2.du(2).attached_ues.count(1) == 1);
  CHECK(sim2.ue(1).buffer_bits == moved);  // carried unchanged
  CHECK(sim2.ue(1).buffer_bits + sim2.ue(2).buffer_bits == before_total);
  check_conservation(sim2);
}

TEST_CASE("handover errors: stale context and invalid target") {
  const std::vector<CellConfig> cells = {make_cell(1, 1), make_cell(2, 2)};
  const std::vector<UeSetup> ues = {make_ue(1, 2, 0)};  // UE 1 lives on DU 2
  RanSimulator ransim(SimConfig{}, cells, ues, nullptr, nullptr);

  // naming a UE already on the target
  try {
    ransim.execute_handover(1, 2, 2);
    FAIL("expected HandoverError");
  } catch (const HandoverError& e) {
    CHECK(e.cause == HandoverError::Cause::stale_context);
  }
  // UE not on the named source
  try {
    ransim.execute_handover(1, 1, 2);
    FAIL("expected HandoverError");
  } catch (const HandoverError& e) {
    CHECK(e.cause == HandoverError::Cause::stale_context);
  }
  // unknown target DU
  try {
    ransim.execute_handover(1, 2, 9);
    FAIL("expected HandoverError");
  } catch (const HandoverError& e) {
    CHECK(e.cause == HandoverError::Cause::invalid_target);
  }
}

TEST_CASE("handover blackout suppresses scheduling for the interruption") {
  const std::vector<CellConfig> cells = {make_cell(1, 1), make_cell(2, 2)};
  const std::vector<UeSetup> ues = {make_ue(1, 1, 10'000'000)};
  SimConfig config;
  config.ho_interruption_ms = 50;
  RanSimulator ransim(config, cells, ues, nullptr, nullptr, /*record_slots=*/true);

  ransim.run_until_ms(1000);
  ransim.execute_handover(1, 1, 2);
  ransim.run_until_ms(2000);

  bool served_before_blackout_end = false;
  std::uint64_t first_served_us = 0;
  for (const auto& rec : ransim.slot_records()) {
    if (rec.du_id != 2 || rec.served_bits == 0) {
      continue;
    }
    if (first_served_us == 0) {
      first_served_us = rec.time_us;
    }
    if (rec.time_us < 1'050'000) {
      served_before_blackout_end = true;
    }
  }
  CHECK_FALSE(served_before_blackout_end);
  CHECK(first_served_us == 1'050'000);  // service resumes exactly at now + 50 ms
  check_conservation(ransim);
}

TEST_CASE("flush_buffer_on_ho drops the queue and the accounting notices") {
  const std::vector<CellConfig> cells = {make_cell(1, 1), make_cell(2, 2)};
  const std::vector<UeSetup> ues = {make_ue(1, 1, 80'000'000)};
  SimConfig config;
  config.flush_buffer_on_ho = true;
  RanSimulator ransim(config, cells, ues, nullptr, nullptr);
  ransim.run_until_ms(1000);
  CHECK(ransim.ue(1).buffer_bits > 0);

  ransim.execute_handover(1, 1, 2);
  CHECK(ransim.ue(1).buffer_bits == 0);
  CHECK(ransim.ue(1).total_dropped_bits > 0);
  check_conservation(ransim);
}

TEST_CASE("run_until with no load reports one all-zero KPM per DU per second") {
  const std::vector<CellConfig> cells = {make_cell(1, 1), make_cell(2, 2)};
  auto [ran_ep, ric_ep] = e2::make_loopback();
  EventLog events;
  RanSimulator ransim(SimConfig{}, cells, {}, &ran_ep, &events);

  for (DuId du = 1; du <= 2; ++du) {
    e2::SubscriptionRequest sub;
    sub.request_id = du;
    sub.du_id = du;
    sub.granularity_ms = 1000;
    sub.measurements = {"DL_PRB_UTILIZATION", "MAC_DL_BUFFER_VOLUME", "DL_THROUGHPUT"};
    ric_ep.send(sub);
  }
  ransim.run_until_ms(1000);

  int responses = 0;
  int indications = 0;
  while (auto msg = ric_ep.poll()) {
    if (std::holds_alternative<e2::SubscriptionResponse>(*msg)) {
      ++responses;
    } else if (const auto* ind = std::get_if<e2::RicIndication>(&*msg)) {
      ++indications;
      CHECK(ind->report.timestamp_ms == 1000);
      CHECK(ind->report.dl_prb_utilization_percent == 0.0);
      CHECK(ind->report.mac_dl_buffer_volume_bits == 0);
      CHECK(ind->report.dl_throughput_bps == 0);
      CHECK(ind->report.ue_metrics.empty());
    }
  }
  CHECK(responses == 2);
  CHECK(indications == 2);
  CHECK(events.of_type("SUBSCRIPTION_RESPONSE").size() == 2);
  CHECK(events.of_type("INDICATION").size() == 2);
}

TEST_CASE("E2 control requests are answered with ack or failure") {
  const std::vector<CellConfig> cells = {make_cell(1, 1), make_cell(2, 2)};
  const std::vector<UeSetup> ues = {make_ue(1, 1, 1'000'000)};
  auto [ran_ep, ric_ep] = e2::make_loopback();
  EventLog events;
  RanSimulator ransim(SimConfig{}, cells, ues, &ran_ep, &events);

  e2::RicControlRequest good;
  good.control_id = 1;
  good.ue_id = 1;
  good.target_cell_id = 2;
  ric_ep.send(good);
  ransim.run_until_ms(1);
  auto reply = ric_ep.poll();
  REQUIRE(reply.has_value());
  CHECK(std::get<e2::RicControlAck>(*reply).control_id == 1);
  CHECK(ransim.ue(1).serving_du == 2);
  REQUIRE(events.of_type("HO_COMPLETED").size() == 1);
  CHECK(events.of_type("HO_COMPLETED")[0]->fields.at("control_id") == 1);

  // unknown target cell -> invalid_target failure
  e2::RicControlRequest bad_target;
  bad_target.control_id = 2;
  bad_target.ue_id = 1;
  bad_target.target_cell_id = 99;
  ric_ep.send(bad_target);

  // UE already on its target -> stale_context failure
  e2::RicControlRequest stale;
  stale.control_id = 3;
  stale.ue_id = 1;
  stale.target_cell_id = 2;
  ric_ep.send(stale);

  ransim.run_until_ms(2);
  auto failure1 = ric_ep.poll();
  REQUIRE(failure1.has_value());
  const auto& f1 = std::get<e2::RicControlFailure>(*failure1);
  CHECK(f1.control_id == 2);
  CHECK(f1.cause == e2::ControlFailureCause::invalid_target);
  auto failure2 = ric_ep.poll();
  REQUIRE(failure2.has_value());
  const auto& f2 = std::get<e2::RicControlFailure>(*failure2);
  CHECK(f2.control_id == 3);
  CHECK(f2.cause == e2::ControlFailureCause::stale_context);
  CHECK(events.of_type("CONTROL_FAILURE").size() == 2);
}

TEST_CASE("single UE below capacity keeps an empty queue at slot boundaries") {
  const std::vector<CellConfig> cells = {make_cell(1, 1)};
  const std::vector<UeSetup> ues = {make_ue(1, 1, 60'000'000)};
  RanSimulator ransim(SimConfig{}, cells, ues, nullptr, nullptr);
  ransim.run_until_ms(3000);
  CHECK(ransim.ue(1).buffer_bits == 0);  // 30000 bits/slot vs 34272 capacity
  CHECK(ransim.ue(1).total_served_bits == ransim.ue(1).total_arrived_bits);
}

TEST_CASE("conservation holds over randomized scenarios with handovers") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<std::uint64_t> rate(0, 90'000'000);
  std::uniform_int_distribution<int> ue_count(1, 3);
  std::uniform_int_distribution<int> phase_count(1, 3);
  std::uniform_int_distribution<std::uint64_t> duration(500, 2500);

  for (int round = 0; round < 20; ++round) {
    const std::vector<CellConfig> cells = {make_cell(1, 1), make_cell(2, 2)};
    std::vector<UeSetup> ues;
    const int n = ue_count(rng);
    for (int i = 0; i < n; ++i) {
      std::vector<TrafficPhase> phases;
      const int m = phase_count(rng);
      for (int p = 0; p < m; ++p) {
        phases.push_back(TrafficPhase{static_cast<std::uint64_t>(p) * 700, rate(rng)});
      }
      UeSetup ue = make_ue(static_cast<UeId>(i + 1), (i % 2) == 0 ? 1 : 2, 0);
      ue.traffic = TrafficProfile(std::move(phases));
      ues.push_back(ue);
    }
    RanSimulator ransim(SimConfig{}, cells, ues, nullptr, nullptr, /*record_slots=*/true);

    const std::uint64_t half = duration(rng);
    ransim.run_until_ms(half);
    // random legal handover of UE 1
    const DuId from = ransim.ue(1).serving_du;
    const DuId to = from == 1 ? 2 : 1;
    ransim.execute_handover(1, from, to);
    ransim.run_until_ms(half + duration(rng));

    check_conservation(ransim);
    // per-slot PRB budget respected
    for (const auto& rec : ransim.slot_records()) {
      CHECK(rec.used_prbs <= 51);
    }
  }
}

TEST_CASE("same configuration twice produces identical runs") {
  const std::vector<CellConfig> cells = {make_cell(1, 1), make_cell(2, 2)};
  const std::vector<UeSetup> ues = {make_ue(1, 1, 33'333'333), make_ue(2, 2, 77'777'777)};

  const auto run = [&]() {
    RanSimulator ransim(SimConfig{}, cells, ues, nullptr, nullptr, /*record_slots=*/true);
    ransim.run_until_ms(1500);
    std::vector<std::tuple<std::uint64_t, DuId, std::uint32_t, std::uint64_t>> flat;
    for (const auto& rec : ransim.slot_records()) {
      flat.emplace_back(rec.time_us, rec.du_id, rec.used_prbs, rec.served_bits);
    }
    return flat;
  };
  CHECK(run() == run());
}
