/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/engine.hpp"

#include "support/scenario_builder.hpp"

#include <doctest.h>

#include <algorithm>

using namespace sdwban;
using nlohmann::json;

namespace {

struct RunOutput {
    RunCounters counters;
    std::vector<TraceRecord> records;
};

RunOutput run_doc(const json& doc) {
    Scenario sc = parse_scenario_json(doc);
    TraceWriter writer;
    writer.keep_in_memory(true);
    Engine engine(sc, &writer);
    RunResult result = engine.run();
    return RunOutput{result.counters, writer.records()};
}

std::vector<const TraceRecord*> events_named(const std::vector<TraceRecord>& records,
                                             const std::string& name) {
    std::vector<const TraceRecord*> out;
    for (const auto& r : records) {
        if (r.event == name) out.push_back(&r);
    }
    return out;
}

} // namespace

TEST_CASE("a run with zero sensors is an empty packet trace") {
    json doc = sdwban::testing::base_doc("vacuous", 10.0, 1);
    sdwban::testing::add_patient(doc, 40.0, 12.0);
    sdwban::testing::add_patient(doc, 42.0, 12.0);
    RunOutput out = run_doc(doc);
    CHECK(out.counters.generated() == 0);
    CHECK(out.counters.delivered() == 0);
    CHECK(out.counters.residual_end == 0);
    CHECK(events_named(out.records, "run_meta").size() == 1);
    CHECK(events_named(out.records, "run_end").size() == 1);
    CHECK(events_named(out.records, "sample_emitted").empty());
}

// Straight-line reference calculation for the single-patient scenario, written
// against the documented transport model rather than the engine:
//   sample k at t=k (k=1..10)
//   sensor->switch arrival:  k + pkt/body_bw + body_lat
//   first packet: packet-in at that instant, flow-mod arrives one control RTT
//   later (each control leg: ctrl/ctrl_bw + ctrl_lat, plus serialization),
//   then switch->gw and gw->cloud.
TEST_CASE("the ten-packet reference run matches the hand calculation") {
    json doc = sdwban::testing::base_doc("reference", 10.0, 42);
    doc["lcs_forward_data"] = false;
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 12.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 1.0, 1.0);

    // constants from the scenario defaults
    const double pkt_bits = 1000.0, ctrl_bits = 256.0;
    const double body_bw = 250000.0, body_lat = 0.002;
    const double ctrl_bw = 250000.0, ctrl_lat = 0.005;
    const double data_bw = 250000.0, data_lat = 0.005;
    const double bh_bw = 10000000.0, bh_lat = 0.05;
    const double pkt_tx = pkt_bits / body_bw;   // 0.004
    const double ctrl_tx = ctrl_bits / ctrl_bw; // 0.001024
    const double data_tx = pkt_bits / data_bw;  // 0.004
    const double bh_tx = pkt_bits / bh_bw;      // 0.0001

    // independent event schedule
    double sw_arrival_1 = 1.0 + pkt_tx + body_lat;                 // 1.006
    double packet_in_at_lc = sw_arrival_1 + ctrl_tx + ctrl_lat;    // 1.012024
    double flow_mod_at_sw = packet_in_at_lc + ctrl_tx + ctrl_lat;  // 1.018048
    double first_cloud = flow_mod_at_sw + data_tx + data_lat + bh_tx + bh_lat; // 1.077148
    double steady_latency = pkt_tx + body_lat + data_tx + data_lat + bh_tx + bh_lat; // 0.0651

    RunOutput out = run_doc(doc);
    CHECK(out.counters.generated() == 10);
    CHECK(out.counters.delivered() == 10);
    CHECK(out.counters.packet_ins == 1);
    CHECK(out.counters.flow_mods == 1);
    CHECK(out.counters.broadcasts == 0);
    CHECK(out.counters.lost_on_link == 0);
    CHECK(out.counters.residual_end == 0);

    auto packet_ins = events_named(out.records, "packet_in_sent");
    REQUIRE(packet_ins.size() == 1);
    CHECK(packet_ins[0]->t == doctest::Approx(sw_arrival_1).epsilon(1e-9));

    auto applied = events_named(out.records, "flow_mod_applied");
    // association installs the emergency wildcard, the packet-in answer the HR rule
    REQUIRE(applied.size() == 2);
    CHECK(applied[1]->t == doctest::Approx(flow_mod_at_sw).epsilon(1e-9));

    auto arrivals = events_named(out.records, "cloud_arrival");
    REQUIRE(arrivals.size() == 10);
    CHECK(arrivals[0]->fields.at("latency_s").get<double>() ==
          doctest::Approx(first_cloud - 1.0).epsilon(1e-9));
    for (size_t i = 1; i < arrivals.size(); ++i) {
        CHECK(arrivals[i]->fields.at("latency_s").get<double>() ==
              doctest::Approx(steady_latency).epsilon(1e-9));
        // delivery order preserved per key
        CHECK(arrivals[i]->fields.at("packet_id").get<uint64_t>() >
              arrivals[i - 1]->fields.at("packet_id").get<uint64_t>());
    }
    // the sample at t = duration is generated and still delivered (drain)
    CHECK(arrivals[9]->t == doctest::Approx(10.0 + steady_latency).epsilon(1e-9));
}

TEST_CASE("identical scenario and seed give byte-identical traces") {
    json doc = sdwban::testing::base_doc("determinism", 15.0, 7);
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 12.0);
    auto& sensor = sdwban::testing::add_sensor(patient, "heart_rate", 0.5);
    sensor["jitter_stddev"] = 3.0;
    sensor["anomalies"] = json::array({json{{"start_s", 5.0}, {"end_s", 7.0}, {"value", 150.0}}});
    doc["links"] = {{"data", {{"loss_prob", 0.2}}}, {"control", {{"loss_prob", 0.1}}}};

    RunOutput a = run_doc(doc);
    RunOutput b = run_doc(doc);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].to_line() == b.records[i].to_line());
    }
}

TEST_CASE("changing the seed changes outcomes but never the schedule structure") {
    json doc = sdwban::testing::base_doc("seed_structure", 10.0, 1);
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 12.0);
    auto& sensor = sdwban::testing::add_sensor(patient, "heart_rate", 0.5);
    sensor["jitter_stddev"] = 5.0;
    doc["links"] = {{"data", {{"loss_prob", 0.3}}}};

    RunOutput a = run_doc(doc);
    doc["seed"] = 2;
    RunOutput b = run_doc(doc);

    auto sample_times = [](const RunOutput& out) {
        std::vector<double> times;
        for (const auto* r : events_named(out.records, "sample_emitted")) {
            times.push_back(r->t);
        }
        return times;
    };
    CHECK(sample_times(a) == sample_times(b));
    CHECK(a.counters.generated() == b.counters.generated());
    CHECK(a.counters.delivered() != b.counters.delivered()); // loss draws differ
}

TEST_CASE("the transport delay is latency plus size over bandwidth") {
    json doc = sdwban::testing::base_doc("formula", 5.0, 1);
    doc["lcs_forward_data"] = false;
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 12.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 1.0, 1.0);
    doc["links"] = {{"body", {{"latency_s", 0.01}, {"bandwidth_bps", 250000.0}}}};

    RunOutput out = run_doc(doc);
    // the first packet-in is sent the instant the first frame reaches the switch
    auto packet_ins = events_named(out.records, "packet_in_sent");
    REQUIRE(packet_ins.size() == 1);
    CHECK(packet_ins[0]->t == doctest::Approx(1.0 + 0.004 + 0.01).epsilon(1e-9));
}

TEST_CASE("loss probability one loses every data frame") {
    json doc = sdwban::testing::base_doc("always_lost", 5.0, 1);
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 12.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 1.0, 1.0);
    doc["links"] = {{"body", {{"loss_prob", 1.0}}}};

    RunOutput out = run_doc(doc);
    CHECK(out.counters.generated() == 5);
    CHECK(out.counters.delivered() == 0);
    CHECK(out.counters.lost_on_link == 5);
}

TEST_CASE("a configured loss probability reproduces the empirical loss rate") {
    json doc = sdwban::testing::base_doc("loss_calibration", 20.0, 9);
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 12.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 0.02); // 1001 samples
    doc["links"] = {{"body", {{"loss_prob", 0.3}}}};

    RunOutput out = run_doc(doc);
    REQUIRE(out.counters.generated() == 1001);
    double rate = double(out.counters.lost_on_link) / double(out.counters.generated());
    CHECK(rate > 0.25);
    CHECK(rate < 0.35);
}

TEST_CASE("emission count follows floor((duration - phase) / period) + 1") {
    json doc = sdwban::testing::base_doc("emission", 10.0, 3);
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 12.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 1.0, 1.0);   // 10
    sdwban::testing::add_sensor(patient, "temperature", 3.0, 0.5); // floor(9.5/3)+1 = 4
    sdwban::testing::add_sensor(patient, "glucose", 0.7, 0.0);     // floor(10/0.7)+1 = 15

    RunOutput out = run_doc(doc);
    uint64_t expected = (uint64_t(std::floor((10.0 - 1.0) / 1.0)) + 1) +
                        (uint64_t(std::floor((10.0 - 0.5) / 3.0)) + 1) +
                        (uint64_t(std::floor((10.0 - 0.0) / 0.7)) + 1);
    CHECK(out.counters.generated() == expected);
    CHECK(out.counters.delivered() == expected);
}

TEST_CASE("orphan mode: emergencies ride the pre-installed rule, normal traffic buffers") {
    json doc = sdwban::testing::base_doc("orphan", 25.0, 5);
    doc["lcs_forward_data"] = false;
    doc["controllers"].push_back(json{{"role", "central"}, {"position", {45.0, 10.0}}});
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 12.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 1.0, 5.0); // normal flood, starts late
    auto& glucose = sdwban::testing::add_sensor(patient, "glucose", 0.5, 6.0);
    glucose["anomalies"] =
        json::array({json{{"start_s", 6.0}, {"end_s", 7.6}, {"value", 20.0}}});
    doc["fault_plan"] = json::array(
        {json{{"at_s", 2.0}, {"action", "crash"}, {"node", "LC0"}},
         json{{"at_s", 2.0}, {"action", "crash"}, {"node", "CC0"}}});

    Scenario sc = parse_scenario_json(doc);
    TraceWriter writer;
    writer.keep_in_memory(true);
    Engine engine(sc, &writer);
    RunResult result = engine.run();

    // glucose samples at 6.0/6.5/7.0/7.5 are anomalous; later ones are normal
    CHECK(result.counters.delivered_emergency == 4);
    CHECK(result.counters.generated_emergency == 4);
    CHECK(result.counters.delivered_normal == 0);
    // HR at 5..25 (21) + glucose normals at 8..25 (36): one miss buffer each, cap 16
    CHECK(result.counters.residual_end == 32);
    CHECK(result.counters.drop_miss_buffer_overflow ==
          result.counters.generated_normal - 32);
    CHECK(engine.switch_node(NodeId{NodeKind::Switch, 0}).phase() == AssocPhase::Orphan);
}

TEST_CASE("a restarted controller rejoins fresh and no switch flaps back") {
    json doc = sdwban::testing::base_doc("lc_restart", 40.0, 2);
    doc["lcs_forward_data"] = false;
    doc["controllers"].push_back(json{{"role", "local"}, {"position", {42.0, 10.0}}});
    for (int i = 0; i < 3; ++i) {
        auto& patient = sdwban::testing::add_patient(doc, 42.0 + 2.0 * i, 12.0);
        sdwban::testing::add_sensor(patient, "heart_rate", 1.0);
    }
    // round-robin: S0 and S2 prefer LC0, S1 prefers LC1
    doc["fault_plan"] = json::array(
        {json{{"at_s", 10.0}, {"action", "crash"}, {"node", "LC0"}},
         json{{"at_s", 20.0}, {"action", "recover"}, {"node", "LC0"}}});

    Scenario sc = parse_scenario_json(doc);
    TraceWriter writer;
    writer.keep_in_memory(true);
    Engine engine(sc, &writer);
    engine.run();

    // S0 and S2 failed over to LC1 and stayed there after LC0 came back
    for (int i : {0, 2}) {
        NodeId sw{NodeKind::Switch, i};
        CHECK(engine.switch_node(sw).associated_with() ==
              NodeId{NodeKind::LocalController, 1});
    }
    int changes_after_recovery = 0;
    for (const auto& r : writer.records()) {
        if (r.event == "association_changed" && r.t > 20.5) ++changes_after_recovery;
    }
    CHECK(changes_after_recovery == 0);
    // the recovered controller is fresh: an empty registry until someone asks
    const ControllerNode* lc0 = engine.controller_node(NodeId{NodeKind::LocalController, 0});
    REQUIRE(lc0 != nullptr);
    CHECK(lc0->registry().empty());
}

TEST_CASE("a crashed switch loses its queue and rejoins fresh on recovery") {
    json doc = sdwban::testing::base_doc("switch_restart", 20.0, 2);
    doc["lcs_forward_data"] = false;
    auto& patient = sdwban::testing::add_patient(doc, 42.0, 12.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 0.5);
    doc["fault_plan"] = json::array(
        {json{{"at_s", 8.0}, {"action", "crash"}, {"node", "S0"}},
         json{{"at_s", 12.0}, {"action", "recover"}, {"node", "S0"}}});

    RunOutput out = run_doc(doc);
    // sensor frames into the dead switch are lost on the link
    uint64_t dead_endpoint_losses = 0;
    for (const auto* r : events_named(out.records, "frame_loss")) {
        if (r->fields.at("reason").get<std::string>() == "endpoint_dead" &&
            r->fields.at("kind").get<std::string>() == "data") {
            ++dead_endpoint_losses;
        }
    }
    CHECK(dead_endpoint_losses >= 7); // roughly the 4 s outage at 2 pkt/s
    // service resumes: packets generated after recovery get delivered
    bool late_delivery = false;
    for (const auto* r : events_named(out.records, "cloud_arrival")) {
        if (r->fields.at("created_at").get<double>() > 12.5) late_delivery = true;
    }
    CHECK(late_delivery);
    CHECK(events_named(out.records, "node_crash").size() == 1);
    CHECK(events_named(out.records, "node_recover").size() == 1);
}

TEST_CASE("a stationary patient never hands over") {
    json doc = sdwban::testing::base_doc("static", 10.0, 1);
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 12.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 1.0);
    RunOutput out = run_doc(doc);
    CHECK(out.counters.handovers == 0);
}

TEST_CASE("crossing relay cells hands over exactly once and reroutes") {
    json doc = sdwban::testing::base_doc("crossing", 25.0, 1);
    doc["floor"] = {{"width_m", 100.0}, {"height_m", 100.0}};
    doc["lcs_forward_data"] = false;
    doc["auto_infra_links"] = false;
    doc["gateway"] = {{"position", {50.0, 90.0}}};
    doc["controllers"] = json::array(
        {json{{"role", "local"}, {"position", {50.0, 40.0}}}});
    doc["relays"] = json::array(
        {json{{"name", "S10"}, {"position", {25.0, 10.0}}},
         json{{"name", "S11"}, {"position", {75.0, 10.0}}}});
    doc["infra_links"] = json::array(
        {json{{"a", "S10"}, {"b", "GW0"}, {"wired", true}},
         json{{"a", "S11"}, {"b", "GW0"}, {"wired", true}}});
    auto& patient = sdwban::testing::add_patient(doc, 10.0, 10.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 0.5);
    patient["mobility"] = {
        {"waypoints", json::array({json{{"x", 90.0}, {"y", 10.0}, {"speed_mps", 4.0}}})}};

    RunOutput out = run_doc(doc);
    CHECK(out.counters.handovers == 1);
    auto notices = events_named(out.records, "handover_notice");
    REQUIRE(notices.size() == 1);
    CHECK(notices[0]->fields.at("attachment").get<std::string>() == "S11");
    // the reroute reaches the switch: at least one flow-mod lands after the notice
    bool rerouted = false;
    for (const auto* r : events_named(out.records, "flow_mod_applied")) {
        if (r->t > notices[0]->t && r->node == "S0") rerouted = true;
    }
    CHECK(rerouted);
    CHECK(out.counters.lost_on_link == 0); // cells overlap, nothing is lost
    CHECK(out.counters.delivered() == out.counters.generated());
}

TEST_CASE("leaving all coverage loses frames out of range until re-entry") {
    json doc = sdwban::testing::base_doc("coverage_gap", 32.0, 1);
    doc["floor"] = {{"width_m", 200.0}, {"height_m", 200.0}};
    doc["lcs_forward_data"] = false;
    doc["gateway"] = {{"position", {100.0, 100.0}}};
    doc["controllers"] = json::array(
        {json{{"role", "local"}, {"position", {100.0, 100.0}}}});
    auto& patient = sdwban::testing::add_patient(doc, 100.0, 80.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 0.5);
    patient["mobility"] = {
        {"waypoints", json::array({json{{"x", 100.0}, {"y", 20.0}, {"speed_mps", 4.0}},
                                   json{{"x", 100.0}, {"y", 80.0}, {"speed_mps", 4.0}}})}};

    RunOutput out = run_doc(doc);
    uint64_t out_of_range = 0;
    for (const auto* r : events_named(out.records, "frame_loss")) {
        if (r->fields.at("reason").get<std::string>() == "out_of_range" &&
            r->fields.at("kind").get<std::string>() == "data") {
            ++out_of_range;
        }
    }
    CHECK(out_of_range > 0);
    // traffic resumes after re-entry: the last generated packets are delivered
    auto arrivals = events_named(out.records, "cloud_arrival");
    REQUIRE_FALSE(arrivals.empty());
    CHECK(arrivals.back()->t > 30.0);
    CHECK(out.counters.generated() ==
          out.counters.delivered() + out.counters.lost_on_link + out.counters.dropped() +
              out.counters.residual_end);
}

TEST_CASE("conservation holds across randomized lossy scenarios") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        json doc = sdwban::testing::base_doc("conservation", 12.0, seed);
        doc["lcs_forward_data"] = false;
        doc["auto_infra_links"] = false;
        doc["gateway"] = {{"position", {80.0, 10.0}}};
        doc["relays"] = json::array({json{{"name", "S10"}, {"position", {60.0, 10.0}}}});
        doc["infra_links"] = json::array({json{{"a", "S10"}, {"b", "GW0"}, {"wired", true}}});
        doc["links"] = {{"body", {{"loss_prob", 0.05}}},
                        {"data", {{"loss_prob", 0.15}}},
                        {"control", {{"loss_prob", 0.15}}}};
        auto& p0 = sdwban::testing::add_patient(doc, 40.0, 12.0);
        sdwban::testing::add_sensor(p0, "heart_rate", 0.25);
        auto& hr = sdwban::testing::add_sensor(p0, "glucose", 0.5);
        hr["anomalies"] =
            json::array({json{{"start_s", 4.0}, {"end_s", 6.0}, {"value", 20.0}}});
        auto& p1 = sdwban::testing::add_patient(doc, 42.0, 12.0);
        sdwban::testing::add_sensor(p1, "heart_rate", 0.25);

        RunOutput out = run_doc(doc); // the engine self-checks conservation too
        CHECK(out.counters.generated() ==
              out.counters.delivered() + out.counters.lost_on_link + out.counters.dropped() +
                  out.counters.residual_end);
        CHECK(out.counters.generated() > 0);
    }
}

TEST_CASE("multi-hop transit packets are matched by the relay's own rules") {
    json doc = sdwban::testing::base_doc("transit", 10.0, 1);
    doc["lcs_forward_data"] = false;
    doc["auto_infra_links"] = false;
    doc["gateway"] = {{"position", {80.0, 10.0}}}; // out of the patient's data range
    doc["relays"] = json::array({json{{"name", "S10"}, {"position", {55.0, 10.0}}}});
    doc["infra_links"] = json::array({json{{"a", "S10"}, {"b", "GW0"}, {"wired", true}}});
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 10.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 1.0, 1.0);

    RunOutput out = run_doc(doc);
    // two packet-ins: one at the origin switch, one at the relay for transit
    CHECK(out.counters.packet_ins == 2);
    CHECK(out.counters.delivered() == out.counters.generated());
    auto arrivals = events_named(out.records, "cloud_arrival");
    REQUIRE_FALSE(arrivals.empty());
    auto hops = arrivals.back()->fields.at("hops");
    REQUIRE(hops.size() == 5);
    CHECK(hops[1] == "S0");
    CHECK(hops[2] == "S10");
    CHECK(hops[3] == "GW0");
}

TEST_CASE("a controller can forward data when it is the attachment point") {
    json doc = sdwban::testing::base_doc("lc_forwarding", 10.0, 1);
    doc["auto_infra_links"] = false;
    doc["gateway"] = {{"position", {80.0, 10.0}}};
    doc["controllers"] = json::array({json{{"role", "local"}, {"position", {55.0, 10.0}}}});
    doc["infra_links"] = json::array({json{{"a", "LC0"}, {"b", "GW0"}, {"wired", true}}});
    auto& patient = sdwban::testing::add_patient(doc, 40.0, 10.0);
    sdwban::testing::add_sensor(patient, "heart_rate", 1.0, 1.0);

    RunOutput out = run_doc(doc);
    CHECK(out.counters.delivered() == out.counters.generated());
    auto arrivals = events_named(out.records, "cloud_arrival");
    REQUIRE_FALSE(arrivals.empty());
    auto hops = arrivals.back()->fields.at("hops");
    REQUIRE(hops.size() == 5);
    CHECK(hops[2] == "LC0");
}
