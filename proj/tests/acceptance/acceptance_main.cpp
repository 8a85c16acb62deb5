/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
//
// End-to-end acceptance suite. Each criterion runs whole scenarios through
// the engine (or the CLI binary) and checks the externally observable
// outcome at a pinned tolerance. One PASS/FAIL line per criterion.
//
#include "sdwban/engine.hpp"
#include "sdwban/metrics.hpp"
#include "sdwban/scenario.hpp"

#include "support/path_oracle.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace sdwban;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// harness
// ---------------------------------------------------------------------------

struct Check {
    bool ok{true};
    std::ostringstream detail;

    void expect(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
};

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
    MetricsReport report = summarize(writer.records()); // re-verifies conservation
    (void)report;
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

json base_doc(const std::string& name, double duration_s, uint64_t seed) {
    json doc;
    doc["schema_version"] = 1;
    doc["name"] = name;
    doc["duration_s"] = duration_s;
    doc["seed"] = seed;
    doc["floor"] = {{"width_m", 200.0}, {"height_m", 200.0}};
    doc["gateway"] = {{"position", {50.0, 10.0}}};
    doc["controllers"] =
        json::array({json{{"role", "local"}, {"position", {40.0, 10.0}}}});
    doc["patients"] = json::array();
    return doc;
}

json& add_patient(json& doc, double x, double y) {
    json patient;
    patient["position"] = {x, y};
    patient["sensors"] = json::array();
    doc["patients"].push_back(std::move(patient));
    return doc["patients"].back();
}

json& add_sensor(json& patient, const std::string& app, double period_s, double phase_s = 0.0) {
    json sensor;
    sensor["app"] = app;
    sensor["period_s"] = period_s;
    sensor["phase_s"] = phase_s;
    sensor["jitter_stddev"] = 0.0;
    patient["sensors"].push_back(std::move(sensor));
    return patient["sensors"].back();
}

struct ClassLatency {
    std::vector<double> normal;
    std::vector<double> emergency;
};

ClassLatency latencies_of(const std::vector<TraceRecord>& records) {
    ClassLatency out;
    for (const auto* r : events_named(records, "cloud_arrival")) {
        double latency = r->fields.at("latency_s").get<double>();
        if (r->fields.at("class").get<std::string>() == "emergency") {
            out.emergency.push_back(latency);
        } else {
            out.normal.push_back(latency);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// criterion 1: strict priority beats the normal backlog under congestion
// ---------------------------------------------------------------------------

json congestion_doc(uint64_t seed) {
    json doc = base_doc("congestion", 60.0, seed);
    doc["lcs_forward_data"] = false;
    doc["auto_infra_links"] = false;
    doc["gateway"] = {{"position", {100.0, 150.0}}};
    doc["controllers"] = json::array({json{{"role", "local"}, {"position", {100.0, 120.0}}}});
    doc["relays"] = json::array({json{{"name", "S100"}, {"position", {100.0, 100.0}}}});
    // the bottleneck: 50 kbps serves exactly the offered 50 pkt/s of 1000-bit packets
    doc["infra_links"] = json::array(
        {json{{"a", "S100"}, {"b", "GW0"}, {"wired", true}, {"latency_s", 0.005},
              {"bandwidth_bps", 50000.0}}});
    for (int i = 0; i < 5; ++i) {
        auto& patient = add_patient(doc, 92.0 + 4.0 * i, 85.0);
        add_sensor(patient, "heart_rate", 0.1); // 10 pkt/s each
        auto& temp = add_sensor(patient, "temperature", 0.5);
        json episodes = json::array();
        for (double start : {10.0 + 2.0 * i, 30.0 + 2.0 * i, 45.0 + 2.0 * i}) {
            episodes.push_back(json{{"start_s", start}, {"end_s", start + 1.0}, {"value", 45.0}});
        }
        temp["anomalies"] = episodes;
    }
    return doc;
}

Check criterion1() {
    Check check;
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        RunOutput out = run_doc(congestion_doc(seed));
        // scenario precondition: the relay uplink really is saturated
        uint64_t relay_sends = 0;
        for (const auto* r : events_named(out.records, "dequeue")) {
            if (r->node == "S100") ++relay_sends;
        }
        double utilization = double(relay_sends) * 0.02 / 60.0;
        check.expect(utilization >= 0.9,
                     "seed " + std::to_string(seed) + ": relay utilization " +
                         std::to_string(utilization) + " < 0.9");

        ClassLatency lat = latencies_of(out.records);
        check.expect(lat.emergency.size() >= 20,
                     "seed " + std::to_string(seed) + ": too few emergency deliveries");
        LatencyStats e = latency_stats(lat.emergency);
        LatencyStats n = latency_stats(lat.normal);
        check.expect(e.mean_s < n.mean_s,
                     "seed " + std::to_string(seed) + ": mean(E)=" + std::to_string(e.mean_s) +
                         " !< mean(N)=" + std::to_string(n.mean_s));
        check.expect(e.p95_s < n.p50_s,
                     "seed " + std::to_string(seed) + ": p95(E)=" + std::to_string(e.p95_s) +
                         " !< p50(N)=" + std::to_string(n.p50_s));
        if (!check.ok) break;
    }
    return check;
}

// ---------------------------------------------------------------------------
// criterion 2: exactly one packet-in per new (switch, app, Normal) flow
// ---------------------------------------------------------------------------

Check criterion2() {
    Check check;
    json doc = base_doc("packet_in_economy", 30.0, 3);
    doc["lcs_forward_data"] = false;
    for (int i = 0; i < 4; ++i) {
        auto& patient = add_patient(doc, 42.0 + 2.0 * i, 12.0);
        add_sensor(patient, "heart_rate", 1.0);
        add_sensor(patient, "temperature", 2.0);
        add_sensor(patient, "glucose", 3.0);
        add_sensor(patient, "blood_pressure", 5.0);
    }
    RunOutput out = run_doc(doc);
    check.expect(out.counters.packet_ins == 16,
                 "packet_ins = " + std::to_string(out.counters.packet_ins) + ", want 16");
    check.expect(out.counters.flow_mods == 16,
                 "flow_mods = " + std::to_string(out.counters.flow_mods) + ", want 16");
    check.expect(out.counters.broadcasts == 0, "unexpected emergency broadcasts");
    check.expect(out.counters.delivered() == out.counters.generated(),
                 "lossless run must deliver everything");
    check.expect(out.counters.drop_packet_in_timeout == 0, "packet-in retries fired");
    return check;
}

// ---------------------------------------------------------------------------
// criterion 3: post-association emergency lookups never miss (100 seeds)
// ---------------------------------------------------------------------------

json randomized_doc(uint64_t seed) {
    Rng rng(Rng::derive_seed(seed, "acceptance/randomized"));
    json doc = base_doc("randomized", 12.0, seed);
    doc["lcs_forward_data"] = false;
    double control_loss = rng.uniform(0.0, 0.2);
    double data_loss = rng.uniform(0.0, 0.1);
    doc["links"] = {{"control", {{"loss_prob", control_loss}}},
                    {"data", {{"loss_prob", data_loss}}}};
    int patients = int(rng.uniform_int(1, 4));
    const char* apps[] = {"heart_rate", "temperature", "glucose", "blood_pressure", "ecg"};
    for (int p = 0; p < patients; ++p) {
        auto& patient = add_patient(doc, 42.0 + 3.0 * p, 11.0 + p);
        int sensors = int(rng.uniform_int(1, 3));
        for (int s = 0; s < sensors; ++s) {
            auto& sensor =
                add_sensor(patient, apps[rng.uniform_int(0, 4)], rng.uniform(0.2, 1.0));
            if (rng.uniform01() < 0.7) {
                double start = rng.uniform(1.0, 8.0);
                sensor["anomalies"] = json::array(
                    {json{{"start_s", start}, {"end_s", start + rng.uniform(0.5, 3.0)},
                          {"value", 1e6}}}); // clamped, but far outside every range
            }
        }
    }
    if (patients > 2 && rng.uniform01() < 0.5) {
        doc["controllers"].push_back(json{{"role", "local"}, {"position", {44.0, 9.0}}});
    }
    return doc;
}

Check criterion3() {
    Check check;
    uint64_t violations = 0;
    uint64_t probes = 0;
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        json doc = randomized_doc(seed);
        Scenario sc = parse_scenario_json(doc);
        TraceWriter writer;
        writer.keep_in_memory(true);
        Engine engine(sc, &writer);
        engine.run();

        // 1) no emergency key ever escalates while its switch is associated
        std::map<std::string, std::vector<std::pair<double, bool>>> assoc_timeline;
        for (const auto* r : events_named(writer.records(), "association_changed")) {
            assoc_timeline[r->node].push_back({r->t, !r->fields.at("to").is_null()});
        }
        auto associated_at = [&](const std::string& node, double t) {
            bool assoc = false;
            auto it = assoc_timeline.find(node);
            if (it == assoc_timeline.end()) return false;
            for (const auto& [at, state] : it->second) {
                if (at <= t) assoc = state;
            }
            return assoc;
        };
        for (const auto* r : events_named(writer.records(), "packet_in_sent")) {
            if (r->fields.at("key").at("class").get<std::string>() == "emergency" &&
                associated_at(r->node, r->t)) {
                ++violations;
            }
        }

        // 2) direct probe of every associated switch's table at end of run
        for (const auto& p : sc.patients) {
            const SwitchNode& sw = engine.switch_node(p.switch_id());
            if (sw.phase() != AssocPhase::Associated) continue;
            for (AppKind app : kAllApps) {
                FlowTable table = sw.table(); // probe a copy
                ++probes;
                if (!table
                         .lookup(make_flow_key(p.switch_id(), app, TrafficClass::Emergency),
                                 engine.now())
                         .hit()) {
                    ++violations;
                }
            }
        }
    }
    check.expect(probes > 0, "no associated switches probed");
    check.expect(violations == 0, std::to_string(violations) + " emergency lookup violations");
    return check;
}

// ---------------------------------------------------------------------------
// criterion 4: routing equals exhaustive enumeration on graphs up to 8 nodes
// ---------------------------------------------------------------------------

Check criterion4() {
    Check check;
    Rng rng(8080);
    for (int instance = 0; instance < 100; ++instance) {
        int n = int(rng.uniform_int(2, 8));
        TopologyGraph g;
        std::vector<NodeId> nodes;
        for (int i = 0; i < n; ++i) {
            nodes.push_back(NodeId{NodeKind::Switch, i});
            g.add_node(nodes.back());
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (rng.uniform01() < 0.5) {
                    g.add_edge(nodes[i], nodes[j], double(rng.uniform_int(1, 5)) * 0.01);
                }
            }
        }
        std::set<NodeId> excluded;
        for (int i = 1; i + 1 < n; ++i) {
            if (rng.uniform01() < 0.3) excluded.insert(nodes[i]);
        }
        sdwban::testing::PathOracle oracle(g, nodes[0], nodes[n - 1], excluded);
        if (!oracle.best_path()) {
            try {
                compute_route(g, nodes[0], nodes[n - 1], excluded);
                check.expect(false, "instance " + std::to_string(instance) +
                                        ": router found a path the oracle says cannot exist");
            } catch (const NoRouteError&) {
            }
            continue;
        }
        auto route = compute_route(g, nodes[0], nodes[n - 1], excluded);
        check.expect(route == *oracle.best_path(),
                     "instance " + std::to_string(instance) + ": path differs from oracle");
        check.expect(std::abs(path_cost(g, route) - *oracle.best_cost()) < 1e-12,
                     "instance " + std::to_string(instance) + ": cost differs from oracle");
        if (!check.ok) break;
    }
    return check;
}

// ---------------------------------------------------------------------------
// criterion 5: LC crash, central takes over within 3 heartbeats + 2 RTTs
// ---------------------------------------------------------------------------

Check criterion5() {
    Check check;
    json doc = base_doc("failover", 60.0, 11);
    doc["lcs_forward_data"] = false;
    doc["controllers"].push_back(json{{"role", "central"}, {"position", {45.0, 8.0}}});
    for (int i = 0; i < 3; ++i) {
        auto& patient = add_patient(doc, 42.0 + 2.0 * i, 12.0);
        add_sensor(patient, "heart_rate", 1.0);
    }
    doc["fault_plan"] =
        json::array({json{{"at_s", 30.0}, {"action", "crash"}, {"node", "LC0"}}});

    RunOutput out = run_doc(doc);

    const double heartbeat = 1.0;
    const int miss_limit = 3;
    const double control_one_way = 0.005 + 256.0 / 250000.0;
    const double budget = 30.0 + miss_limit * heartbeat + 2.0 * (2.0 * control_one_way);

    std::map<std::string, double> reassociated;
    for (const auto* r : events_named(out.records, "association_changed")) {
        if (!r->fields.at("to").is_null() &&
            r->fields.at("to").get<std::string>() == "CC0") {
            check.expect(reassociated.count(r->node) == 0,
                         r->node + " re-associated more than once");
            reassociated[r->node] = r->t;
            check.expect(r->t > 30.0, r->node + " re-associated before the crash");
            check.expect(r->t <= budget, r->node + " re-associated at " + std::to_string(r->t) +
                                             " > budget " + std::to_string(budget));
            check.expect(r->fields.at("cause").get<std::string>() == "failover",
                         r->node + " re-associated for the wrong cause");
        }
    }
    check.expect(reassociated.size() == 3, "expected 3 re-associations, saw " +
                                               std::to_string(reassociated.size()));
    check.expect(out.counters.failovers == 3, "failover count mismatch");

    // 100% delivery for packets generated after the last re-association
    double t_star = 0.0;
    for (const auto& [node, t] : reassociated) t_star = std::max(t_star, t);
    std::set<uint64_t> late_packets;
    for (const auto* r : events_named(out.records, "sample_emitted")) {
        if (r->t > t_star) late_packets.insert(r->fields.at("packet_id").get<uint64_t>());
    }
    check.expect(!late_packets.empty(), "no packets generated after re-association");
    for (const auto* r : events_named(out.records, "cloud_arrival")) {
        late_packets.erase(r->fields.at("packet_id").get<uint64_t>());
    }
    check.expect(late_packets.empty(), std::to_string(late_packets.size()) +
                                           " post-recovery packets were not delivered");
    return check;
}

// ---------------------------------------------------------------------------
// criterion 6: low battery on a relay reroutes around it, audited by hops
// ---------------------------------------------------------------------------

Check criterion6() {
    Check check;
    json doc = base_doc("low_battery_reroute", 40.0, 13);
    doc["lcs_forward_data"] = false;
    doc["auto_infra_links"] = false;
    doc["gateway"] = {{"position", {90.0, 10.0}}};
    doc["controllers"] = json::array({json{{"role", "local"}, {"position", {50.0, 30.0}}}});
    doc["relays"] = json::array({json{{"name", "S10"}, {"position", {60.0, 10.0}}},
                                 json{{"name", "S11"}, {"position", {60.0, 20.0}}}});
    doc["infra_links"] = json::array(
        {json{{"a", "S0"}, {"b", "S10"}, {"wired", false}},
         json{{"a", "S0"}, {"b", "S11"}, {"wired", false}},
         json{{"a", "S10"}, {"b", "GW0"}, {"wired", true}},
         json{{"a", "S11"}, {"b", "GW0"}, {"wired", true}}});
    auto& patient = add_patient(doc, 40.0, 10.0);
    add_sensor(patient, "heart_rate", 0.25);
    doc["fault_plan"] = json::array(
        {json{{"at_s", 20.0}, {"action", "set_battery"}, {"node", "S10"}, {"joules", 40.0}}});

    RunOutput out = run_doc(doc);

    auto low_battery = events_named(out.records, "low_battery");
    check.expect(low_battery.size() == 1 && low_battery[0]->node == "S10",
                 "expected exactly one low-battery event at S10");

    // at least one reroute lands at S0 pointing away from S10
    double t_reroute = 0.0;
    for (const auto* r : events_named(out.records, "flow_mod_applied")) {
        if (r->node == "S0" && r->t > 20.0 &&
            r->fields.at("action").get<std::string>() == "forward_to:S11") {
            t_reroute = t_reroute == 0.0 ? r->t : std::min(t_reroute, r->t);
        }
    }
    check.expect(t_reroute > 0.0, "no reroute flow-mod via S11 reached S0");

    bool used_r1_before = false;
    for (const auto* r : events_named(out.records, "cloud_arrival")) {
        double created = r->fields.at("created_at").get<double>();
        bool via_r1 = false;
        for (const auto& hop : r->fields.at("hops")) {
            if (hop.get<std::string>() == "S10") via_r1 = true;
        }
        if (created < 20.0) {
            used_r1_before = used_r1_before || via_r1;
        }
        if (t_reroute > 0.0 && created > t_reroute) {
            check.expect(!via_r1, "packet created at " + std::to_string(created) +
                                      " after the reroute still traversed S10");
        }
    }
    check.expect(used_r1_before, "the pre-reroute path never used S10");
    check.expect(out.counters.delivered() > 0, "nothing delivered");
    return check;
}

// ---------------------------------------------------------------------------
// criterion 7: conservation identity on a batch of diverse runs
// ---------------------------------------------------------------------------

Check criterion7() {
    Check check;
    std::vector<json> docs;
    docs.push_back(congestion_doc(1));
    docs.push_back(randomized_doc(17));
    {
        json doc = base_doc("lossy", 20.0, 5);
        doc["links"] = {{"body", {{"loss_prob", 0.2}}},
                        {"data", {{"loss_prob", 0.2}}},
                        {"control", {{"loss_prob", 0.2}}}};
        auto& patient = add_patient(doc, 42.0, 12.0);
        add_sensor(patient, "heart_rate", 0.2);
        auto& glucose = add_sensor(patient, "glucose", 0.5);
        glucose["anomalies"] =
            json::array({json{{"start_s", 5.0}, {"end_s", 9.0}, {"value", 20.0}}});
        docs.push_back(doc);
    }
    for (const auto& doc : docs) {
        // the engine aborts and summarize() throws if the identity breaks;
        // re-assert it here from the counters for the record
        RunOutput out = run_doc(doc);
        uint64_t accounted = out.counters.delivered() + out.counters.lost_on_link +
                             out.counters.dropped() + out.counters.residual_end;
        check.expect(out.counters.generated() == accounted,
                     doc.at("name").get<std::string>() + ": generated " +
                         std::to_string(out.counters.generated()) + " != accounted " +
                         std::to_string(accounted));
        check.expect(out.counters.generated() > 0,
                     doc.at("name").get<std::string>() + ": empty run");
    }
    return check;
}

// ---------------------------------------------------------------------------
// criterion 8: byte-identical traces across in-process runs and process
// restarts (via the CLI binary)
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

Check criterion8() {
    Check check;
    json doc = congestion_doc(21);
    doc["duration_s"] = 20.0;

    // in-process: two engines, same scenario and seed
    auto dump = [&](const json& d) {
        Scenario sc = parse_scenario_json(d);
        TraceWriter writer;
        writer.keep_in_memory(true);
        Engine engine(sc, &writer);
        engine.run();
        std::ostringstream oss;
        for (const auto& r : writer.records()) oss << r.to_line() << '\n';
        return oss.str();
    };
    check.expect(dump(doc) == dump(doc), "in-process traces differ");

    // across process restarts, through the installed CLI
    fs::path dir = fs::temp_directory_path() / "sdwban_acceptance_c8";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path scn = dir / "scenario.json";
    {
        std::ofstream out(scn);
        out << doc.dump(2);
    }
    std::string cli = SDWBAN_CLI_PATH;
    for (const char* run_dir : {"a", "b"}) {
        std::string cmd = cli + " run --scenario " + scn.string() + " --seed 21 --out " +
                          (dir / run_dir).string() + " > /dev/null 2>&1";
        check.expect(std::system(cmd.c_str()) == 0, std::string("cli run failed: ") + run_dir);
    }
    std::string a = slurp(dir / "a" / "trace.jsonl");
    std::string b = slurp(dir / "b" / "trace.jsonl");
    check.expect(!a.empty(), "cli produced an empty trace");
    check.expect(a == b, "traces differ across process restarts");
    fs::remove_all(dir);
    return check;
}

// ---------------------------------------------------------------------------
// criterion 9: configured loss 0.3 reproduces 0.30 +/- 0.02 over 10,000 frames
// ---------------------------------------------------------------------------

Check criterion9() {
    Check check;
    // 10,000 samples at 10 ms spacing; the duration sits between the 9999th
    // and 10000th multiple so float rounding cannot shave off the last one
    json doc = base_doc("loss_calibration", 99.995, 23);
    doc["lcs_forward_data"] = false;
    doc["links"] = {{"body", {{"loss_prob", 0.3}}}};
    auto& patient = add_patient(doc, 42.0, 12.0);
    add_sensor(patient, "heart_rate", 0.01);

    RunOutput out = run_doc(doc);
    check.expect(out.counters.generated() == 10000,
                 "expected 10000 frames, generated " +
                     std::to_string(out.counters.generated()));
    double rate = double(out.counters.lost_on_link) / double(out.counters.generated());
    check.expect(rate >= 0.28 && rate <= 0.32,
                 "empirical loss rate " + std::to_string(rate) + " outside [0.28, 0.32]");
    return check;
}

// ---------------------------------------------------------------------------
// criterion 10: one handover across two LC cells, reroute, bounded loss
// ---------------------------------------------------------------------------

Check criterion10() {
    Check check;
    json doc = base_doc("handover_walk", 25.0, 29);
    doc["floor"] = {{"width_m", 100.0}, {"height_m", 100.0}};
    doc["auto_infra_links"] = false;
    doc["gateway"] = {{"position", {50.0, 80.0}}};
    // two cells: each local controller fronts a relay on the walking corridor
    doc["controllers"] = json::array(
        {json{{"role", "local"}, {"position", {25.0, 16.0}}},
         json{{"role", "local"}, {"position", {75.0, 16.0}}}});
    doc["relays"] = json::array({json{{"name", "S10"}, {"position", {25.0, 10.0}}},
                                 json{{"name", "S11"}, {"position", {75.0, 10.0}}}});
    doc["infra_links"] = json::array(
        {json{{"a", "S10"}, {"b", "GW0"}, {"wired", true}},
         json{{"a", "S11"}, {"b", "GW0"}, {"wired", true}}});
    auto& patient = add_patient(doc, 10.0, 10.0);
    add_sensor(patient, "heart_rate", 0.25);
    auto& p2 = add_patient(doc, 24.0, 10.0); // extra patients keep J below N
    add_sensor(p2, "heart_rate", 1.0);
    auto& p3 = add_patient(doc, 74.0, 10.0);
    add_sensor(p3, "heart_rate", 1.0);
    doc["patients"][0]["mobility"] = {
        {"waypoints", json::array({json{{"x", 90.0}, {"y", 10.0}, {"speed_mps", 4.0}}})}};

    RunOutput out = run_doc(doc);

    std::vector<const TraceRecord*> notices;
    for (const auto* r : events_named(out.records, "handover_notice")) {
        if (r->node == "S0") notices.push_back(r);
    }
    check.expect(notices.size() == 1,
                 "expected exactly 1 handover notice from the walker, saw " +
                     std::to_string(notices.size()));
    check.expect(out.counters.failovers == 0, "control association flapped during the walk");
    if (notices.empty()) return check;
    double t_notice = notices[0]->t;

    int reroutes = 0;
    for (const auto* r : events_named(out.records, "flow_mod_applied")) {
        if (r->node == "S0" && r->t >= t_notice) ++reroutes;
    }
    check.expect(reroutes >= 1, "no flow-mod followed the handover");

    // frames of the walker in flight at the notice: dequeued by S0 or S10 but
    // not yet terminal
    std::map<uint64_t, double> dequeue_time;
    for (const auto* r : events_named(out.records, "dequeue")) {
        if ((r->node == "S0" || r->node == "S10") && r->t <= t_notice) {
            dequeue_time[r->fields.at("packet_id").get<uint64_t>()] = r->t;
        }
    }
    std::set<uint64_t> terminal_before;
    for (const auto& r : out.records) {
        if (r.t > t_notice) break;
        if (r.event == "cloud_arrival" || r.event == "drop" ||
            (r.event == "frame_loss" && r.fields.contains("packet_id"))) {
            terminal_before.insert(r.fields.at("packet_id").get<uint64_t>());
        }
    }
    uint64_t in_flight = 0;
    for (const auto& [id, t] : dequeue_time) {
        (void)t;
        if (!terminal_before.count(id)) ++in_flight;
    }
    uint64_t losses_after = 0;
    for (const auto* r : events_named(out.records, "frame_loss")) {
        if (r->t >= t_notice && r->fields.at("kind").get<std::string>() == "data") {
            ++losses_after;
        }
    }
    check.expect(losses_after <= in_flight,
                 "losses after the handover (" + std::to_string(losses_after) +
                     ") exceed the in-flight window (" + std::to_string(in_flight) + ")");
    check.expect(out.counters.delivered() > 0, "nothing delivered");
    return check;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Check()> fn;
    };
    const Criterion criteria[] = {
        {"1 priority dominance under congestion (30 seeds)", criterion1},
        {"2 packet-in economy: one per new normal flow", criterion2},
        {"3 emergency lookups never miss post-association (100 seeds)", criterion3},
        {"4 routing equals exhaustive oracle (100 graphs <= 8 nodes)", criterion4},
        {"5 failover to the central controller within budget", criterion5},
        {"6 low-battery reroute avoids the dying relay", criterion6},
        {"7 packet conservation on every run", criterion7},
        {"8 byte-identical traces across runs and restarts", criterion8},
        {"9 link loss calibration 0.30 +/- 0.02 over 10000 frames", criterion9},
        {"10 single handover across LC cells with bounded loss", criterion10},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Check check;
        try {
            check = criterion.fn();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail << "exception: " << e.what();
        }
        if (check.ok) {
            std::cout << "PASS criterion " << criterion.name << "\n";
        } else {
            ++failures;
            std::cout << "FAIL criterion " << criterion.name << " -- " << check.detail.str()
                      << "\n";
        }
        std::cout.flush();
    }
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
