/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/scenario.hpp"

#include "sdwban/rng.hpp"

#include <algorithm>
#include <set>

namespace sdwban {

using nlohmann::json;

std::string to_string(LinkKind kind) {
    switch (kind) {
    case LinkKind::Body: return "body";
    case LinkKind::Data: return "data";
    case LinkKind::Control: return "control";
    case LinkKind::LcWired: return "lc_wired";
    case LinkKind::Backhaul: return "backhaul";
    }
    throw InternalError("unknown LinkKind");
}

Vec2 MobilityPlan::position_at(Vec2 origin, double t) const {
    Vec2 here = origin;
    double clock = 0.0;
    for (const auto& wp : waypoints) {
        double leg = distance(here, wp.pos);
        if (leg <= 0.0) {
            continue;
        }
        double leg_time = leg / wp.speed_mps;
        if (t <= clock + leg_time) {
            double frac = (t - clock) / leg_time;
            return Vec2{here.x + (wp.pos.x - here.x) * frac, here.y + (wp.pos.y - here.y) * frac};
        }
        clock += leg_time;
        here = wp.pos;
    }
    return here; // plan finished; stay at the last waypoint
}

int Scenario::j_controllers() const {
    int j = 0;
    for (const auto& c : controllers) {
        if (c.role == ControllerRole::Local) ++j;
    }
    return j;
}

std::vector<NodeId> Scenario::local_controllers() const {
    std::vector<NodeId> out;
    for (const auto& c : controllers) {
        if (c.role == ControllerRole::Local) out.push_back(c.id);
    }
    return out;
}

std::optional<NodeId> Scenario::central_controller() const {
    for (const auto& c : controllers) {
        if (c.role == ControllerRole::Central) return c.id;
    }
    return std::nullopt;
}

std::vector<NodeId> Scenario::all_switch_ids() const {
    std::vector<NodeId> out;
    for (const auto& p : patients) out.push_back(p.switch_id());
    for (const auto& r : relays) out.push_back(r.id);
    return out;
}

SwitchParams Scenario::switch_params() const {
    SwitchParams params;
    params.class_queue_capacity = class_queue_capacity;
    params.miss_buffer_capacity = miss_buffer_capacity;
    params.flow_table_capacity = flow_table_capacity;
    params.heartbeat_interval_s = timers.heartbeat_s;
    params.heartbeat_miss_limit = timers.heartbeat_miss_limit;
    params.packet_in_retry_s = timers.packet_in_retry_s;
    params.packet_in_max_retries = timers.packet_in_max_retries;
    params.associate_timeout_s = timers.associate_timeout_s;
    return params;
}

ControllerParams Scenario::controller_params() const {
    ControllerParams params;
    params.normal_priority = normal_priority;
    params.emergency_priority = emergency_priority;
    params.normal_idle_timeout_s = timers.idle_timeout_s;
    params.heartbeat_interval_s = timers.heartbeat_s;
    params.heartbeat_miss_limit = timers.heartbeat_miss_limit;
    params.dynamic_edge_cost_s = links.at(LinkKind::Data).latency_s;
    return params;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

struct AppDefaults {
    AppKind app;
    double period_s;
    double baseline;
    double jitter;
    double low;
    double high;
    double clamp_low;
    double clamp_high;
};

constexpr AppDefaults kAppDefaults[] = {
    {AppKind::HeartRate, 1.0, 72.0, 1.5, 50.0, 120.0, 0.0, 300.0},
    {AppKind::Ecg, 0.25, 1.0, 0.05, 0.5, 1.5, 0.0, 5.0},
    {AppKind::Temperature, 30.0, 36.8, 0.1, 36.0, 38.0, 30.0, 45.0},
    {AppKind::Glucose, 300.0, 5.5, 0.2, 3.9, 7.8, 0.0, 35.0},
    {AppKind::BloodPressure, 60.0, 115.0, 4.0, 90.0, 140.0, 0.0, 300.0},
};

const AppDefaults& defaults_for(AppKind app) {
    for (const auto& d : kAppDefaults) {
        if (d.app == app) return d;
    }
    throw InternalError("no defaults for app");
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

void expect_array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
}

// Typo guard: every field must be known, unknown keys are errors.
void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& path) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            fail(path + "." + key, "unknown field");
        }
    }
}

double get_number(const json& j, const char* field, const std::string& path,
                  std::optional<double> fallback = std::nullopt) {
    if (!j.contains(field)) {
        if (fallback) return *fallback;
        fail(path + "." + field, "missing required field");
    }
    const json& v = j.at(field);
    if (!v.is_number()) fail(path + "." + field, "expected a number");
    return v.get<double>();
}

int get_int(const json& j, const char* field, const std::string& path,
            std::optional<int> fallback = std::nullopt) {
    if (!j.contains(field)) {
        if (fallback) return *fallback;
        fail(path + "." + field, "missing required field");
    }
    const json& v = j.at(field);
    if (!v.is_number_integer()) fail(path + "." + field, "expected an integer");
    return v.get<int>();
}

bool get_bool(const json& j, const char* field, const std::string& path, bool fallback) {
    if (!j.contains(field)) return fallback;
    const json& v = j.at(field);
    if (!v.is_boolean()) fail(path + "." + field, "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& j, const char* field, const std::string& path,
                       std::optional<std::string> fallback = std::nullopt) {
    if (!j.contains(field)) {
        if (fallback) return *fallback;
        fail(path + "." + field, "missing required field");
    }
    const json& v = j.at(field);
    if (!v.is_string()) fail(path + "." + field, "expected a string");
    return v.get<std::string>();
}

Vec2 get_position(const json& j, const char* field, const std::string& path,
                  std::optional<Vec2> fallback = std::nullopt) {
    if (!j.contains(field)) {
        if (fallback) return *fallback;
        fail(path + "." + field, "missing required field");
    }
    const json& v = j.at(field);
    if (!v.is_array() || v.size() != 2 || !v.at(0).is_number() || !v.at(1).is_number()) {
        fail(path + "." + field, "expected [x, y]");
    }
    return Vec2{v.at(0).get<double>(), v.at(1).get<double>()};
}

LinkParams parse_link(const json& j, const std::string& path, LinkParams fallback) {
    expect_object(j, path);
    reject_unknown(j, {"latency_s", "bandwidth_bps", "loss_prob"}, path);
    LinkParams params;
    params.latency_s = get_number(j, "latency_s", path, fallback.latency_s);
    params.bandwidth_bps = get_number(j, "bandwidth_bps", path, fallback.bandwidth_bps);
    params.loss_prob = get_number(j, "loss_prob", path, fallback.loss_prob);
    if (params.latency_s < 0.0) fail(path + ".latency_s", "must be >= 0");
    if (params.bandwidth_bps <= 0.0) fail(path + ".bandwidth_bps", "must be > 0");
    if (params.loss_prob < 0.0 || params.loss_prob > 1.0) {
        fail(path + ".loss_prob", "must be within [0, 1]");
    }
    return params;
}

std::map<LinkKind, LinkParams> default_links() {
    return {
        {LinkKind::Body, {0.002, 250000.0, 0.0}},
        {LinkKind::Data, {0.005, 250000.0, 0.0}},
        {LinkKind::Control, {0.005, 250000.0, 0.0}},
        {LinkKind::LcWired, {0.002, 10000000.0, 0.0}},
        {LinkKind::Backhaul, {0.05, 10000000.0, 0.0}},
    };
}

SensorModel parse_sensor(const json& j, const std::string& path, int global_index,
                         NodeId parent_switch) {
    expect_object(j, path);
    reject_unknown(j,
                   {"app", "period_s", "phase_s", "baseline", "jitter_stddev", "anomalies",
                    "battery_j", "tx_cost_j", "sample_cost_j", "low_battery_fraction"},
                   path);
    SensorModel sensor;
    sensor.id = NodeId{NodeKind::Sensor, global_index};
    sensor.parent_switch = parent_switch;
    sensor.app = parse_app_kind(get_string(j, "app", path));
    const AppDefaults& d = defaults_for(sensor.app);
    sensor.period_s = get_number(j, "period_s", path, d.period_s);
    sensor.phase_s = get_number(j, "phase_s", path, 0.0);
    sensor.baseline = get_number(j, "baseline", path, d.baseline);
    sensor.jitter_stddev = get_number(j, "jitter_stddev", path, d.jitter);
    sensor.clamp_low = d.clamp_low;
    sensor.clamp_high = d.clamp_high;
    sensor.battery_j = get_number(j, "battery_j", path, 1000.0);
    sensor.tx_cost_j = get_number(j, "tx_cost_j", path, 0.001);
    sensor.sample_cost_j = get_number(j, "sample_cost_j", path, 0.0001);
    sensor.low_battery_fraction = get_number(j, "low_battery_fraction", path, 0.1);
    if (sensor.period_s <= 0.0) fail(path + ".period_s", "must be > 0");
    if (sensor.phase_s < 0.0) fail(path + ".phase_s", "must be >= 0");
    if (sensor.jitter_stddev < 0.0) fail(path + ".jitter_stddev", "must be >= 0");
    if (sensor.battery_j < 0.0) fail(path + ".battery_j", "must be >= 0");
    if (sensor.low_battery_fraction <= 0.0 || sensor.low_battery_fraction >= 1.0) {
        fail(path + ".low_battery_fraction", "must be within (0, 1)");
    }
    if (j.contains("anomalies")) {
        expect_array(j.at("anomalies"), path + ".anomalies");
        int i = 0;
        for (const auto& a : j.at("anomalies")) {
            std::string apath = path + ".anomalies[" + std::to_string(i++) + "]";
            expect_object(a, apath);
            reject_unknown(a, {"start_s", "end_s", "value"}, apath);
            AnomalyEpisode episode;
            episode.start_s = get_number(a, "start_s", apath);
            episode.end_s = get_number(a, "end_s", apath);
            episode.value = get_number(a, "value", apath);
            if (episode.end_s <= episode.start_s) fail(apath, "end_s must exceed start_s");
            sensor.anomalies.push_back(episode);
        }
    }
    return sensor;
}

MobilityPlan parse_mobility(const json& j, const std::string& path, Vec2 origin, Vec2 floor,
                            uint64_t seed, int patient_index) {
    expect_object(j, path);
    reject_unknown(j, {"waypoints", "random_waypoints"}, path);
    if (j.contains("waypoints") && j.contains("random_waypoints")) {
        fail(path, "give either waypoints or random_waypoints, not both");
    }
    MobilityPlan plan;
    if (j.contains("waypoints")) {
        expect_array(j.at("waypoints"), path + ".waypoints");
        int i = 0;
        for (const auto& w : j.at("waypoints")) {
            std::string wpath = path + ".waypoints[" + std::to_string(i++) + "]";
            expect_object(w, wpath);
            reject_unknown(w, {"x", "y", "speed_mps"}, wpath);
            Waypoint wp;
            wp.pos = Vec2{get_number(w, "x", wpath), get_number(w, "y", wpath)};
            wp.speed_mps = get_number(w, "speed_mps", wpath, 1.0);
            if (wp.speed_mps <= 0.0) fail(wpath + ".speed_mps", "must be > 0");
            plan.waypoints.push_back(wp);
        }
    } else if (j.contains("random_waypoints")) {
        // Authoring convenience: expands to explicit waypoints at load so the
        // realized walk depends only on (scenario, seed).
        const json& rw = j.at("random_waypoints");
        std::string rpath = path + ".random_waypoints";
        expect_object(rw, rpath);
        reject_unknown(rw, {"count", "speed_mps"}, rpath);
        int count = get_int(rw, "count", rpath);
        double speed = get_number(rw, "speed_mps", rpath, 1.0);
        if (count < 1) fail(rpath + ".count", "must be >= 1");
        if (speed <= 0.0) fail(rpath + ".speed_mps", "must be > 0");
        Rng rng(Rng::derive_seed(seed, "mobility/" + std::to_string(patient_index)));
        (void)origin;
        for (int k = 0; k < count; ++k) {
            Waypoint wp;
            wp.pos = Vec2{rng.uniform(0.0, floor.x), rng.uniform(0.0, floor.y)};
            wp.speed_mps = speed;
            plan.waypoints.push_back(wp);
        }
    }
    return plan;
}

} // namespace

Scenario parse_scenario_json(const json& doc) {
    const std::string root = "scenario";
    expect_object(doc, root);
    reject_unknown(doc,
                   {"schema_version", "name", "duration_s", "seed", "floor", "radio_range_m",
                    "packet_size_bits", "control_size_bits", "links", "capacities", "timers",
                    "flow_priorities", "thresholds", "gateway", "controllers", "relays",
                    "patients", "infra_links", "auto_infra_links", "lcs_forward_data",
                    "lc_preference", "fault_plan"},
                   root);

    int version = get_int(doc, "schema_version", root);
    if (version != 1) {
        fail(root + ".schema_version", "unsupported version " + std::to_string(version));
    }

    Scenario sc;
    sc.name = get_string(doc, "name", root, std::string("scenario"));
    sc.duration_s = get_number(doc, "duration_s", root);
    if (sc.duration_s <= 0.0) fail(root + ".duration_s", "must be > 0");
    if (!doc.contains("seed")) fail(root + ".seed", "missing required field");
    if (!doc.at("seed").is_number_integer()) fail(root + ".seed", "expected an integer");
    sc.seed = doc.at("seed").get<uint64_t>();

    if (doc.contains("floor")) {
        const json& f = doc.at("floor");
        expect_object(f, root + ".floor");
        reject_unknown(f, {"width_m", "height_m"}, root + ".floor");
        sc.floor = Vec2{get_number(f, "width_m", root + ".floor"),
                        get_number(f, "height_m", root + ".floor")};
        if (sc.floor.x <= 0.0 || sc.floor.y <= 0.0) fail(root + ".floor", "must be positive");
    }

    if (doc.contains("radio_range_m")) {
        const json& r = doc.at("radio_range_m");
        expect_object(r, root + ".radio_range_m");
        reject_unknown(r, {"body", "data", "control"}, root + ".radio_range_m");
        sc.range_body_m = get_number(r, "body", root + ".radio_range_m", sc.range_body_m);
        sc.range_data_m = get_number(r, "data", root + ".radio_range_m", sc.range_data_m);
        sc.range_control_m = get_number(r, "control", root + ".radio_range_m", sc.range_control_m);
    }

    sc.packet_size_bits = get_int(doc, "packet_size_bits", root, 1000);
    sc.control_size_bits = get_int(doc, "control_size_bits", root, 256);
    if (sc.packet_size_bits <= 0) fail(root + ".packet_size_bits", "must be > 0");
    if (sc.control_size_bits <= 0) fail(root + ".control_size_bits", "must be > 0");

    sc.links = default_links();
    if (doc.contains("links")) {
        const json& l = doc.at("links");
        expect_object(l, root + ".links");
        reject_unknown(l, {"body", "data", "control", "lc_wired", "backhaul"}, root + ".links");
        for (auto kind : {LinkKind::Body, LinkKind::Data, LinkKind::Control, LinkKind::LcWired,
                          LinkKind::Backhaul}) {
            std::string key = to_string(kind);
            if (l.contains(key)) {
                sc.links[kind] = parse_link(l.at(key), root + ".links." + key, sc.links[kind]);
            }
        }
    }
    if (sc.links[LinkKind::LcWired].loss_prob != 0.0) {
        fail(root + ".links.lc_wired.loss_prob", "the wired interconnect is lossless; must be 0");
    }

    if (doc.contains("capacities")) {
        const json& c = doc.at("capacities");
        expect_object(c, root + ".capacities");
        reject_unknown(c, {"class_queue", "miss_buffer_per_key", "flow_table"},
                       root + ".capacities");
        sc.class_queue_capacity = get_int(c, "class_queue", root + ".capacities", 64);
        sc.miss_buffer_capacity = get_int(c, "miss_buffer_per_key", root + ".capacities", 16);
        sc.flow_table_capacity = get_int(c, "flow_table", root + ".capacities", 0);
        if (sc.class_queue_capacity < 1) fail(root + ".capacities.class_queue", "must be >= 1");
        if (sc.miss_buffer_capacity < 1) {
            fail(root + ".capacities.miss_buffer_per_key", "must be >= 1");
        }
        if (sc.flow_table_capacity < 0) fail(root + ".capacities.flow_table", "must be >= 0");
    }

    if (doc.contains("timers")) {
        const json& t = doc.at("timers");
        expect_object(t, root + ".timers");
        reject_unknown(t,
                       {"heartbeat_s", "heartbeat_miss_limit", "packet_in_retry_s",
                        "packet_in_max_retries", "associate_timeout_s", "idle_timeout_s",
                        "mobility_step_s"},
                       root + ".timers");
        sc.timers.heartbeat_s = get_number(t, "heartbeat_s", root + ".timers", 1.0);
        sc.timers.heartbeat_miss_limit = get_int(t, "heartbeat_miss_limit", root + ".timers", 3);
        sc.timers.packet_in_retry_s = get_number(t, "packet_in_retry_s", root + ".timers", 2.0);
        sc.timers.packet_in_max_retries =
            get_int(t, "packet_in_max_retries", root + ".timers", 5);
        sc.timers.associate_timeout_s =
            get_number(t, "associate_timeout_s", root + ".timers", 2.0);
        sc.timers.idle_timeout_s = get_number(t, "idle_timeout_s", root + ".timers", 30.0);
        sc.timers.mobility_step_s = get_number(t, "mobility_step_s", root + ".timers", 0.25);
        if (sc.timers.heartbeat_s <= 0.0) fail(root + ".timers.heartbeat_s", "must be > 0");
        if (sc.timers.heartbeat_miss_limit < 1) {
            fail(root + ".timers.heartbeat_miss_limit", "must be >= 1");
        }
        if (sc.timers.packet_in_retry_s <= 0.0) {
            fail(root + ".timers.packet_in_retry_s", "must be > 0");
        }
        if (sc.timers.idle_timeout_s <= 0.0) fail(root + ".timers.idle_timeout_s", "must be > 0");
        if (sc.timers.mobility_step_s <= 0.0) {
            fail(root + ".timers.mobility_step_s", "must be > 0");
        }
    }

    if (doc.contains("flow_priorities")) {
        const json& p = doc.at("flow_priorities");
        expect_object(p, root + ".flow_priorities");
        reject_unknown(p, {"normal", "emergency"}, root + ".flow_priorities");
        sc.normal_priority = get_int(p, "normal", root + ".flow_priorities", 10);
        sc.emergency_priority = get_int(p, "emergency", root + ".flow_priorities", 100);
    }
    if (sc.emergency_priority <= sc.normal_priority) {
        fail(root + ".flow_priorities", "emergency priority must exceed normal priority");
    }

    // Thresholds: defaults per app, overridable per app.
    for (const auto& d : kAppDefaults) {
        sc.thresholds.ranges[d.app] = AppRange{d.low, d.high};
    }
    if (doc.contains("thresholds")) {
        const json& t = doc.at("thresholds");
        expect_object(t, root + ".thresholds");
        reject_unknown(t, {"heart_rate", "temperature", "glucose", "blood_pressure", "ecg"},
                       root + ".thresholds");
        for (const auto& [key, value] : t.items()) {
            std::string tpath = root + ".thresholds." + key;
            expect_object(value, tpath);
            reject_unknown(value, {"low", "high"}, tpath);
            AppKind app = parse_app_kind(key);
            AppRange range;
            range.low = get_number(value, "low", tpath);
            range.high = get_number(value, "high", tpath);
            sc.thresholds.ranges[app] = range;
        }
    }
    for (const auto& [app, range] : sc.thresholds.ranges) {
        if (range.low >= range.high) {
            fail(root + ".thresholds." + to_string(app), "low must be less than high");
        }
    }

    if (!doc.contains("gateway")) fail(root + ".gateway", "missing required field");
    {
        const json& g = doc.at("gateway");
        expect_object(g, root + ".gateway");
        reject_unknown(g, {"position"}, root + ".gateway");
        sc.gateway_pos = get_position(g, "position", root + ".gateway");
    }

    if (!doc.contains("controllers")) fail(root + ".controllers", "missing required field");
    expect_array(doc.at("controllers"), root + ".controllers");
    {
        int locals = 0;
        int centrals = 0;
        int i = 0;
        for (const auto& c : doc.at("controllers")) {
            std::string cpath = root + ".controllers[" + std::to_string(i++) + "]";
            expect_object(c, cpath);
            reject_unknown(c, {"role", "position"}, cpath);
            ControllerSpec spec;
            std::string role = get_string(c, "role", cpath, std::string("local"));
            if (role == "local") {
                spec.role = ControllerRole::Local;
                spec.id = NodeId{NodeKind::LocalController, locals++};
            } else if (role == "central") {
                spec.role = ControllerRole::Central;
                spec.id = NodeId{NodeKind::CentralController, 0};
                if (++centrals > 1) fail(cpath + ".role", "at most one central controller");
            } else {
                fail(cpath + ".role", "expected 'local' or 'central'");
            }
            spec.position = get_position(c, "position", cpath);
            sc.controllers.push_back(spec);
        }
        if (locals < 1) fail(root + ".controllers", "at least one local controller is required");
    }

    if (!doc.contains("patients")) fail(root + ".patients", "missing required field");
    expect_array(doc.at("patients"), root + ".patients");
    {
        int sensor_index = 0;
        int i = 0;
        for (const auto& p : doc.at("patients")) {
            std::string ppath = root + ".patients[" + std::to_string(i) + "]";
            expect_object(p, ppath);
            reject_unknown(p,
                           {"position", "mobility", "sensors", "battery_j", "tx_cost_j",
                            "sample_cost_j", "low_battery_fraction"},
                           ppath);
            PatientSpec patient;
            patient.index = i;
            patient.position = get_position(p, "position", ppath);
            patient.battery_j = get_number(p, "battery_j", ppath, 1000.0);
            patient.tx_cost_j = get_number(p, "tx_cost_j", ppath, 0.001);
            patient.sample_cost_j = get_number(p, "sample_cost_j", ppath, 0.0001);
            patient.low_battery_fraction = get_number(p, "low_battery_fraction", ppath, 0.1);
            if (p.contains("mobility")) {
                patient.mobility = parse_mobility(p.at("mobility"), ppath + ".mobility",
                                                  patient.position, sc.floor, sc.seed, i);
            }
            if (p.contains("sensors")) {
                expect_array(p.at("sensors"), ppath + ".sensors");
                int si = 0;
                for (const auto& s : p.at("sensors")) {
                    std::string spath = ppath + ".sensors[" + std::to_string(si++) + "]";
                    patient.sensors.push_back(
                        parse_sensor(s, spath, sensor_index++, patient.switch_id()));
                }
            }
            sc.patients.push_back(std::move(patient));
            ++i;
        }
    }

    if (doc.contains("relays")) {
        expect_array(doc.at("relays"), root + ".relays");
        int i = 0;
        std::set<NodeId> seen;
        for (const auto& r : doc.at("relays")) {
            std::string rpath = root + ".relays[" + std::to_string(i++) + "]";
            expect_object(r, rpath);
            reject_unknown(r,
                           {"name", "position", "battery_j", "tx_cost_j", "sample_cost_j",
                            "low_battery_fraction"},
                           rpath);
            RelaySpec relay;
            relay.id = parse_node_id(get_string(r, "name", rpath));
            if (relay.id.kind != NodeKind::Switch) {
                fail(rpath + ".name", "relays are switch nodes; name them S<k>");
            }
            if (relay.id.index < sc.n_patients()) {
                fail(rpath + ".name",
                     "relay index collides with a patient switch; use S" +
                         std::to_string(sc.n_patients()) + " or higher");
            }
            if (!seen.insert(relay.id).second) fail(rpath + ".name", "duplicate relay name");
            relay.position = get_position(r, "position", rpath);
            relay.battery_j = get_number(r, "battery_j", rpath, 1000.0);
            relay.tx_cost_j = get_number(r, "tx_cost_j", rpath, 0.001);
            relay.sample_cost_j = get_number(r, "sample_cost_j", rpath, 0.0001);
            relay.low_battery_fraction = get_number(r, "low_battery_fraction", rpath, 0.1);
            sc.relays.push_back(relay);
        }
    }

    // The J-much-smaller-than-N rule. The one-patient/one-controller desk
    // case stays legal; you cannot run with fewer than one controller.
    if (sc.j_controllers() >= sc.n_patients() &&
        !(sc.j_controllers() == 1 && sc.n_patients() == 1)) {
        fail(root, "J must be less than N (" + std::to_string(sc.j_controllers()) +
                       " local controllers for " + std::to_string(sc.n_patients()) +
                       " patients)");
    }

    // Known node ids, for reference checks below.
    std::set<NodeId> known;
    known.insert(Scenario::gateway_id());
    known.insert(Scenario::cloud_id());
    for (const auto& c : sc.controllers) known.insert(c.id);
    for (const auto& p : sc.patients) {
        known.insert(p.switch_id());
        for (const auto& s : p.sensors) known.insert(s.id);
    }
    for (const auto& r : sc.relays) known.insert(r.id);

    if (doc.contains("infra_links")) {
        expect_array(doc.at("infra_links"), root + ".infra_links");
        int i = 0;
        for (const auto& l : doc.at("infra_links")) {
            std::string lpath = root + ".infra_links[" + std::to_string(i++) + "]";
            expect_object(l, lpath);
            reject_unknown(l, {"a", "b", "wired", "latency_s", "bandwidth_bps", "loss_prob"},
                           lpath);
            InfraLink link;
            link.a = parse_node_id(get_string(l, "a", lpath));
            link.b = parse_node_id(get_string(l, "b", lpath));
            if (link.a == link.b) fail(lpath, "link endpoints must differ");
            for (NodeId end : {link.a, link.b}) {
                if (!known.count(end)) fail(lpath, "unknown node " + to_string(end));
                if (end.kind == NodeKind::Sensor || end.kind == NodeKind::Cloud) {
                    fail(lpath, to_string(end) + " cannot terminate an infrastructure link");
                }
            }
            link.wired = get_bool(l, "wired", lpath, true);
            LinkParams base = link.wired ? sc.links[LinkKind::LcWired] : sc.links[LinkKind::Data];
            link.params.latency_s = get_number(l, "latency_s", lpath, base.latency_s);
            link.params.bandwidth_bps = get_number(l, "bandwidth_bps", lpath, base.bandwidth_bps);
            link.params.loss_prob = get_number(l, "loss_prob", lpath, base.loss_prob);
            sc.infra_links.push_back(link);
        }
    }
    sc.auto_infra_links = get_bool(doc, "auto_infra_links", root, true);
    sc.lcs_forward_data = get_bool(doc, "lcs_forward_data", root, true);

    // Controller preference lists: explicit map or round-robin assignment so
    // load spreads over the J local controllers.
    std::vector<NodeId> locals = sc.local_controllers();
    if (doc.contains("lc_preference") && doc.at("lc_preference").is_object()) {
        for (const auto& [key, value] : doc.at("lc_preference").items()) {
            std::string lpath = root + ".lc_preference." + key;
            NodeId sw = parse_node_id(key);
            if (!known.count(sw) || sw.kind != NodeKind::Switch) {
                fail(lpath, "unknown switch " + key);
            }
            expect_array(value, lpath);
            std::vector<NodeId> prefs;
            for (const auto& name : value) {
                NodeId lc = parse_node_id(name.get<std::string>());
                if (std::find(locals.begin(), locals.end(), lc) == locals.end()) {
                    fail(lpath, "unknown local controller " + name.get<std::string>());
                }
                prefs.push_back(lc);
            }
            if (prefs.empty()) fail(lpath, "preference list cannot be empty");
            sc.lc_preference[sw] = prefs;
        }
        for (NodeId sw : sc.all_switch_ids()) {
            if (!sc.lc_preference.count(sw)) {
                fail(root + ".lc_preference", "missing entry for " + to_string(sw));
            }
        }
    } else if (doc.contains("lc_preference") &&
               !(doc.at("lc_preference").is_string() &&
                 doc.at("lc_preference").get<std::string>() == "auto")) {
        fail(root + ".lc_preference", "expected 'auto' or an object of per-switch lists");
    } else {
        int k = 0;
        for (NodeId sw : sc.all_switch_ids()) {
            std::vector<NodeId> prefs;
            for (size_t off = 0; off < locals.size(); ++off) {
                prefs.push_back(locals[(k + off) % locals.size()]);
            }
            sc.lc_preference[sw] = prefs;
            ++k;
        }
    }

    if (doc.contains("fault_plan")) {
        expect_array(doc.at("fault_plan"), root + ".fault_plan");
        int i = 0;
        for (const auto& f : doc.at("fault_plan")) {
            std::string fpath = root + ".fault_plan[" + std::to_string(i++) + "]";
            expect_object(f, fpath);
            reject_unknown(f, {"at_s", "action", "node", "joules"}, fpath);
            FaultAction fault;
            fault.at_s = get_number(f, "at_s", fpath);
            if (fault.at_s < 0.0 || fault.at_s > sc.duration_s) {
                fail(fpath + ".at_s", "must lie within [0, duration_s]");
            }
            std::string action = get_string(f, "action", fpath);
            if (action == "crash") {
                fault.kind = FaultAction::Kind::Crash;
            } else if (action == "recover") {
                fault.kind = FaultAction::Kind::Recover;
            } else if (action == "set_battery") {
                fault.kind = FaultAction::Kind::SetBattery;
                fault.joules = get_number(f, "joules", fpath);
                if (fault.joules < 0.0) fail(fpath + ".joules", "must be >= 0");
            } else {
                fail(fpath + ".action", "expected crash, recover or set_battery");
            }
            fault.node = parse_node_id(get_string(f, "node", fpath));
            if (!known.count(fault.node)) {
                fail(fpath + ".node", "unknown node " + to_string(fault.node));
            }
            if (fault.node.kind == NodeKind::Gateway || fault.node.kind == NodeKind::Cloud) {
                fail(fpath + ".node", "gateway and cloud cannot fail in this model");
            }
            if (fault.kind == FaultAction::Kind::SetBattery &&
                fault.node.kind != NodeKind::Switch && fault.node.kind != NodeKind::Sensor) {
                fail(fpath + ".node", "set_battery applies to sensors and switches only");
            }
            sc.fault_plan.push_back(fault);
        }
    }

    // Every switch must start with at least one controller in control range.
    for (const auto& p : sc.patients) {
        bool covered = false;
        for (const auto& c : sc.controllers) {
            if (distance(p.position, c.position) <= sc.range_control_m) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            fail(root + ".patients[" + std::to_string(p.index) + "]",
                 "no controller within control radio range at t=0");
        }
    }
    for (size_t i = 0; i < sc.relays.size(); ++i) {
        bool covered = false;
        for (const auto& c : sc.controllers) {
            if (distance(sc.relays[i].position, c.position) <= sc.range_control_m) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            fail(root + ".relays[" + std::to_string(i) + "]",
                 "no controller within control radio range at t=0");
        }
    }

    return sc;
}

Scenario parse_scenario(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw ConfigError("scenario: not valid JSON");
    }
    return parse_scenario_json(doc);
}

void apply_override(json& doc, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' must look like path.to.field=value");
    }
    std::string path = assignment.substr(0, eq);
    std::string raw = assignment.substr(eq + 1);

    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw; // plain string
    }

    json* cursor = &doc;
    size_t start = 0;
    while (true) {
        size_t dot = path.find('.', start);
        std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) {
            throw ConfigError("override '" + assignment + "' has an empty path segment");
        }
        if (cursor->is_null()) {
            *cursor = json::object(); // descend into sections absent from the document
        }
        if (!cursor->is_object()) {
            throw ConfigError("override path '" + path + "' does not address an object");
        }
        if (dot == std::string::npos) {
            (*cursor)[key] = value;
            return;
        }
        cursor = &(*cursor)[key];
        start = dot + 1;
    }
}

} // namespace sdwban
