/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/core.hpp"

#include <charconv>

namespace sdwban {

namespace {

struct KindName {
    NodeKind kind;
    const char* prefix;
};

// Prefixes double as the wire/trace spelling of node ids: "S0", "LC1", ...
constexpr KindName kKindNames[] = {
    {NodeKind::Sensor, "N"},
    {NodeKind::Switch, "S"},
    {NodeKind::LocalController, "LC"},
    {NodeKind::CentralController, "CC"},
    {NodeKind::Gateway, "GW"},
    {NodeKind::Cloud, "CL"},
};

} // namespace

std::string to_string(NodeId id) {
    for (const auto& kn : kKindNames) {
        if (kn.kind == id.kind) {
            return std::string(kn.prefix) + std::to_string(id.index);
        }
    }
    throw InternalError("unknown NodeKind");
}

NodeId parse_node_id(std::string_view text) {
    // Longest prefix first so "LC" is not read as an unknown prefix ending in C.
    const KindName* best = nullptr;
    size_t best_len = 0;
    for (const auto& kn : kKindNames) {
        std::string_view prefix(kn.prefix);
        if (text.size() > prefix.size() && text.substr(0, prefix.size()) == prefix &&
            prefix.size() > best_len) {
            best = &kn;
            best_len = prefix.size();
        }
    }
    if (best == nullptr) {
        throw ConfigError("bad node id '" + std::string(text) + "'");
    }
    std::string_view digits = text.substr(best_len);
    int index = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || index < 0) {
        throw ConfigError("bad node id '" + std::string(text) + "'");
    }
    return NodeId{best->kind, index};
}

std::string to_string(AppKind app) {
    switch (app) {
    case AppKind::HeartRate: return "heart_rate";
    case AppKind::Temperature: return "temperature";
    case AppKind::Glucose: return "glucose";
    case AppKind::BloodPressure: return "blood_pressure";
    case AppKind::Ecg: return "ecg";
    }
    throw InternalError("unknown AppKind");
}

AppKind parse_app_kind(std::string_view text) {
    for (AppKind app : kAllApps) {
        if (to_string(app) == text) {
            return app;
        }
    }
    throw ConfigError("unknown app kind '" + std::string(text) + "'");
}

std::string to_string(TrafficClass cls) {
    return cls == TrafficClass::Normal ? "normal" : "emergency";
}

TrafficClass parse_traffic_class(std::string_view text) {
    if (text == "normal") return TrafficClass::Normal;
    if (text == "emergency") return TrafficClass::Emergency;
    throw ConfigError("unknown traffic class '" + std::string(text) + "'");
}

const AppRange& Thresholds::range_for(AppKind app) const {
    auto it = ranges.find(app);
    if (it == ranges.end()) {
        throw ConfigError("no thresholds configured for app " + to_string(app));
    }
    return it->second;
}

TrafficClass classify(const PhysiologicalReading& reading, const Thresholds& thresholds) {
    const AppRange& range = thresholds.range_for(reading.app);
    if (reading.value < range.low || reading.value > range.high) {
        return TrafficClass::Emergency;
    }
    return TrafficClass::Normal;
}

Packet new_packet(NodeId sensor, NodeId parent_switch, AppKind sensor_app,
                  const PhysiologicalReading& reading, SimTime now,
                  const Thresholds& thresholds, int size_bits, uint64_t packet_id) {
    if (reading.app != sensor_app) {
        throw ConfigError("reading app " + to_string(reading.app) +
                          " does not match sensor app " + to_string(sensor_app) +
                          " at " + to_string(sensor));
    }
    if (!std::isfinite(reading.value)) {
        throw ConfigError("non-finite reading value at " + to_string(sensor));
    }
    Packet pkt;
    pkt.packet_id = packet_id;
    pkt.src_sensor = sensor;
    pkt.src_switch = parent_switch;
    pkt.app = sensor_app;
    pkt.cls = classify(reading, thresholds);
    pkt.reading = reading;
    pkt.created_at = now;
    pkt.size_bits = size_bits;
    pkt.hop_trace = {sensor};
    return pkt;
}

FlowKey make_flow_key(NodeId src_switch, AppKind app, TrafficClass cls) {
    return FlowKey{src_switch, app, cls};
}

FlowKey make_emergency_wildcard_key(NodeId src_switch) {
    return FlowKey{src_switch, std::nullopt, TrafficClass::Emergency};
}

std::string to_string(const FlowKey& key) {
    std::string app = key.app ? to_string(*key.app) : "*";
    return "(" + to_string(key.src_switch) + "," + app + "," + to_string(key.cls) + ")";
}

double distance(Vec2 a, Vec2 b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace sdwban
