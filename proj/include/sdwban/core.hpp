/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_CORE_HPP
#define SDWBAN_CORE_HPP

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sdwban {

using SimTime = double; // seconds

constexpr double kInfiniteTimeout = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// Bad scenario / configuration input (user-fixable).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An operation was called outside its contract (programming error).
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// A state-machine invariant would be broken by the requested mutation.
struct InvariantError : std::logic_error {
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

struct NoRouteError : std::runtime_error {
    explicit NoRouteError(const std::string& what) : std::runtime_error(what) {}
};

// Scheduler / internal consistency failure; aborts a run with a diagnostic.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

// Truncated or malformed trace input.
struct TraceError : std::runtime_error {
    explicit TraceError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

enum class NodeKind {
    Sensor,
    Switch,
    LocalController,
    CentralController,
    Gateway,
    Cloud,
};

struct NodeId {
    NodeKind kind{NodeKind::Sensor};
    int index{0};

    auto operator<=>(const NodeId&) const = default;
};

std::string to_string(NodeId id);
NodeId parse_node_id(std::string_view text); // throws ConfigError

// ---------------------------------------------------------------------------
// Applications and traffic classes
// ---------------------------------------------------------------------------

enum class AppKind {
    HeartRate,
    Temperature,
    Glucose,
    BloodPressure,
    Ecg,
};

constexpr AppKind kAllApps[] = {AppKind::HeartRate, AppKind::Temperature,
                                AppKind::Glucose, AppKind::BloodPressure,
                                AppKind::Ecg};

std::string to_string(AppKind app);
AppKind parse_app_kind(std::string_view text); // throws ConfigError

// Emergency strictly outranks Normal in every scheduling decision.
enum class TrafficClass {
    Normal,
    Emergency,
};

std::string to_string(TrafficClass cls);
TrafficClass parse_traffic_class(std::string_view text);

// ---------------------------------------------------------------------------
// Readings and classification
// ---------------------------------------------------------------------------

struct PhysiologicalReading {
    AppKind app{AppKind::HeartRate};
    double value{0.0}; // app-specific units (bpm, degC, mmol/L, mmHg)
    SimTime sampled_at{0.0};

    bool operator==(const PhysiologicalReading&) const = default;
};

// Per-app normal range; readings inside [low, high] are Normal traffic.
struct AppRange {
    double low{0.0};
    double high{0.0};

    bool operator==(const AppRange&) const = default;
};

struct Thresholds {
    std::map<AppKind, AppRange> ranges;

    const AppRange& range_for(AppKind app) const; // throws ConfigError if missing
    bool operator==(const Thresholds&) const = default;
};

// Emergency iff the value leaves the closed interval [low, high].
TrafficClass classify(const PhysiologicalReading& reading, const Thresholds& thresholds);

// ---------------------------------------------------------------------------
// Packets
// ---------------------------------------------------------------------------

struct Packet {
    uint64_t packet_id{0};
    NodeId src_sensor;
    NodeId src_switch;
    AppKind app{AppKind::HeartRate};
    TrafficClass cls{TrafficClass::Normal};
    PhysiologicalReading reading;
    SimTime created_at{0.0};
    int size_bits{0};
    std::vector<NodeId> hop_trace; // starts with src_sensor, loop-free

    bool operator==(const Packet&) const = default;
};

// Builds a packet for a sensor sample. The class is always derived from the
// reading via classify(); callers never set it directly. Throws ConfigError
// when the reading's app does not match the sensor's app.
Packet new_packet(NodeId sensor, NodeId parent_switch, AppKind sensor_app,
                  const PhysiologicalReading& reading, SimTime now,
                  const Thresholds& thresholds, int size_bits, uint64_t packet_id);

// ---------------------------------------------------------------------------
// Flow keys
// ---------------------------------------------------------------------------

// Exact match on (src_switch, app, class). Emergency keys may wildcard the
// app (app == nullopt) so a single rule covers every application at a switch;
// Normal keys must be fully concrete.
struct FlowKey {
    NodeId src_switch;
    std::optional<AppKind> app;
    TrafficClass cls{TrafficClass::Normal};

    bool is_wildcard() const { return !app.has_value(); }
    auto operator<=>(const FlowKey&) const = default;
};

FlowKey make_flow_key(NodeId src_switch, AppKind app, TrafficClass cls);
FlowKey make_emergency_wildcard_key(NodeId src_switch);

std::string to_string(const FlowKey& key);

// 2-D position in meters.
struct Vec2 {
    double x{0.0};
    double y{0.0};

    bool operator==(const Vec2&) const = default;
};

double distance(Vec2 a, Vec2 b);

} // namespace sdwban

#endif // SDWBAN_CORE_HPP
