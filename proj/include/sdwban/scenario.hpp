/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_SCENARIO_HPP
#define SDWBAN_SCENARIO_HPP

#include "sdwban/controller.hpp"
#include "sdwban/core.hpp"
#include "sdwban/sensor.hpp"
#include "sdwban/switch_node.hpp"

#include <json.hpp>

namespace sdwban {

enum class LinkKind {
    Body,       // sensor -> cluster-head switch
    Data,       // switch <-> relay/LC/gateway radio hops
    Control,    // switch <-> controller
    LcWired,    // controller <-> controller interconnect (lossless)
    Backhaul,   // gateway -> cloud
};

std::string to_string(LinkKind kind);

struct LinkParams {
    double latency_s{0.0};
    double bandwidth_bps{1.0};
    double loss_prob{0.0};

    bool operator==(const LinkParams&) const = default;
};

struct Waypoint {
    Vec2 pos;
    double speed_mps{1.0}; // speed while travelling toward this waypoint
};

struct MobilityPlan {
    std::vector<Waypoint> waypoints; // empty => stationary

    // Piecewise-linear position at time t, starting from `origin` at t=0.
    Vec2 position_at(Vec2 origin, double t) const;
};

struct PatientSpec {
    int index{0};
    Vec2 position;
    MobilityPlan mobility;
    std::vector<SensorModel> sensors; // parent_switch filled at load
    // Battery of the patient's cluster-head switch.
    double battery_j{1000.0};
    double tx_cost_j{0.001};
    double sample_cost_j{0.0001};
    double low_battery_fraction{0.1};

    NodeId switch_id() const { return NodeId{NodeKind::Switch, index}; }
};

struct RelaySpec {
    NodeId id;
    Vec2 position;
    double battery_j{1000.0};
    double tx_cost_j{0.001};
    double sample_cost_j{0.0001};
    double low_battery_fraction{0.1};
};

struct ControllerSpec {
    NodeId id;
    ControllerRole role{ControllerRole::Local};
    Vec2 position;
};

struct InfraLink {
    NodeId a;
    NodeId b;
    LinkParams params;
    bool wired{false}; // wired links skip the radio range check
};

struct FaultAction {
    enum class Kind { Crash, Recover, SetBattery } kind{Kind::Crash};
    double at_s{0.0};
    NodeId node;
    double joules{0.0}; // SetBattery only
};

struct TimerConfig {
    double heartbeat_s{1.0};
    int heartbeat_miss_limit{3};
    double packet_in_retry_s{2.0};
    int packet_in_max_retries{5};
    double associate_timeout_s{2.0};
    double idle_timeout_s{30.0}; // Normal entries; Emergency entries never idle out
    double mobility_step_s{0.25};
};

struct Scenario {
    std::string name{"scenario"};
    double duration_s{10.0};
    uint64_t seed{1};

    Vec2 floor{100.0, 100.0};
    double range_body_m{3.0};
    double range_data_m{30.0};
    double range_control_m{100.0};

    int packet_size_bits{1000};
    int control_size_bits{256};

    std::map<LinkKind, LinkParams> links;
    int class_queue_capacity{64};
    int miss_buffer_capacity{16};
    int flow_table_capacity{0}; // 0 = unlimited
    TimerConfig timers;
    int normal_priority{10};
    int emergency_priority{100};

    Thresholds thresholds;

    Vec2 gateway_pos;
    std::vector<ControllerSpec> controllers;
    std::vector<RelaySpec> relays;
    std::vector<PatientSpec> patients;
    std::vector<InfraLink> infra_links;
    bool auto_infra_links{true};
    bool lcs_forward_data{true};
    std::map<NodeId, std::vector<NodeId>> lc_preference; // resolved per switch
    std::vector<FaultAction> fault_plan;

    // --- derived ---
    int n_patients() const { return static_cast<int>(patients.size()); }
    int j_controllers() const;
    std::vector<NodeId> local_controllers() const;
    std::optional<NodeId> central_controller() const;
    static NodeId gateway_id() { return NodeId{NodeKind::Gateway, 0}; }
    static NodeId cloud_id() { return NodeId{NodeKind::Cloud, 0}; }
    std::vector<NodeId> all_switch_ids() const; // patients then relays

    SwitchParams switch_params() const;
    ControllerParams controller_params() const;
};

// Parses and fully validates a scenario document (JSON text). Unknown fields
// are rejected, defaults are filled, and every error names the offending
// path. Throws ConfigError.
Scenario parse_scenario(const std::string& text);
Scenario parse_scenario_json(const nlohmann::json& doc);

// Dotted-path override, e.g. "links.data.loss_prob=0.1" or "duration_s=30".
// Values parse as JSON scalars when possible, else as strings.
void apply_override(nlohmann::json& doc, const std::string& assignment);

} // namespace sdwban

#endif // SDWBAN_SCENARIO_HPP
