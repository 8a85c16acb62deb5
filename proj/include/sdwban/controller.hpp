/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_CONTROLLER_HPP
#define SDWBAN_CONTROLLER_HPP

#include "sdwban/core.hpp"
#include "sdwban/flow_table.hpp"
#include "sdwban/messages.hpp"
#include "sdwban/routing.hpp"

#include <set>
#include <variant>

namespace sdwban {

enum class ControllerRole {
    Local,
    Central,
};

struct ControllerParams {
    int normal_priority{10};
    int emergency_priority{100};
    double normal_idle_timeout_s{30.0};
    double heartbeat_interval_s{1.0};
    int heartbeat_miss_limit{3};
    double dynamic_edge_cost_s{0.005}; // latency of a switch uplink radio link
};

// --- actions ------------------------------------------------------------------

struct CtrlSendAction {
    ControlMessage msg;
};

struct NodeExcludedAction {
    NodeId node;
};

struct RoutedUnreachableAction {
    NodeId sw;
    FlowKey key;
};

struct HandoverAppliedAction {
    NodeId sw;
    int flows_changed{0};
};

struct TakeoverAction {
    NodeId failed_controller;
    std::vector<NodeId> expected_switches;
};

struct CtrlProtocolErrorAction {
    std::string what;
};

using ControllerAction = std::variant<CtrlSendAction, NodeExcludedAction, RoutedUnreachableAction,
                                      HandoverAppliedAction, TakeoverAction,
                                      CtrlProtocolErrorAction>;
using ControllerActions = std::vector<ControllerAction>;

// ---------------------------------------------------------------------------
// Local or central controller: switch registry, route computation over its
// topology view, packet-in and emergency handling, reroutes on low battery
// and handover, and peer-failure takeover. Pure transition functions; the
// event loop owns timing and delivery.
// ---------------------------------------------------------------------------
class ControllerNode {
public:
    ControllerNode(NodeId id, ControllerRole role, ControllerParams params, NodeId gateway,
                   std::vector<NodeId> all_switches, std::vector<NodeId> peer_controllers);

    NodeId id() const { return id_; }
    ControllerRole role() const { return role_; }

    // Static infrastructure seeded at scenario load.
    TopologyGraph& view() { return view_; }
    const TopologyGraph& view() const { return view_; }

    // Declared links survive attachment changes; only the dynamically
    // learned uplink edge is replaced on handover.
    void mark_declared_edge(NodeId a, NodeId b);

    ControllerActions handle_control(const ControlMessage& msg, SimTime now);

    // Periodic: heartbeats to switches, registry replication to wired peers,
    // peer liveness checks and takeover detection.
    ControllerActions on_heartbeat_tick(uint64_t tick, SimTime now);

    // Data-plane assist: controllers can relay data frames toward the
    // gateway when a scenario attaches switches to them. No flow table is
    // involved; the controller routes from its own view.
    std::optional<NodeId> forward_next_hop(SimTime now) const;

    // --- introspection ---
    const std::map<NodeId, RegistryEntry>& registry() const { return registry_; }
    const std::set<NodeId>& excluded_nodes() const { return excluded_; }
    struct InstalledFlow {
        FlowEntry entry;
        std::vector<NodeId> path; // empty for Drop entries
    };
    const std::map<std::pair<NodeId, FlowKey>, InstalledFlow>& installed_flows() const {
        return installed_;
    }
    const std::map<NodeId, RegistrySnapshot>& peer_replicas() const { return replicas_; }

private:
    ControllerActions handle_associate(NodeId sw, const Associate& req, SimTime now);
    ControllerActions handle_packet_in(NodeId sw, const PacketIn& pin, SimTime now);
    ControllerActions handle_low_battery(const LowBattery& lb, SimTime now);
    ControllerActions handle_handover(NodeId sw, const HandoverNotice& notice, SimTime now);
    void note_switch_position(NodeId sw, Vec2 position, std::optional<NodeId> attachment);

    // Builds the flow entry for (sw, key) from the current view; records it
    // in installed_. Appends a RoutedUnreachable action when no path exists.
    FlowEntry build_entry(NodeId sw, const FlowKey& key, SimTime now, ControllerActions& out);

    // Recomputes the given installed flows; emits FlowMods for the ones whose
    // entry actually changed. Returns how many were re-issued.
    int reroute_flows(const std::vector<std::pair<NodeId, FlowKey>>& flows, SimTime now,
                      ControllerActions& out);

    ControlMessage make_msg(NodeId receiver, ControlPayload payload, SimTime now) const;
    RegistrySnapshot snapshot() const;

    NodeId id_;
    ControllerRole role_;
    ControllerParams params_;
    NodeId gateway_;
    std::vector<NodeId> all_switches_;
    std::vector<NodeId> peers_;

    std::map<NodeId, RegistryEntry> registry_;
    TopologyGraph view_;
    std::set<NodeId> excluded_;
    std::map<std::pair<NodeId, FlowKey>, InstalledFlow> installed_;

    // Dynamic uplink edge per switch (replaced on handover).
    std::map<NodeId, NodeId> dynamic_edge_;
    std::set<std::pair<NodeId, NodeId>> declared_edges_;

    std::map<NodeId, SimTime> peer_last_hb_;
    std::set<NodeId> peers_failed_;
    std::map<NodeId, RegistrySnapshot> replicas_;
};

} // namespace sdwban

#endif // SDWBAN_CONTROLLER_HPP
