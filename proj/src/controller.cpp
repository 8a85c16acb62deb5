/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/controller.hpp"

#include <algorithm>

namespace sdwban {

ControllerNode::ControllerNode(NodeId id, ControllerRole role, ControllerParams params,
                               NodeId gateway, std::vector<NodeId> all_switches,
                               std::vector<NodeId> peer_controllers)
    : id_(id),
      role_(role),
      params_(params),
      gateway_(gateway),
      all_switches_(std::move(all_switches)),
      peers_(std::move(peer_controllers)) {
    view_.add_node(gateway_);
    view_.add_node(id_);
}

ControlMessage ControllerNode::make_msg(NodeId receiver, ControlPayload payload,
                                        SimTime now) const {
    ControlMessage msg;
    msg.payload = std::move(payload);
    msg.sender = id_;
    msg.receiver = receiver;
    msg.sent_at = now;
    return msg;
}

void ControllerNode::mark_declared_edge(NodeId a, NodeId b) {
    declared_edges_.insert(std::minmax(a, b));
}

void ControllerNode::note_switch_position(NodeId sw, Vec2 position,
                                          std::optional<NodeId> attachment) {
    (void)position;
    view_.add_node(sw);
    auto prev = dynamic_edge_.find(sw);
    if (prev != dynamic_edge_.end()) {
        if (!declared_edges_.count(std::minmax(sw, prev->second))) {
            view_.remove_edge(sw, prev->second);
        }
        dynamic_edge_.erase(prev);
    }
    if (attachment && view_.has_node(*attachment)) {
        view_.add_edge(sw, *attachment, params_.dynamic_edge_cost_s);
        dynamic_edge_[sw] = *attachment;
    }
}

FlowEntry ControllerNode::build_entry(NodeId sw, const FlowKey& key, SimTime now,
                                      ControllerActions& out) {
    FlowEntry entry;
    entry.key = key;
    bool emergency = key.cls == TrafficClass::Emergency;
    entry.priority = emergency ? params_.emergency_priority : params_.normal_priority;
    entry.idle_timeout_s = emergency ? kInfiniteTimeout : params_.normal_idle_timeout_s;
    entry.installed_at = now;
    entry.last_matched_at = now;
    try {
        std::vector<NodeId> path = compute_route(view_, sw, gateway_, excluded_);
        entry.action = FlowAction::forward_to(path[1]);
        installed_[{sw, key}] = InstalledFlow{entry, std::move(path)};
    } catch (const NoRouteError&) {
        entry.action = FlowAction::drop();
        installed_[{sw, key}] = InstalledFlow{entry, {}};
        out.push_back(RoutedUnreachableAction{sw, key});
    }
    return entry;
}

ControllerActions ControllerNode::handle_associate(NodeId sw, const Associate& req, SimTime now) {
    ControllerActions out;
    registry_[sw] = RegistryEntry{req.patient, now, req.position};
    note_switch_position(sw, req.position, req.attachment);
    FlowKey key = make_emergency_wildcard_key(sw);
    FlowEntry entry = build_entry(sw, key, now, out);
    out.push_back(CtrlSendAction{make_msg(sw, AssociateAck{entry}, now)});
    return out;
}

ControllerActions ControllerNode::handle_packet_in(NodeId sw, const PacketIn& pin, SimTime now) {
    ControllerActions out;
    if (registry_.find(sw) == registry_.end()) {
        out.push_back(CtrlProtocolErrorAction{"packet-in from unregistered switch " +
                                              to_string(sw)});
        return out;
    }
    FlowEntry entry = build_entry(sw, pin.key, now, out);
    out.push_back(CtrlSendAction{make_msg(sw, FlowMod{entry}, now)});
    if (pin.key.cls == TrafficClass::Emergency) {
        // Every registered switch gets (or refreshes) its emergency rule.
        for (const auto& [peer_sw, reg] : registry_) {
            (void)reg;
            FlowKey wildcard = make_emergency_wildcard_key(peer_sw);
            FlowEntry rule = build_entry(peer_sw, wildcard, now, out);
            out.push_back(CtrlSendAction{make_msg(peer_sw, EmergencyBroadcast{rule}, now)});
        }
    }
    return out;
}

int ControllerNode::reroute_flows(const std::vector<std::pair<NodeId, FlowKey>>& flows,
                                  SimTime now, ControllerActions& out) {
    int changed = 0;
    for (const auto& [sw, key] : flows) {
        FlowEntry before = installed_.at({sw, key}).entry;
        FlowEntry after = build_entry(sw, key, now, out);
        if (after.action == before.action) {
            continue; // same forwarding decision, nothing to push
        }
        out.push_back(CtrlSendAction{make_msg(sw, FlowMod{after}, now)});
        changed += 1;
    }
    return changed;
}

ControllerActions ControllerNode::handle_low_battery(const LowBattery& lb, SimTime now) {
    ControllerActions out;
    if (lb.node == gateway_) {
        out.push_back(CtrlProtocolErrorAction{"refusing to exclude the gateway"});
        return out;
    }
    excluded_.insert(lb.node);
    out.push_back(NodeExcludedAction{lb.node});
    // Re-issue every flow whose path rides through the dying node.
    std::vector<std::pair<NodeId, FlowKey>> affected;
    for (const auto& [id, flow] : installed_) {
        const auto& path = flow.path;
        if (path.size() > 2 &&
            std::find(path.begin() + 1, path.end() - 1, lb.node) != path.end() - 1) {
            affected.push_back(id);
        }
    }
    reroute_flows(affected, now, out);
    return out;
}

ControllerActions ControllerNode::handle_handover(NodeId sw, const HandoverNotice& notice,
                                                  SimTime now) {
    ControllerActions out;
    auto reg = registry_.find(sw);
    if (reg == registry_.end()) {
        out.push_back(
            CtrlProtocolErrorAction{"handover notice from unknown switch " + to_string(sw)});
        return out;
    }
    reg->second.position = notice.position;
    note_switch_position(sw, notice.position, notice.new_attachment);
    std::vector<std::pair<NodeId, FlowKey>> affected;
    for (const auto& [id, flow] : installed_) {
        (void)flow;
        if (id.first == sw) {
            affected.push_back(id);
        }
    }
    int changed = reroute_flows(affected, now, out);
    out.push_back(HandoverAppliedAction{sw, changed});
    return out;
}

ControllerActions ControllerNode::handle_control(const ControlMessage& msg, SimTime now) {
    ControllerActions out;
    if (const auto* hello = std::get_if<Hello>(&msg.payload)) {
        note_switch_position(msg.sender, hello->position, hello->attachment);
        return out;
    }
    if (const auto* assoc = std::get_if<Associate>(&msg.payload)) {
        return handle_associate(msg.sender, *assoc, now);
    }
    if (const auto* pin = std::get_if<PacketIn>(&msg.payload)) {
        return handle_packet_in(msg.sender, *pin, now);
    }
    if (const auto* lb = std::get_if<LowBattery>(&msg.payload)) {
        return handle_low_battery(*lb, now);
    }
    if (const auto* notice = std::get_if<HandoverNotice>(&msg.payload)) {
        return handle_handover(msg.sender, *notice, now);
    }
    if (const auto* hb = std::get_if<ControllerHeartbeat>(&msg.payload)) {
        peer_last_hb_[msg.sender] = now;
        peers_failed_.erase(msg.sender); // a restarted peer counts as fresh
        if (hb->registry) {
            replicas_[msg.sender] = *hb->registry;
        }
        return out;
    }
    out.push_back(CtrlProtocolErrorAction{"unexpected control message " + variant_name(msg) +
                                          " at controller " + to_string(id_)});
    return out;
}

RegistrySnapshot ControllerNode::snapshot() const {
    return registry_;
}

ControllerActions ControllerNode::on_heartbeat_tick(uint64_t tick, SimTime now) {
    ControllerActions out;
    for (NodeId sw : all_switches_) {
        out.push_back(CtrlSendAction{make_msg(sw, ControllerHeartbeat{tick, std::nullopt}, now)});
    }
    for (NodeId peer : peers_) {
        out.push_back(
            CtrlSendAction{make_msg(peer, ControllerHeartbeat{tick, snapshot()}, now)});
    }
    // Peer liveness. LCs watch each other over the wired mesh; whoever has
    // the smallest alive id (central last) adopts the dead peer's switches
    // as they re-associate.
    double silence_limit = params_.heartbeat_miss_limit * params_.heartbeat_interval_s;
    std::vector<NodeId> alive{id_};
    for (NodeId peer : peers_) {
        auto it = peer_last_hb_.find(peer);
        if (it != peer_last_hb_.end() && now - it->second <= silence_limit) {
            alive.push_back(peer);
        }
    }
    NodeId designated = *std::min_element(alive.begin(), alive.end());
    for (NodeId peer : peers_) {
        if (peers_failed_.count(peer)) {
            continue;
        }
        auto it = peer_last_hb_.find(peer);
        bool silent = it != peer_last_hb_.end() && now - it->second > silence_limit;
        if (!silent) {
            continue;
        }
        peers_failed_.insert(peer);
        if (designated == id_) {
            std::vector<NodeId> expected;
            auto replica = replicas_.find(peer);
            if (replica != replicas_.end()) {
                for (const auto& [sw, entry] : replica->second) {
                    (void)entry;
                    expected.push_back(sw);
                }
            }
            out.push_back(TakeoverAction{peer, std::move(expected)});
        }
    }
    return out;
}

std::optional<NodeId> ControllerNode::forward_next_hop(SimTime now) const {
    (void)now;
    try {
        auto path = compute_route(view_, id_, gateway_, excluded_);
        return path[1];
    } catch (const NoRouteError&) {
        return std::nullopt;
    }
}

} // namespace sdwban
