/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/switch_node.hpp"

#include <algorithm>

namespace sdwban {

std::string to_string(DropReason reason) {
    switch (reason) {
    case DropReason::QueueOverflow: return "queue_overflow";
    case DropReason::MissBufferOverflow: return "miss_buffer_overflow";
    case DropReason::NoRoute: return "no_route";
    case DropReason::PacketInTimeout: return "packet_in_timeout";
    case DropReason::DeadBattery: return "dead_battery";
    }
    throw InternalError("unknown DropReason");
}

std::string to_string(AssocPhase phase) {
    switch (phase) {
    case AssocPhase::Unassociated: return "unassociated";
    case AssocPhase::Associating: return "associating";
    case AssocPhase::Associated: return "associated";
    case AssocPhase::Orphan: return "orphan";
    }
    throw InternalError("unknown AssocPhase");
}

SwitchNode::SwitchNode(NodeId id, std::optional<int> patient, SwitchParams params,
                       std::vector<NodeId> lc_preference, std::optional<NodeId> central)
    : id_(id),
      patient_(patient),
      params_(params),
      lc_preference_(std::move(lc_preference)),
      central_(central),
      table_(id, size_t(std::max(0, params.flow_table_capacity))) {}

ControlMessage SwitchNode::make_msg(NodeId receiver, ControlPayload payload, SimTime now) const {
    ControlMessage msg;
    msg.payload = std::move(payload);
    msg.sender = id_;
    msg.receiver = receiver;
    msg.sent_at = now;
    return msg;
}

SwitchActions SwitchNode::start(Vec2 position, std::optional<NodeId> attachment, SimTime now,
                                const std::vector<NodeId>& controllers_in_range) {
    position_ = position;
    attachment_ = attachment;
    SwitchActions out;
    for (NodeId ctrl : controllers_in_range) {
        out.push_back(SendControlAction{
            make_msg(ctrl, Hello{patient_.value_or(-1), position_, attachment_}, now)});
    }
    begin_association(now, out, "initial");
    return out;
}

std::vector<NodeId> SwitchNode::candidate_controllers(SimTime now) const {
    // At boot nothing has been heard yet, so every configured LC is a
    // candidate. Later, an LC is only worth asking if it heartbeated
    // recently. The central controller is always the last resort.
    std::vector<NodeId> out;
    bool boot = now < params_.heartbeat_miss_limit * params_.heartbeat_interval_s;
    for (NodeId lc : lc_preference_) {
        if (associated_with_ && lc == *associated_with_) {
            continue; // the one we are leaving
        }
        auto heard = last_heartbeat_.find(lc);
        if (heard == last_heartbeat_.end()) {
            if (boot) out.push_back(lc);
        } else if (heard_recently(lc, now)) {
            out.push_back(lc);
        }
    }
    if (central_) {
        out.push_back(*central_);
    }
    return out;
}

bool SwitchNode::heard_recently(NodeId controller, SimTime now) const {
    auto it = last_heartbeat_.find(controller);
    if (it == last_heartbeat_.end()) {
        return false;
    }
    return now - it->second <= params_.heartbeat_miss_limit * params_.heartbeat_interval_s;
}

void SwitchNode::begin_association(SimTime now, SwitchActions& out, const char* cause) {
    std::vector<NodeId> candidates = candidate_controllers(now);
    std::optional<NodeId> old = associated_with_;
    associated_with_.reset();
    associate_cause_ = cause;
    if (candidates.empty()) {
        phase_ = AssocPhase::Orphan;
        out.push_back(AssociationChangedAction{old, std::nullopt, "orphan"});
        return;
    }
    phase_ = AssocPhase::Associating;
    associate_target_ = candidates.front();
    associate_deadline_ = now + params_.associate_timeout_s;
    associate_remaining_.assign(candidates.begin() + 1, candidates.end());
    if (old) {
        out.push_back(AssociationChangedAction{old, std::nullopt, cause});
    }
    out.push_back(SendControlAction{make_msg(
        associate_target_, Associate{patient_.value_or(-1), position_, attachment_}, now)});
}

SwitchActions SwitchNode::handle_data_packet(const Packet& pkt, bool from_own_sensor,
                                             SimTime now) {
    if (from_own_sensor && pkt.src_switch != id_) {
        throw ContractViolation("switch " + to_string(id_) + " received foreign sensor packet " +
                                std::to_string(pkt.packet_id) + " for " +
                                to_string(pkt.src_switch));
    }
    SwitchActions out;
    FlowKey key = make_flow_key(id_, pkt.app, pkt.cls);
    MatchResult match = table_.lookup(key, now);
    if (match.hit()) {
        if (match.entry.action.kind == ActionKind::Drop) {
            out.push_back(DroppedPacketAction{pkt, DropReason::NoRoute});
        } else {
            enqueue(pkt, *match.entry.action.next_hop, out);
        }
        return out;
    }
    // Table miss: hold the packet and escalate (once per key).
    auto& buffer = miss_buffer_[key];
    if (static_cast<int>(buffer.size()) >= params_.miss_buffer_capacity) {
        out.push_back(DroppedPacketAction{pkt, DropReason::MissBufferOverflow});
        if (buffer.empty()) miss_buffer_.erase(key);
        return out;
    }
    buffer.push_back(pkt);
    if (phase_ == AssocPhase::Associated && pending_.find(key) == pending_.end()) {
        send_packet_in(key, pkt, now, out);
    }
    return out;
}

void SwitchNode::send_packet_in(const FlowKey& key, const Packet& trigger, SimTime now,
                                SwitchActions& out) {
    pending_[key] = PendingPacketIn{now, 0};
    out.push_back(SendControlAction{make_msg(*associated_with_, PacketIn{key, trigger}, now)});
}

void SwitchNode::enqueue(const Packet& pkt, NodeId next_hop, SwitchActions& out) {
    auto& queue = pkt.cls == TrafficClass::Emergency ? queue_emergency_ : queue_normal_;
    if (static_cast<int>(queue.size()) >= params_.class_queue_capacity) {
        out.push_back(DroppedPacketAction{pkt, DropReason::QueueOverflow});
        return;
    }
    queue.push_back(QueuedPacket{pkt, next_hop});
    out.push_back(EnqueuedAction{pkt.packet_id, pkt.cls, next_hop});
}

std::optional<QueuedPacket> SwitchNode::dequeue_next() {
    if (!queue_emergency_.empty()) {
        QueuedPacket qp = queue_emergency_.front();
        queue_emergency_.pop_front();
        return qp;
    }
    if (!queue_normal_.empty()) {
        QueuedPacket qp = queue_normal_.front();
        queue_normal_.pop_front();
        return qp;
    }
    return std::nullopt;
}

SwitchActions SwitchNode::apply_entry(const FlowEntry& entry, bool via_broadcast, SimTime now) {
    SwitchActions out;
    if (entry.key.src_switch != id_) {
        out.push_back(ProtocolErrorAction{"flow entry for foreign switch " +
                                          to_string(entry.key.src_switch) + " discarded"});
        return out;
    }
    try {
        table_.install(entry, now);
    } catch (const InvariantError& e) {
        out.push_back(ProtocolErrorAction{std::string("flow entry rejected: ") + e.what()});
        return out;
    }
    out.push_back(FlowInstalledAction{entry, via_broadcast});
    // Drain every buffered key the new entry covers, in FIFO order.
    for (auto it = miss_buffer_.begin(); it != miss_buffer_.end();) {
        if (!FlowTable::key_matches(entry.key, it->first)) {
            ++it;
            continue;
        }
        if (entry.action.kind == ActionKind::Drop) {
            for (const Packet& pkt : it->second) {
                out.push_back(DroppedPacketAction{pkt, DropReason::NoRoute});
            }
        } else {
            for (const Packet& pkt : it->second) {
                enqueue(pkt, *entry.action.next_hop, out);
            }
        }
        pending_.erase(it->first);
        it = miss_buffer_.erase(it);
    }
    return out;
}

SwitchActions SwitchNode::handle_control(const ControlMessage& msg, SimTime now) {
    SwitchActions out;
    if (const auto* hb = std::get_if<ControllerHeartbeat>(&msg.payload)) {
        (void)hb;
        last_heartbeat_[msg.sender] = now;
        if (phase_ == AssocPhase::Orphan) {
            begin_association(now, out, "recovery");
        }
        return out;
    }
    if (const auto* ack = std::get_if<AssociateAck>(&msg.payload)) {
        if (phase_ != AssocPhase::Associating || msg.sender != associate_target_) {
            return out; // stale ack from an earlier attempt
        }
        std::optional<NodeId> old = associated_with_;
        phase_ = AssocPhase::Associated;
        associated_with_ = msg.sender;
        associate_remaining_.clear();
        auto installed = apply_entry(ack->emergency_entry, false, now);
        out.insert(out.end(), installed.begin(), installed.end());
        out.push_back(AssociationChangedAction{old, associated_with_, associate_cause_});
        // Fresh controller, fresh escalation state.
        pending_.clear();
        for (const auto& [key, packets] : miss_buffer_) {
            if (!packets.empty()) {
                send_packet_in(key, packets.front(), now, out);
            }
        }
        flush_pending_control(now, out);
        return out;
    }
    if (const auto* fm = std::get_if<FlowMod>(&msg.payload)) {
        return apply_entry(fm->entry, false, now);
    }
    if (const auto* eb = std::get_if<EmergencyBroadcast>(&msg.payload)) {
        return apply_entry(eb->entry, true, now);
    }
    if (const auto* lb = std::get_if<LowBattery>(&msg.payload)) {
        // A body sensor reports through its cluster head; relay upstream.
        if (phase_ == AssocPhase::Associated) {
            out.push_back(SendControlAction{make_msg(*associated_with_, *lb, now)});
        } else {
            pending_control_.push_back(*lb);
        }
        return out;
    }
    out.push_back(ProtocolErrorAction{"unexpected control message " + variant_name(msg) +
                                      " at switch " + to_string(id_)});
    return out;
}

void SwitchNode::flush_pending_control(SimTime now, SwitchActions& out) {
    for (auto& payload : pending_control_) {
        out.push_back(SendControlAction{make_msg(*associated_with_, std::move(payload), now)});
    }
    pending_control_.clear();
}

SwitchActions SwitchNode::on_maintenance(SimTime now) {
    SwitchActions out;
    switch (phase_) {
    case AssocPhase::Associated: {
        if (!heard_recently(*associated_with_, now)) {
            begin_association(now, out, "failover");
            break;
        }
        // Packet-in retries only make sense with a live controller.
        std::vector<FlowKey> exhausted;
        for (auto& [key, pending] : pending_) {
            if (now - pending.last_sent_at < params_.packet_in_retry_s) {
                continue;
            }
            if (pending.retries >= params_.packet_in_max_retries) {
                exhausted.push_back(key);
                continue;
            }
            pending.retries += 1;
            pending.last_sent_at = now;
            auto it = miss_buffer_.find(key);
            if (it == miss_buffer_.end() || it->second.empty()) {
                exhausted.push_back(key); // nothing left to ask about
                continue;
            }
            out.push_back(
                SendControlAction{make_msg(*associated_with_, PacketIn{key, it->second.front()}, now)});
        }
        for (const FlowKey& key : exhausted) {
            auto it = miss_buffer_.find(key);
            if (it != miss_buffer_.end()) {
                for (const Packet& pkt : it->second) {
                    out.push_back(DroppedPacketAction{pkt, DropReason::PacketInTimeout});
                }
                miss_buffer_.erase(it);
            }
            pending_.erase(key);
        }
        break;
    }
    case AssocPhase::Associating: {
        if (now >= associate_deadline_) {
            if (associate_remaining_.empty()) {
                phase_ = AssocPhase::Orphan;
                out.push_back(AssociationChangedAction{std::nullopt, std::nullopt, "orphan"});
            } else {
                associate_target_ = associate_remaining_.front();
                associate_remaining_.erase(associate_remaining_.begin());
                associate_deadline_ = now + params_.associate_timeout_s;
                out.push_back(SendControlAction{make_msg(
                    associate_target_, Associate{patient_.value_or(-1), position_, attachment_},
                    now)});
            }
        }
        break;
    }
    case AssocPhase::Orphan: {
        bool anyone_alive = false;
        for (const auto& [ctrl, at] : last_heartbeat_) {
            (void)at;
            if (heard_recently(ctrl, now)) {
                anyone_alive = true;
                break;
            }
        }
        if (anyone_alive) {
            begin_association(now, out, "recovery");
        }
        break;
    }
    case AssocPhase::Unassociated:
        break;
    }
    return out;
}

SwitchActions SwitchNode::on_attachment_changed(std::optional<NodeId> new_attachment,
                                                Vec2 position, SimTime now) {
    attachment_ = new_attachment;
    position_ = position;
    SwitchActions out;
    // Losing every attachment is not reported; the switch keeps transmitting
    // toward its stale next hop and the frames count as out-of-range losses.
    // The notice fires once a concrete attachment exists again.
    if (phase_ == AssocPhase::Associated && new_attachment.has_value()) {
        out.push_back(SendControlAction{
            make_msg(*associated_with_, HandoverNotice{new_attachment, position}, now)});
    }
    return out;
}

SwitchActions SwitchNode::report_low_battery(double battery_j, SimTime now) {
    SwitchActions out;
    if (phase_ == AssocPhase::Associated) {
        out.push_back(
            SendControlAction{make_msg(*associated_with_, LowBattery{id_, battery_j}, now)});
    } else {
        pending_control_.push_back(LowBattery{id_, battery_j});
    }
    return out;
}

size_t SwitchNode::miss_buffered_total() const {
    size_t total = 0;
    for (const auto& [key, packets] : miss_buffer_) {
        (void)key;
        total += packets.size();
    }
    return total;
}

} // namespace sdwban
