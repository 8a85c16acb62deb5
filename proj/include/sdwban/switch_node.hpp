/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_SWITCH_NODE_HPP
#define SDWBAN_SWITCH_NODE_HPP

#include "sdwban/core.hpp"
#include "sdwban/flow_table.hpp"
#include "sdwban/messages.hpp"

#include <deque>
#include <variant>

namespace sdwban {

enum class DropReason {
    QueueOverflow,
    MissBufferOverflow,
    NoRoute,
    PacketInTimeout,
    DeadBattery,
};

std::string to_string(DropReason reason);

enum class AssocPhase {
    Unassociated,
    Associating,
    Associated,
    Orphan,
};

std::string to_string(AssocPhase phase);

struct SwitchParams {
    int class_queue_capacity{64};
    int miss_buffer_capacity{16}; // per flow key
    int flow_table_capacity{0};   // 0 = unlimited
    double heartbeat_interval_s{1.0};
    int heartbeat_miss_limit{3};
    double packet_in_retry_s{2.0};
    int packet_in_max_retries{5};
    double associate_timeout_s{2.0};
};

// A packet waiting in a class queue, stamped with the next hop that was
// current when it was enqueued. A later flow change never redirects it.
struct QueuedPacket {
    Packet pkt;
    NodeId next_hop;
};

// --- actions the event loop interprets ---------------------------------------

struct SendControlAction {
    ControlMessage msg;
};

struct EnqueuedAction {
    uint64_t packet_id{0};
    TrafficClass cls{TrafficClass::Normal};
    NodeId next_hop;
};

struct DroppedPacketAction {
    Packet pkt;
    DropReason reason{DropReason::NoRoute};
};

struct FlowInstalledAction {
    FlowEntry entry;
    bool via_broadcast{false};
};

struct AssociationChangedAction {
    std::optional<NodeId> from;
    std::optional<NodeId> to; // nullopt => orphan / searching
    std::string cause;        // "initial", "failover", "orphan", "recovery"
};

struct ProtocolErrorAction {
    std::string what;
};

using SwitchAction = std::variant<SendControlAction, EnqueuedAction, DroppedPacketAction,
                                  FlowInstalledAction, AssociationChangedAction,
                                  ProtocolErrorAction>;

using SwitchActions = std::vector<SwitchAction>;

// ---------------------------------------------------------------------------
// The SDN-enabled switch (cluster head). All operations are synchronous state
// transitions returning the externally visible actions; the event loop owns
// the instance, applies timing, and interprets the actions.
// ---------------------------------------------------------------------------
class SwitchNode {
public:
    SwitchNode(NodeId id, std::optional<int> patient, SwitchParams params,
               std::vector<NodeId> lc_preference, std::optional<NodeId> central);

    NodeId id() const { return id_; }
    std::optional<int> patient() const { return patient_; }

    // Boot: announce presence to every controller and start associating.
    SwitchActions start(Vec2 position, std::optional<NodeId> attachment, SimTime now,
                        const std::vector<NodeId>& controllers_in_range);

    // Ingress of a data packet, either from one of this switch's own sensors
    // or in transit from another switch. Transit packets are matched against
    // this switch's own (app, class) rules.
    SwitchActions handle_data_packet(const Packet& pkt, bool from_own_sensor, SimTime now);

    // Any control message addressed to this switch.
    SwitchActions handle_control(const ControlMessage& msg, SimTime now);

    // Periodic maintenance: association liveness, associate timeouts,
    // packet-in retries. Driven by the event loop on a fixed cadence.
    SwitchActions on_maintenance(SimTime now);

    // Mobility: the radio attachment point changed (or was lost).
    SwitchActions on_attachment_changed(std::optional<NodeId> new_attachment, Vec2 position,
                                        SimTime now);

    // Low battery of this switch itself (engine owns the battery model).
    SwitchActions report_low_battery(double battery_j, SimTime now);

    // Strict priority: emergency queue first, FIFO within a class.
    std::optional<QueuedPacket> dequeue_next();
    bool has_queued() const { return !queue_emergency_.empty() || !queue_normal_.empty(); }

    // --- introspection ---
    AssocPhase phase() const { return phase_; }
    std::optional<NodeId> associated_with() const { return associated_with_; }
    const FlowTable& table() const { return table_; }
    FlowTable& table() { return table_; }
    size_t queue_depth(TrafficClass cls) const {
        return cls == TrafficClass::Emergency ? queue_emergency_.size() : queue_normal_.size();
    }
    const std::deque<QueuedPacket>& queued(TrafficClass cls) const {
        return cls == TrafficClass::Emergency ? queue_emergency_ : queue_normal_;
    }
    const std::map<FlowKey, std::deque<Packet>>& miss_buffer() const { return miss_buffer_; }
    size_t miss_buffered_total() const;
    bool has_pending_packet_in(const FlowKey& key) const { return pending_.count(key) > 0; }
    Vec2 position() const { return position_; }
    std::optional<NodeId> attachment() const { return attachment_; }

private:
    struct PendingPacketIn {
        SimTime last_sent_at{0.0};
        int retries{0};
    };

    SwitchActions apply_entry(const FlowEntry& entry, bool via_broadcast, SimTime now);
    void enqueue(const Packet& pkt, NodeId next_hop, SwitchActions& out);
    void send_packet_in(const FlowKey& key, const Packet& trigger, SimTime now,
                        SwitchActions& out);
    void begin_association(SimTime now, SwitchActions& out, const char* cause);
    std::vector<NodeId> candidate_controllers(SimTime now) const;
    bool heard_recently(NodeId controller, SimTime now) const;
    ControlMessage make_msg(NodeId receiver, ControlPayload payload, SimTime now) const;
    void flush_pending_control(SimTime now, SwitchActions& out);

    NodeId id_;
    std::optional<int> patient_;
    SwitchParams params_;
    std::vector<NodeId> lc_preference_;
    std::optional<NodeId> central_;

    FlowTable table_;
    std::deque<QueuedPacket> queue_emergency_;
    std::deque<QueuedPacket> queue_normal_;
    std::map<FlowKey, std::deque<Packet>> miss_buffer_;
    std::map<FlowKey, PendingPacketIn> pending_;

    AssocPhase phase_{AssocPhase::Unassociated};
    std::optional<NodeId> associated_with_;
    NodeId associate_target_{NodeKind::LocalController, 0};
    SimTime associate_deadline_{0.0};
    std::vector<NodeId> associate_remaining_;
    std::string associate_cause_{"initial"};

    std::map<NodeId, SimTime> last_heartbeat_;
    std::vector<ControlPayload> pending_control_; // held until associated

    Vec2 position_;
    std::optional<NodeId> attachment_;
};

} // namespace sdwban

#endif // SDWBAN_SWITCH_NODE_HPP
