/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_ENGINE_HPP
#define SDWBAN_ENGINE_HPP

#include "sdwban/controller.hpp"
#include "sdwban/scenario.hpp"
#include "sdwban/sensor.hpp"
#include "sdwban/switch_node.hpp"
#include "sdwban/trace.hpp"

#include <memory>
#include <queue>

namespace sdwban {

// Aggregate outcome counters; the trace is the source of truth, these are the
// engine's own tally used for the end-of-run conservation check.
struct RunCounters {
    uint64_t generated_normal{0};
    uint64_t generated_emergency{0};
    uint64_t delivered_normal{0};
    uint64_t delivered_emergency{0};
    uint64_t lost_on_link{0}; // data frames only
    uint64_t drop_queue_overflow{0};
    uint64_t drop_miss_buffer_overflow{0};
    uint64_t drop_no_route{0};
    uint64_t drop_packet_in_timeout{0};
    uint64_t drop_dead_battery{0};
    uint64_t drop_node_crash{0};
    uint64_t suppressed_sends{0}; // dead-battery sample/control suppressions (no packet)
    uint64_t packet_ins{0};
    uint64_t flow_mods{0};
    uint64_t broadcasts{0};
    uint64_t heartbeats{0};
    uint64_t control_bytes{0};
    uint64_t handovers{0};
    uint64_t failovers{0};
    uint64_t protocol_errors{0};
    uint64_t residual_end{0};

    uint64_t generated() const { return generated_normal + generated_emergency; }
    uint64_t delivered() const { return delivered_normal + delivered_emergency; }
    uint64_t dropped() const {
        return drop_queue_overflow + drop_miss_buffer_overflow + drop_no_route +
               drop_packet_in_timeout + drop_dead_battery + drop_node_crash;
    }
};

struct RunResult {
    RunCounters counters;
    SimTime end_time{0.0};
};

// ---------------------------------------------------------------------------
// Deterministic discrete-event core. One instance per run; strictly
// single-threaded. Sources (samples, heartbeats, timers, mobility) stop at
// scenario.duration_s, after which the queue drains to quiescence so
// in-flight packets settle into delivered/dropped/residual.
// ---------------------------------------------------------------------------
class Engine {
public:
    Engine(Scenario scenario, TraceWriter* trace);

    RunResult run();

    // --- test hooks (valid after run()) ---
    const RunCounters& counters() const { return counters_; }
    const SwitchNode& switch_node(NodeId id) const;
    const ControllerNode* controller_node(NodeId id) const; // null if crashed
    SimTime now() const { return now_; }

private:
    // --- event machinery ---
    struct Frame {
        bool is_data{false};
        Packet pkt;         // valid if is_data
        ControlMessage msg; // valid if !is_data
        NodeId from;
        NodeId to;
        LinkKind kind{LinkKind::Data};
        int size_bits{0};
    };

    struct EvSensorSample {
        NodeId sensor;
        uint64_t k{0};
    };
    struct EvFrameArrival {
        Frame frame;
    };
    struct EvFrameLoss {
        Frame frame;
        std::string reason;
    };
    struct EvTxComplete {
        NodeId node;
    };
    struct EvMaintenance {
        NodeId sw;
        uint64_t k{0};
    };
    struct EvHeartbeat {
        NodeId controller;
        uint64_t tick{0};
    };
    struct EvMobility {
        int patient{0};
        uint64_t k{0};
    };
    struct EvFault {
        FaultAction action;
    };
    using EventPayload = std::variant<EvSensorSample, EvFrameArrival, EvFrameLoss, EvTxComplete,
                                      EvMaintenance, EvHeartbeat, EvMobility, EvFault>;

    struct Event {
        SimTime at{0.0};
        uint64_t seq{0};
        EventPayload payload;
    };
    struct EventLater {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    // --- per-node runtime ---
    struct SensorRt {
        SensorRuntime runtime;
        bool alive{true};
    };
    struct SwitchRt {
        std::unique_ptr<SwitchNode> node;
        Battery battery;
        bool alive{true};
        bool tx_busy{false};
        bool is_relay{false};
    };
    struct ControllerRt {
        std::unique_ptr<ControllerNode> node;
        ControllerSpec spec;
        bool alive{true};
        bool tx_busy{false};
        std::deque<QueuedPacket> q_emergency;
        std::deque<QueuedPacket> q_normal;
    };

    enum class Terminal { Delivered, Lost, Dropped, Residual };

    // --- scheduling ---
    void schedule(SimTime at, EventPayload payload);
    void dispatch(const Event& ev);

    // --- init ---
    void init_runtime();
    void seed_controller_view(ControllerNode& ctrl);
    void boot_switch(NodeId sw, SimTime now);

    // --- handlers ---
    void on_sensor_sample(const EvSensorSample& ev);
    void on_frame_arrival(Frame frame);
    void on_frame_loss(const EvFrameLoss& ev);
    void on_tx_complete(NodeId node);
    void on_maintenance(const EvMaintenance& ev);
    void on_heartbeat(const EvHeartbeat& ev);
    void on_mobility(const EvMobility& ev);
    void on_fault(const FaultAction& action);

    void data_arrival_at_switch(Frame& frame);
    void data_arrival_at_controller(Frame& frame);
    void data_arrival_at_gateway(Frame& frame);
    void data_arrival_at_cloud(Frame& frame);

    // --- actions ---
    void apply_switch_actions(NodeId sw, const SwitchActions& actions);
    void apply_controller_actions(NodeId ctrl, const ControllerActions& actions);
    void send_control(const ControlMessage& msg);

    // --- transport ---
    void transmit(Frame frame, SimTime start);
    void pump_switch(NodeId sw);
    void pump_controller(NodeId ctrl);
    LinkKind control_link_kind(NodeId from, NodeId to) const;
    const LinkParams& link_params(const Frame& frame) const;
    double radio_range(LinkKind kind) const;
    bool node_alive(NodeId id) const;
    Vec2 node_position(NodeId id) const;
    Rng& link_rng(NodeId from, NodeId to);

    // --- mobility/attachment ---
    std::optional<NodeId> nearest_attachment(Vec2 pos, NodeId self) const;

    // --- bookkeeping ---
    void record_generated(const Packet& pkt);
    void record_terminal(const Packet& pkt, Terminal kind, const std::string& detail);
    void count_drop(DropReason reason);
    void battery_events(NodeId owner, const Battery::SpendResult& result);
    void trace(const std::string& node, const std::string& event, nlohmann::json fields);
    void finish_run();

    Scenario sc_;
    TraceWriter* trace_writer_;

    std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
    uint64_t next_event_seq_{0};
    uint64_t next_trace_seq_{0};
    uint64_t next_packet_id_{0};
    SimTime now_{0.0};

    std::map<NodeId, SensorRt> sensors_;
    std::map<NodeId, SwitchRt> switches_;
    std::map<NodeId, ControllerRt> controllers_;
    std::map<NodeId, Vec2> positions_;
    std::map<std::pair<NodeId, NodeId>, double> link_free_at_;
    std::map<std::pair<NodeId, NodeId>, Rng> link_rngs_;
    // Scenario-declared links usable by adjacent nodes, keyed (min, max).
    std::map<std::pair<NodeId, NodeId>, InfraLink> declared_links_;

    struct PacketLedger {
        TrafficClass cls{TrafficClass::Normal};
        bool terminal{false};
    };
    std::map<uint64_t, PacketLedger> ledger_;

    RunCounters counters_;
};

} // namespace sdwban

#endif // SDWBAN_ENGINE_HPP
