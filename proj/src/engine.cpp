/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/engine.hpp"

#include "sdwban/log.hpp"

#include <algorithm>

namespace sdwban {

using nlohmann::json;

Engine::Engine(Scenario scenario, TraceWriter* trace)
    : sc_(std::move(scenario)), trace_writer_(trace) {}

// ---------------------------------------------------------------------------
// Setup
// ---------------------------------------------------------------------------

void Engine::init_runtime() {
    positions_[Scenario::gateway_id()] = sc_.gateway_pos;
    positions_[Scenario::cloud_id()] = sc_.gateway_pos;

    for (const auto& link : sc_.infra_links) {
        declared_links_[std::minmax(link.a, link.b)] = link;
    }

    for (const auto& p : sc_.patients) {
        NodeId sw = p.switch_id();
        positions_[sw] = p.position;
        SwitchRt rt;
        rt.node = std::make_unique<SwitchNode>(sw, p.index, sc_.switch_params(),
                                               sc_.lc_preference.at(sw),
                                               sc_.central_controller());
        rt.battery = Battery(p.battery_j, p.tx_cost_j, p.sample_cost_j, p.low_battery_fraction);
        switches_[sw] = std::move(rt);
        for (const auto& model : p.sensors) {
            positions_[model.id] = p.position;
            SensorRt srt;
            srt.runtime = SensorRuntime(model, sc_.seed);
            sensors_[model.id] = std::move(srt);
        }
    }

    for (const auto& r : sc_.relays) {
        positions_[r.id] = r.position;
        SwitchRt rt;
        rt.node = std::make_unique<SwitchNode>(r.id, std::nullopt, sc_.switch_params(),
                                               sc_.lc_preference.at(r.id),
                                               sc_.central_controller());
        rt.battery = Battery(r.battery_j, r.tx_cost_j, r.sample_cost_j, r.low_battery_fraction);
        rt.is_relay = true;
        switches_[r.id] = std::move(rt);
    }

    std::vector<NodeId> all_switches = sc_.all_switch_ids();
    std::vector<NodeId> all_controllers;
    for (const auto& c : sc_.controllers) all_controllers.push_back(c.id);
    for (const auto& c : sc_.controllers) {
        positions_[c.id] = c.position;
        ControllerRt rt;
        rt.spec = c;
        std::vector<NodeId> peers;
        for (NodeId other : all_controllers) {
            if (other != c.id) peers.push_back(other);
        }
        rt.node = std::make_unique<ControllerNode>(c.id, c.role, sc_.controller_params(),
                                                   Scenario::gateway_id(), all_switches, peers);
        seed_controller_view(*rt.node);
        controllers_[c.id] = std::move(rt);
    }
}

void Engine::seed_controller_view(ControllerNode& ctrl) {
    TopologyGraph& view = ctrl.view();
    // Static forwarding fabric: relays, the gateway, and (when enabled) the
    // local controllers themselves.
    std::vector<NodeId> infra{Scenario::gateway_id()};
    for (const auto& r : sc_.relays) {
        view.add_node(r.id);
        infra.push_back(r.id);
    }
    if (sc_.lcs_forward_data) {
        for (NodeId lc : sc_.local_controllers()) {
            view.add_node(lc);
            infra.push_back(lc);
        }
        // Wired mesh edges double as data links between forwarding LCs.
        std::vector<NodeId> lcs = sc_.local_controllers();
        for (size_t i = 0; i < lcs.size(); ++i) {
            for (size_t j = i + 1; j < lcs.size(); ++j) {
                view.add_edge(lcs[i], lcs[j], sc_.links.at(LinkKind::LcWired).latency_s);
            }
        }
    }
    if (sc_.auto_infra_links) {
        for (size_t i = 0; i < infra.size(); ++i) {
            for (size_t j = i + 1; j < infra.size(); ++j) {
                double d = distance(positions_.at(infra[i]), positions_.at(infra[j]));
                if (d <= sc_.range_data_m) {
                    view.add_edge(infra[i], infra[j], sc_.links.at(LinkKind::Data).latency_s);
                }
            }
        }
    }
    for (const auto& link : sc_.infra_links) {
        view.add_edge(link.a, link.b, link.params.latency_s);
        ctrl.mark_declared_edge(link.a, link.b);
    }
}

void Engine::boot_switch(NodeId sw, SimTime now) {
    auto& rt = switches_.at(sw);
    Vec2 pos = positions_.at(sw);
    std::optional<NodeId> attachment = nearest_attachment(pos, sw);
    std::vector<NodeId> controllers;
    for (const auto& [id, ctrl] : controllers_) {
        (void)ctrl;
        controllers.push_back(id);
    }
    apply_switch_actions(sw, rt.node->start(pos, attachment, now, controllers));
}

// ---------------------------------------------------------------------------
// Event plumbing
// ---------------------------------------------------------------------------

void Engine::schedule(SimTime at, EventPayload payload) {
    if (at < now_) {
        throw InternalError("scheduling into the past: " + std::to_string(at) + " < " +
                            std::to_string(now_));
    }
    queue_.push(Event{at, next_event_seq_++, std::move(payload)});
}

void Engine::trace(const std::string& node, const std::string& event, json fields) {
    if (trace_writer_ == nullptr) return;
    TraceRecord record;
    record.t = now_;
    record.seq = next_trace_seq_++;
    record.node = node;
    record.event = event;
    record.fields = std::move(fields);
    trace_writer_->write(record);
}

RunResult Engine::run() {
    init_runtime();
    LOG_INFO("run " << sc_.name << " seed " << sc_.seed << ": " << sc_.n_patients()
                    << " patients, " << sc_.j_controllers() << " local controllers, "
                    << sc_.relays.size() << " relays, " << sc_.duration_s << " s");
    trace("sim", "run_meta",
          json{{"scenario", sc_.name},
               {"seed", sc_.seed},
               {"duration_s", sc_.duration_s},
               {"n_patients", sc_.n_patients()},
               {"j_controllers", sc_.j_controllers()},
               {"schema_version", 1}});

    // Fault plan first so simultaneous events keep scenario order.
    for (const auto& fault : sc_.fault_plan) {
        schedule(fault.at_s, EvFault{fault});
    }
    for (const auto& [id, rt] : controllers_) {
        (void)rt;
        schedule(0.0, EvHeartbeat{id, 0});
    }
    for (const auto& [id, rt] : switches_) {
        (void)rt;
        schedule(0.5 * sc_.timers.heartbeat_s, EvMaintenance{id, 0});
    }
    for (const auto& p : sc_.patients) {
        if (!p.mobility.waypoints.empty()) {
            schedule(sc_.timers.mobility_step_s, EvMobility{p.index, 1});
        }
    }
    for (const auto& [id, rt] : sensors_) {
        double first = rt.runtime.sample_time(0);
        if (first <= sc_.duration_s) {
            schedule(first, EvSensorSample{id, 0});
        }
    }
    for (const auto& [id, rt] : switches_) {
        (void)rt;
        boot_switch(id, 0.0);
    }

    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        if (ev.at < now_) {
            throw InternalError("event queue went backwards");
        }
        now_ = ev.at;
        dispatch(ev);
    }

    finish_run();
    return RunResult{counters_, now_};
}

void Engine::dispatch(const Event& ev) {
    std::visit(
        [&](const auto& payload) {
            using T = std::decay_t<decltype(payload)>;
            if constexpr (std::is_same_v<T, EvSensorSample>) {
                on_sensor_sample(payload);
            } else if constexpr (std::is_same_v<T, EvFrameArrival>) {
                on_frame_arrival(payload.frame);
            } else if constexpr (std::is_same_v<T, EvFrameLoss>) {
                on_frame_loss(payload);
            } else if constexpr (std::is_same_v<T, EvTxComplete>) {
                on_tx_complete(payload.node);
            } else if constexpr (std::is_same_v<T, EvMaintenance>) {
                on_maintenance(payload);
            } else if constexpr (std::is_same_v<T, EvHeartbeat>) {
                on_heartbeat(payload);
            } else if constexpr (std::is_same_v<T, EvMobility>) {
                on_mobility(payload);
            } else if constexpr (std::is_same_v<T, EvFault>) {
                on_fault(payload.action);
            }
        },
        ev.payload);
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

LinkKind Engine::control_link_kind(NodeId from, NodeId to) const {
    auto is_ctrl = [](NodeId n) {
        return n.kind == NodeKind::LocalController || n.kind == NodeKind::CentralController;
    };
    if (from.kind == NodeKind::Sensor && to.kind == NodeKind::Switch) return LinkKind::Body;
    if (from.kind == NodeKind::Switch && is_ctrl(to)) return LinkKind::Control;
    if (is_ctrl(from) && to.kind == NodeKind::Switch) return LinkKind::Control;
    if (is_ctrl(from) && is_ctrl(to)) return LinkKind::LcWired;
    throw InternalError("no control channel between " + to_string(from) + " and " + to_string(to));
}

double Engine::radio_range(LinkKind kind) const {
    switch (kind) {
    case LinkKind::Body: return sc_.range_body_m;
    case LinkKind::Data: return sc_.range_data_m;
    case LinkKind::Control: return sc_.range_control_m;
    default: return 0.0; // wired
    }
}

bool Engine::node_alive(NodeId id) const {
    switch (id.kind) {
    case NodeKind::Sensor: {
        auto it = sensors_.find(id);
        return it != sensors_.end() && it->second.alive;
    }
    case NodeKind::Switch: {
        auto it = switches_.find(id);
        return it != switches_.end() && it->second.alive;
    }
    case NodeKind::LocalController:
    case NodeKind::CentralController: {
        auto it = controllers_.find(id);
        return it != controllers_.end() && it->second.alive;
    }
    case NodeKind::Gateway:
    case NodeKind::Cloud:
        return true;
    }
    return false;
}

Vec2 Engine::node_position(NodeId id) const {
    return positions_.at(id);
}

Rng& Engine::link_rng(NodeId from, NodeId to) {
    auto key = std::make_pair(from, to);
    auto it = link_rngs_.find(key);
    if (it == link_rngs_.end()) {
        uint64_t seed =
            Rng::derive_seed(sc_.seed, "link/" + to_string(from) + ">" + to_string(to));
        it = link_rngs_.emplace(key, Rng(seed)).first;
    }
    return it->second;
}

const LinkParams& Engine::link_params(const Frame& frame) const {
    if (frame.is_data) {
        auto declared = declared_links_.find(std::minmax(frame.from, frame.to));
        if (declared != declared_links_.end()) {
            return declared->second.params;
        }
    }
    return sc_.links.at(frame.kind);
}

void Engine::transmit(Frame frame, SimTime start) {
    if (!node_alive(frame.from)) {
        return; // dead senders emit nothing
    }
    bool wired_override = false;
    if (frame.is_data) {
        auto declared = declared_links_.find(std::minmax(frame.from, frame.to));
        if (declared != declared_links_.end()) {
            wired_override = declared->second.wired;
        }
    }
    const LinkParams& params = link_params(frame);

    if (!node_alive(frame.to)) {
        schedule(start, EvFrameLoss{std::move(frame), "endpoint_dead"});
        return;
    }
    bool radio = frame.kind == LinkKind::Body || frame.kind == LinkKind::Data ||
                 frame.kind == LinkKind::Control;
    if (radio && !wired_override) {
        double d = distance(node_position(frame.from), node_position(frame.to));
        if (d > radio_range(frame.kind)) {
            schedule(start, EvFrameLoss{std::move(frame), "out_of_range"});
            return;
        }
    }

    double tx_time = static_cast<double>(frame.size_bits) / params.bandwidth_bps;
    double begin = start;
    bool self_clocked = frame.is_data && (frame.from.kind == NodeKind::Switch ||
                                          frame.from.kind == NodeKind::LocalController ||
                                          frame.from.kind == NodeKind::CentralController);
    if (!self_clocked) {
        auto key = std::make_pair(frame.from, frame.to);
        double& free_at = link_free_at_[key];
        begin = std::max(start, free_at);
        free_at = begin + tx_time;
    }

    bool lost = params.loss_prob > 0.0 &&
                link_rng(frame.from, frame.to).uniform01() < params.loss_prob;
    if (lost) {
        schedule(begin + tx_time, EvFrameLoss{std::move(frame), "loss"});
    } else {
        schedule(begin + tx_time + params.latency_s, EvFrameArrival{std::move(frame)});
    }
}

void Engine::send_control(const ControlMessage& msg) {
    NodeId from = msg.sender;
    NodeId to = msg.receiver;
    if (!node_alive(from)) {
        return;
    }
    // Sensors and switches pay transmit energy for control traffic too.
    Battery* battery = nullptr;
    if (from.kind == NodeKind::Sensor) {
        battery = &sensors_.at(from).runtime.battery();
    } else if (from.kind == NodeKind::Switch) {
        battery = &switches_.at(from).battery;
    }
    if (battery != nullptr) {
        auto spent = battery->spend(EnergySpend::Transmit);
        if (!spent.spent) {
            counters_.suppressed_sends += 1;
            trace(to_string(from), "send_suppressed", json{{"kind", "control"}});
            return;
        }
        battery_events(from, spent);
    }

    int bits = sc_.control_size_bits;
    std::string name = variant_name(msg);
    json fields{{"to", to_string(to)}, {"bits", bits}};
    std::string event;
    if (name == "packet_in") {
        event = "packet_in_sent";
        fields["key"] = to_json(std::get<PacketIn>(msg.payload).key);
        counters_.packet_ins += 1;
    } else if (name == "flow_mod") {
        event = "flow_mod_sent";
        const auto& entry = std::get<FlowMod>(msg.payload).entry;
        fields["key"] = to_json(entry.key);
        fields["action"] = to_string(entry.action);
        counters_.flow_mods += 1;
    } else if (name == "emergency_broadcast") {
        event = "emergency_broadcast";
        const auto& entry = std::get<EmergencyBroadcast>(msg.payload).entry;
        fields["key"] = to_json(entry.key);
        fields["action"] = to_string(entry.action);
        counters_.broadcasts += 1;
    } else if (name == "controller_heartbeat") {
        event = "heartbeat_sent";
        counters_.heartbeats += 1;
    } else if (name == "handover_notice") {
        event = "handover_notice";
        const auto& notice = std::get<HandoverNotice>(msg.payload);
        fields["attachment"] =
            notice.new_attachment ? json(to_string(*notice.new_attachment)) : json(nullptr);
        counters_.handovers += 1;
    } else {
        event = name + "_sent";
    }
    counters_.control_bytes += static_cast<uint64_t>(bits) / 8;
    trace(to_string(from), event, std::move(fields));

    Frame frame;
    frame.is_data = false;
    frame.msg = msg;
    frame.from = from;
    frame.to = to;
    frame.kind = control_link_kind(from, to);
    frame.size_bits = bits;
    transmit(std::move(frame), now_);
}

// ---------------------------------------------------------------------------
// Bookkeeping
// ---------------------------------------------------------------------------

void Engine::record_generated(const Packet& pkt) {
    auto [it, fresh] = ledger_.emplace(pkt.packet_id, PacketLedger{pkt.cls, false});
    (void)it;
    if (!fresh) {
        throw InternalError("duplicate packet id " + std::to_string(pkt.packet_id));
    }
    if (pkt.cls == TrafficClass::Emergency) {
        counters_.generated_emergency += 1;
    } else {
        counters_.generated_normal += 1;
    }
}

void Engine::record_terminal(const Packet& pkt, Terminal kind, const std::string& detail) {
    auto it = ledger_.find(pkt.packet_id);
    if (it == ledger_.end()) {
        throw InternalError("terminal event for unknown packet " + std::to_string(pkt.packet_id));
    }
    if (it->second.terminal) {
        throw InternalError("second terminal event (" + detail + ") for packet " +
                            std::to_string(pkt.packet_id));
    }
    it->second.terminal = true;
    if (kind == Terminal::Delivered) {
        if (pkt.cls == TrafficClass::Emergency) {
            counters_.delivered_emergency += 1;
        } else {
            counters_.delivered_normal += 1;
        }
    } else if (kind == Terminal::Lost) {
        counters_.lost_on_link += 1;
    }
}

void Engine::count_drop(DropReason reason) {
    switch (reason) {
    case DropReason::QueueOverflow: counters_.drop_queue_overflow += 1; break;
    case DropReason::MissBufferOverflow: counters_.drop_miss_buffer_overflow += 1; break;
    case DropReason::NoRoute: counters_.drop_no_route += 1; break;
    case DropReason::PacketInTimeout: counters_.drop_packet_in_timeout += 1; break;
    case DropReason::DeadBattery: counters_.drop_dead_battery += 1; break;
    }
}

void Engine::battery_events(NodeId owner, const Battery::SpendResult& result) {
    if (result.low_battery_now) {
        double remaining = 0.0;
        if (owner.kind == NodeKind::Sensor) {
            remaining = sensors_.at(owner).runtime.battery().remaining_j();
        } else {
            remaining = switches_.at(owner).battery.remaining_j();
        }
        trace(to_string(owner), "low_battery", json{{"remaining_j", remaining}});
        if (owner.kind == NodeKind::Switch) {
            apply_switch_actions(owner,
                                 switches_.at(owner).node->report_low_battery(remaining, now_));
        } else {
            ControlMessage msg;
            msg.payload = LowBattery{owner, remaining};
            msg.sender = owner;
            msg.receiver = sensors_.at(owner).runtime.model().parent_switch;
            msg.sent_at = now_;
            send_control(msg);
        }
    }
    if (result.died_now) {
        trace(to_string(owner), "node_dead", json::object());
        if (owner.kind == NodeKind::Switch) {
            pump_switch(owner); // drain the queue into dead-battery drops
        }
    }
}

// ---------------------------------------------------------------------------
// Handlers
// ---------------------------------------------------------------------------

void Engine::on_sensor_sample(const EvSensorSample& ev) {
    auto& rt = sensors_.at(ev.sensor);
    double next = rt.runtime.sample_time(ev.k + 1);
    if (next <= sc_.duration_s) {
        schedule(next, EvSensorSample{ev.sensor, ev.k + 1});
    }
    if (!rt.alive) {
        return;
    }
    auto sampled = rt.runtime.battery().spend(EnergySpend::Sample);
    if (!sampled.spent) {
        counters_.suppressed_sends += 1;
        trace(to_string(ev.sensor), "send_suppressed", json{{"kind", "sample"}});
        return;
    }
    battery_events(ev.sensor, sampled);

    const SensorModel& model = rt.runtime.model();
    PhysiologicalReading reading = rt.runtime.next_reading(now_);
    Packet pkt = new_packet(ev.sensor, model.parent_switch, model.app, reading, now_,
                            sc_.thresholds, sc_.packet_size_bits, next_packet_id_++);
    record_generated(pkt);
    trace(to_string(ev.sensor), "sample_emitted",
          json{{"app", to_string(model.app)},
               {"value", reading.value},
               {"class", to_string(pkt.cls)},
               {"packet_id", pkt.packet_id}});

    auto sent = rt.runtime.battery().spend(EnergySpend::Transmit);
    if (!sent.spent) {
        count_drop(DropReason::DeadBattery);
        record_terminal(pkt, Terminal::Dropped, "dead_battery");
        trace(to_string(ev.sensor), "drop",
              json{{"packet_id", pkt.packet_id},
                   {"class", to_string(pkt.cls)},
                   {"reason", to_string(DropReason::DeadBattery)}});
        return;
    }
    battery_events(ev.sensor, sent);

    Frame frame;
    frame.is_data = true;
    frame.pkt = std::move(pkt);
    frame.from = ev.sensor;
    frame.to = model.parent_switch;
    frame.kind = LinkKind::Body;
    frame.size_bits = frame.pkt.size_bits;
    transmit(std::move(frame), now_);
}

void Engine::on_frame_loss(const EvFrameLoss& ev) {
    json fields{{"from", to_string(ev.frame.from)},
                {"to", to_string(ev.frame.to)},
                {"reason", ev.reason},
                {"kind", ev.frame.is_data ? "data" : "control"},
                {"bits", ev.frame.size_bits}};
    if (ev.frame.is_data) {
        fields["packet_id"] = ev.frame.pkt.packet_id;
        fields["class"] = to_string(ev.frame.pkt.cls);
        record_terminal(ev.frame.pkt, Terminal::Lost, "frame_loss:" + ev.reason);
    }
    trace("link", "frame_loss", std::move(fields));
}

void Engine::on_frame_arrival(Frame frame) {
    if (!node_alive(frame.to)) {
        // Receiver died while the frame was in flight.
        on_frame_loss(EvFrameLoss{std::move(frame), "endpoint_dead"});
        return;
    }
    if (frame.is_data) {
        if (std::find(frame.pkt.hop_trace.begin(), frame.pkt.hop_trace.end(), frame.to) !=
            frame.pkt.hop_trace.end()) {
            // Transient forwarding loop from stale tables; terminate here.
            count_drop(DropReason::NoRoute);
            record_terminal(frame.pkt, Terminal::Dropped, "routing_loop");
            trace(to_string(frame.to), "drop",
                  json{{"packet_id", frame.pkt.packet_id},
                       {"class", to_string(frame.pkt.cls)},
                       {"reason", "routing_loop"}});
            return;
        }
        frame.pkt.hop_trace.push_back(frame.to);
        switch (frame.to.kind) {
        case NodeKind::Switch: data_arrival_at_switch(frame); return;
        case NodeKind::LocalController:
        case NodeKind::CentralController: data_arrival_at_controller(frame); return;
        case NodeKind::Gateway: data_arrival_at_gateway(frame); return;
        case NodeKind::Cloud: data_arrival_at_cloud(frame); return;
        default: break;
        }
        throw InternalError("data frame arrived at " + to_string(frame.to));
    }
    // Control plane.
    if (frame.to.kind == NodeKind::Switch) {
        auto& rt = switches_.at(frame.to);
        apply_switch_actions(frame.to, rt.node->handle_control(frame.msg, now_));
        return;
    }
    if (frame.to.kind == NodeKind::LocalController ||
        frame.to.kind == NodeKind::CentralController) {
        auto& rt = controllers_.at(frame.to);
        apply_controller_actions(frame.to, rt.node->handle_control(frame.msg, now_));
        return;
    }
    counters_.protocol_errors += 1;
    trace(to_string(frame.to), "protocol_error",
          json{{"what", "control message " + variant_name(frame.msg) + " at " +
                            to_string(frame.to)}});
}

void Engine::data_arrival_at_switch(Frame& frame) {
    bool from_own_sensor = frame.from.kind == NodeKind::Sensor;
    auto& rt = switches_.at(frame.to);
    apply_switch_actions(frame.to, rt.node->handle_data_packet(frame.pkt, from_own_sensor, now_));
}

void Engine::data_arrival_at_controller(Frame& frame) {
    auto& rt = controllers_.at(frame.to);
    std::optional<NodeId> next = rt.node->forward_next_hop(now_);
    if (!next) {
        count_drop(DropReason::NoRoute);
        record_terminal(frame.pkt, Terminal::Dropped, "no_route");
        trace(to_string(frame.to), "drop",
              json{{"packet_id", frame.pkt.packet_id},
                   {"class", to_string(frame.pkt.cls)},
                   {"reason", to_string(DropReason::NoRoute)}});
        return;
    }
    auto& q = frame.pkt.cls == TrafficClass::Emergency ? rt.q_emergency : rt.q_normal;
    if (static_cast<int>(q.size()) >= sc_.class_queue_capacity) {
        count_drop(DropReason::QueueOverflow);
        record_terminal(frame.pkt, Terminal::Dropped, "queue_overflow");
        trace(to_string(frame.to), "drop",
              json{{"packet_id", frame.pkt.packet_id},
                   {"class", to_string(frame.pkt.cls)},
                   {"reason", to_string(DropReason::QueueOverflow)}});
        return;
    }
    q.push_back(QueuedPacket{frame.pkt, *next});
    trace(to_string(frame.to), "enqueue",
          json{{"packet_id", frame.pkt.packet_id},
               {"class", to_string(frame.pkt.cls)},
               {"next_hop", to_string(*next)}});
    pump_controller(frame.to);
}

void Engine::data_arrival_at_gateway(Frame& frame) {
    Frame out;
    out.is_data = true;
    out.pkt = std::move(frame.pkt);
    out.from = Scenario::gateway_id();
    out.to = Scenario::cloud_id();
    out.kind = LinkKind::Backhaul;
    out.size_bits = out.pkt.size_bits;
    transmit(std::move(out), now_);
}

void Engine::data_arrival_at_cloud(Frame& frame) {
    const Packet& pkt = frame.pkt;
    record_terminal(pkt, Terminal::Delivered, "delivered");
    json hops = json::array();
    for (NodeId hop : pkt.hop_trace) hops.push_back(to_string(hop));
    trace(to_string(Scenario::cloud_id()), "cloud_arrival",
          json{{"packet_id", pkt.packet_id},
               {"class", to_string(pkt.cls)},
               {"app", to_string(pkt.app)},
               {"created_at", pkt.created_at},
               {"latency_s", now_ - pkt.created_at},
               {"hops", hops}});
}

void Engine::on_tx_complete(NodeId node) {
    if (node.kind == NodeKind::Switch) {
        switches_.at(node).tx_busy = false;
        pump_switch(node);
    } else {
        controllers_.at(node).tx_busy = false;
        pump_controller(node);
    }
}

void Engine::pump_switch(NodeId sw) {
    auto& rt = switches_.at(sw);
    if (!rt.alive || rt.tx_busy) {
        return;
    }
    while (auto qp = rt.node->dequeue_next()) {
        trace(to_string(sw), "dequeue",
              json{{"packet_id", qp->pkt.packet_id},
                   {"class", to_string(qp->pkt.cls)},
                   {"next_hop", to_string(qp->next_hop)}});
        auto spent = rt.battery.spend(EnergySpend::Transmit);
        if (!spent.spent) {
            count_drop(DropReason::DeadBattery);
            record_terminal(qp->pkt, Terminal::Dropped, "dead_battery");
            trace(to_string(sw), "drop",
                  json{{"packet_id", qp->pkt.packet_id},
                       {"class", to_string(qp->pkt.cls)},
                       {"reason", to_string(DropReason::DeadBattery)}});
            continue; // drain the rest as well
        }
        battery_events(sw, spent);

        Frame frame;
        frame.is_data = true;
        frame.pkt = qp->pkt;
        frame.from = sw;
        frame.to = qp->next_hop;
        frame.kind = LinkKind::Data;
        frame.size_bits = qp->pkt.size_bits;
        const LinkParams& params = link_params(frame);
        double tx_time = static_cast<double>(frame.size_bits) / params.bandwidth_bps;
        rt.tx_busy = true;
        schedule(now_ + tx_time, EvTxComplete{sw});
        transmit(std::move(frame), now_);
        break;
    }
}

void Engine::pump_controller(NodeId ctrl) {
    auto& rt = controllers_.at(ctrl);
    if (!rt.alive || rt.tx_busy) {
        return;
    }
    QueuedPacket qp;
    if (!rt.q_emergency.empty()) {
        qp = rt.q_emergency.front();
        rt.q_emergency.pop_front();
    } else if (!rt.q_normal.empty()) {
        qp = rt.q_normal.front();
        rt.q_normal.pop_front();
    } else {
        return;
    }
    trace(to_string(ctrl), "dequeue",
          json{{"packet_id", qp.pkt.packet_id},
               {"class", to_string(qp.pkt.cls)},
               {"next_hop", to_string(qp.next_hop)}});
    Frame frame;
    frame.is_data = true;
    frame.pkt = qp.pkt;
    frame.from = ctrl;
    frame.to = qp.next_hop;
    frame.kind = LinkKind::Data;
    frame.size_bits = qp.pkt.size_bits;
    const LinkParams& params = link_params(frame);
    double tx_time = static_cast<double>(frame.size_bits) / params.bandwidth_bps;
    rt.tx_busy = true;
    schedule(now_ + tx_time, EvTxComplete{ctrl});
    transmit(std::move(frame), now_);
}

void Engine::apply_switch_actions(NodeId sw, const SwitchActions& actions) {
    for (const auto& action : actions) {
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, SendControlAction>) {
                    send_control(a.msg);
                } else if constexpr (std::is_same_v<T, EnqueuedAction>) {
                    trace(to_string(sw), "enqueue",
                          json{{"packet_id", a.packet_id},
                               {"class", to_string(a.cls)},
                               {"next_hop", to_string(a.next_hop)}});
                } else if constexpr (std::is_same_v<T, DroppedPacketAction>) {
                    count_drop(a.reason);
                    record_terminal(a.pkt, Terminal::Dropped, to_string(a.reason));
                    trace(to_string(sw), "drop",
                          json{{"packet_id", a.pkt.packet_id},
                               {"class", to_string(a.pkt.cls)},
                               {"reason", to_string(a.reason)}});
                } else if constexpr (std::is_same_v<T, FlowInstalledAction>) {
                    trace(to_string(sw), "flow_mod_applied",
                          json{{"key", to_json(a.entry.key)},
                               {"action", to_string(a.entry.action)},
                               {"priority", a.entry.priority},
                               {"via_broadcast", a.via_broadcast}});
                } else if constexpr (std::is_same_v<T, AssociationChangedAction>) {
                    trace(to_string(sw), "association_changed",
                          json{{"from", a.from ? json(to_string(*a.from)) : json(nullptr)},
                               {"to", a.to ? json(to_string(*a.to)) : json(nullptr)},
                               {"cause", a.cause}});
                    if (a.cause == "failover" && a.to.has_value()) {
                        counters_.failovers += 1;
                    }
                } else if constexpr (std::is_same_v<T, ProtocolErrorAction>) {
                    counters_.protocol_errors += 1;
                    LOG_WARN("protocol error at " << to_string(sw) << ": " << a.what);
                    trace(to_string(sw), "protocol_error", json{{"what", a.what}});
                }
            },
            action);
    }
    pump_switch(sw);
}

void Engine::apply_controller_actions(NodeId ctrl, const ControllerActions& actions) {
    for (const auto& action : actions) {
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, CtrlSendAction>) {
                    send_control(a.msg);
                } else if constexpr (std::is_same_v<T, NodeExcludedAction>) {
                    trace(to_string(ctrl), "node_excluded",
                          json{{"excluded", to_string(a.node)}});
                } else if constexpr (std::is_same_v<T, RoutedUnreachableAction>) {
                    trace(to_string(ctrl), "routed_unreachable",
                          json{{"switch", to_string(a.sw)}, {"key", to_json(a.key)}});
                } else if constexpr (std::is_same_v<T, HandoverAppliedAction>) {
                    trace(to_string(ctrl), "handover_applied",
                          json{{"switch", to_string(a.sw)}, {"flows_changed", a.flows_changed}});
                } else if constexpr (std::is_same_v<T, TakeoverAction>) {
                    json adopted = json::array();
                    for (NodeId sw : a.expected_switches) adopted.push_back(to_string(sw));
                    trace(to_string(ctrl), "takeover",
                          json{{"failed", to_string(a.failed_controller)},
                               {"expected_switches", adopted}});
                } else if constexpr (std::is_same_v<T, CtrlProtocolErrorAction>) {
                    counters_.protocol_errors += 1;
                    LOG_WARN("protocol error at " << to_string(ctrl) << ": " << a.what);
                    trace(to_string(ctrl), "protocol_error", json{{"what", a.what}});
                }
            },
            action);
    }
}

void Engine::on_maintenance(const EvMaintenance& ev) {
    double next = (static_cast<double>(ev.k) + 1.5) * sc_.timers.heartbeat_s;
    if (next <= sc_.duration_s) {
        schedule(next, EvMaintenance{ev.sw, ev.k + 1});
    }
    auto& rt = switches_.at(ev.sw);
    if (!rt.alive) {
        return;
    }
    apply_switch_actions(ev.sw, rt.node->on_maintenance(now_));
}

void Engine::on_heartbeat(const EvHeartbeat& ev) {
    double next = (static_cast<double>(ev.tick) + 1.0) * sc_.timers.heartbeat_s;
    if (next <= sc_.duration_s) {
        schedule(next, EvHeartbeat{ev.controller, ev.tick + 1});
    }
    auto& rt = controllers_.at(ev.controller);
    if (!rt.alive) {
        return;
    }
    apply_controller_actions(ev.controller, rt.node->on_heartbeat_tick(ev.tick, now_));
}

void Engine::on_mobility(const EvMobility& ev) {
    double next = (static_cast<double>(ev.k) + 1.0) * sc_.timers.mobility_step_s;
    if (next <= sc_.duration_s) {
        schedule(next, EvMobility{ev.patient, ev.k + 1});
    }
    const PatientSpec& patient = sc_.patients.at(ev.patient);
    Vec2 pos = patient.mobility.position_at(patient.position, now_);
    NodeId sw = patient.switch_id();
    positions_[sw] = pos;
    for (const auto& model : patient.sensors) {
        positions_[model.id] = pos;
    }
    auto& rt = switches_.at(sw);
    if (!rt.alive) {
        return;
    }
    std::optional<NodeId> current = rt.node->attachment();
    std::optional<NodeId> nearest = nearest_attachment(pos, sw);
    if (nearest != current) {
        apply_switch_actions(sw, rt.node->on_attachment_changed(nearest, pos, now_));
    }
}

std::optional<NodeId> Engine::nearest_attachment(Vec2 pos, NodeId self) const {
    std::optional<NodeId> best;
    double best_dist = 0.0;
    auto consider = [&](NodeId id) {
        if (id == self) {
            return; // a relay never attaches to itself
        }
        double d = distance(pos, positions_.at(id));
        if (d > sc_.range_data_m) {
            return;
        }
        if (!best || d < best_dist) {
            best = id;
            best_dist = d;
        }
    };
    for (const auto& r : sc_.relays) consider(r.id);
    if (sc_.lcs_forward_data) {
        for (NodeId lc : sc_.local_controllers()) consider(lc);
    }
    consider(Scenario::gateway_id());
    return best;
}

void Engine::on_fault(const FaultAction& action) {
    LOG_DEBUG("fault at t=" << now_ << ": node " << to_string(action.node));
    switch (action.kind) {
    case FaultAction::Kind::Crash: {
        if (action.node.kind == NodeKind::Sensor) {
            sensors_.at(action.node).alive = false;
        } else if (action.node.kind == NodeKind::Switch) {
            auto& rt = switches_.at(action.node);
            rt.alive = false;
            rt.tx_busy = false;
            // Volatile state is gone with the device; account for it.
            auto drop_all = [&](const Packet& pkt) {
                counters_.drop_node_crash += 1;
                record_terminal(pkt, Terminal::Dropped, "node_crash");
                trace(to_string(action.node), "drop",
                      json{{"packet_id", pkt.packet_id},
                           {"class", to_string(pkt.cls)},
                           {"reason", "node_crash"}});
            };
            while (auto qp = rt.node->dequeue_next()) drop_all(qp->pkt);
            for (const auto& [key, packets] : rt.node->miss_buffer()) {
                (void)key;
                for (const Packet& pkt : packets) drop_all(pkt);
            }
        } else {
            auto& rt = controllers_.at(action.node);
            rt.alive = false;
            rt.tx_busy = false;
            auto drop_all = [&](const QueuedPacket& qp) {
                counters_.drop_node_crash += 1;
                record_terminal(qp.pkt, Terminal::Dropped, "node_crash");
                trace(to_string(action.node), "drop",
                      json{{"packet_id", qp.pkt.packet_id},
                           {"class", to_string(qp.pkt.cls)},
                           {"reason", "node_crash"}});
            };
            for (const auto& qp : rt.q_emergency) drop_all(qp);
            for (const auto& qp : rt.q_normal) drop_all(qp);
            rt.q_emergency.clear();
            rt.q_normal.clear();
        }
        trace(to_string(action.node), "node_crash", json::object());
        break;
    }
    case FaultAction::Kind::Recover: {
        trace(to_string(action.node), "node_recover", json::object());
        if (action.node.kind == NodeKind::Sensor) {
            sensors_.at(action.node).alive = true;
        } else if (action.node.kind == NodeKind::Switch) {
            auto& rt = switches_.at(action.node);
            std::optional<int> patient =
                rt.is_relay ? std::nullopt : std::optional<int>(rt.node->patient());
            rt.node = std::make_unique<SwitchNode>(action.node, patient, sc_.switch_params(),
                                                   sc_.lc_preference.at(action.node),
                                                   sc_.central_controller());
            rt.alive = true;
            boot_switch(action.node, now_);
        } else {
            auto& rt = controllers_.at(action.node);
            std::vector<NodeId> peers;
            for (const auto& c : sc_.controllers) {
                if (c.id != action.node) peers.push_back(c.id);
            }
            rt.node = std::make_unique<ControllerNode>(action.node, rt.spec.role,
                                                       sc_.controller_params(),
                                                       Scenario::gateway_id(),
                                                       sc_.all_switch_ids(), peers);
            seed_controller_view(*rt.node);
            rt.alive = true;
        }
        break;
    }
    case FaultAction::Kind::SetBattery: {
        trace(to_string(action.node), "set_battery", json{{"joules", action.joules}});
        Battery* battery = nullptr;
        if (action.node.kind == NodeKind::Sensor) {
            battery = &sensors_.at(action.node).runtime.battery();
        } else {
            battery = &switches_.at(action.node).battery;
        }
        battery_events(action.node, battery->set_remaining(action.joules));
        break;
    }
    }
}

// ---------------------------------------------------------------------------
// End of run
// ---------------------------------------------------------------------------

void Engine::finish_run() {
    // Whatever still sits in queues or buffers is the in-flight residue; the
    // drain loop guarantees nothing is left on the wire itself.
    uint64_t residual = 0;
    auto note_residual = [&](const Packet& pkt) {
        auto it = ledger_.find(pkt.packet_id);
        if (it == ledger_.end() || it->second.terminal) {
            throw InternalError("residual packet " + std::to_string(pkt.packet_id) +
                                " has inconsistent ledger state");
        }
        it->second.terminal = true;
        residual += 1;
    };
    for (const auto& [id, rt] : switches_) {
        json entries = json::array();
        for (const auto& entry : rt.node->table().entries()) {
            entries.push_back(to_json(entry));
        }
        trace(to_string(id), "flow_table_snapshot",
              json{{"entries", entries}, {"alive", rt.alive}});
        for (const auto& qp : rt.node->queued(TrafficClass::Emergency)) note_residual(qp.pkt);
        for (const auto& qp : rt.node->queued(TrafficClass::Normal)) note_residual(qp.pkt);
        for (const auto& [key, packets] : rt.node->miss_buffer()) {
            (void)key;
            for (const Packet& pkt : packets) note_residual(pkt);
        }
    }
    for (const auto& [id, rt] : controllers_) {
        (void)id;
        for (const auto& qp : rt.q_emergency) note_residual(qp.pkt);
        for (const auto& qp : rt.q_normal) note_residual(qp.pkt);
    }
    counters_.residual_end = residual;

    for (const auto& [id, rt] : ledger_) {
        if (!rt.terminal) {
            throw InternalError("packet " + std::to_string(id) +
                                " vanished without a terminal event");
        }
    }

    for (const auto& [id, rt] : sensors_) {
        trace(to_string(id), "energy_final",
              json{{"consumed_j", rt.runtime.battery().consumed_j()},
                   {"remaining_j", rt.runtime.battery().remaining_j()},
                   {"dead", rt.runtime.battery().dead()}});
    }
    for (const auto& [id, rt] : switches_) {
        trace(to_string(id), "energy_final",
              json{{"consumed_j", rt.battery.consumed_j()},
                   {"remaining_j", rt.battery.remaining_j()},
                   {"dead", rt.battery.dead()}});
    }

    uint64_t accounted = counters_.delivered() + counters_.lost_on_link + counters_.dropped() +
                         counters_.residual_end;
    if (counters_.generated() != accounted) {
        throw InternalError("conservation violated: generated " +
                            std::to_string(counters_.generated()) + " != accounted " +
                            std::to_string(accounted));
    }

    trace("sim", "run_summary",
          json{{"generated_normal", counters_.generated_normal},
               {"generated_emergency", counters_.generated_emergency},
               {"delivered_normal", counters_.delivered_normal},
               {"delivered_emergency", counters_.delivered_emergency},
               {"lost_on_link", counters_.lost_on_link},
               {"drop_queue_overflow", counters_.drop_queue_overflow},
               {"drop_miss_buffer_overflow", counters_.drop_miss_buffer_overflow},
               {"drop_no_route", counters_.drop_no_route},
               {"drop_packet_in_timeout", counters_.drop_packet_in_timeout},
               {"drop_dead_battery", counters_.drop_dead_battery},
               {"drop_node_crash", counters_.drop_node_crash},
               {"suppressed_sends", counters_.suppressed_sends},
               {"packet_ins", counters_.packet_ins},
               {"flow_mods", counters_.flow_mods},
               {"broadcasts", counters_.broadcasts},
               {"heartbeats", counters_.heartbeats},
               {"control_bytes", counters_.control_bytes},
               {"handovers", counters_.handovers},
               {"failovers", counters_.failovers},
               {"protocol_errors", counters_.protocol_errors},
               {"residual_end", counters_.residual_end}});
    trace("sim", "run_end", json{{"t_end", now_}});
    LOG_INFO("run " << sc_.name << " seed " << sc_.seed << " done at t=" << now_ << ": "
                    << counters_.generated() << " generated, " << counters_.delivered()
                    << " delivered, " << counters_.dropped() << " dropped, "
                    << counters_.lost_on_link << " lost, " << counters_.residual_end
                    << " residual");
}

const SwitchNode& Engine::switch_node(NodeId id) const {
    return *switches_.at(id).node;
}

const ControllerNode* Engine::controller_node(NodeId id) const {
    auto it = controllers_.find(id);
    if (it == controllers_.end() || !it->second.alive) {
        return nullptr;
    }
    return it->second.node.get();
}

} // namespace sdwban
