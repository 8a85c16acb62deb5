/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/messages.hpp"

namespace sdwban {

using nlohmann::json;

namespace {

json vec2_to_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec2_from_json(const json& j) { return Vec2{j.at(0).get<double>(), j.at(1).get<double>()}; }

// Infinity is not representable in JSON; spell it out.
json timeout_to_json(double t) {
    if (std::isinf(t)) return "inf";
    return t;
}

double timeout_from_json(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return kInfiniteTimeout;
    return j.get<double>();
}

json snapshot_to_json(const RegistrySnapshot& snap) {
    json arr = json::array();
    for (const auto& [node, entry] : snap) {
        arr.push_back(json{{"switch", to_string(node)},
                           {"patient", entry.patient},
                           {"since", entry.associated_since},
                           {"position", vec2_to_json(entry.position)}});
    }
    return arr;
}

RegistrySnapshot snapshot_from_json(const json& j) {
    RegistrySnapshot snap;
    for (const auto& item : j) {
        RegistryEntry entry;
        entry.patient = item.at("patient").get<int>();
        entry.associated_since = item.at("since").get<double>();
        entry.position = vec2_from_json(item.at("position"));
        snap[parse_node_id(item.at("switch").get<std::string>())] = entry;
    }
    return snap;
}

} // namespace

std::string variant_name(const ControlMessage& msg) {
    struct Namer {
        std::string operator()(const Hello&) { return "hello"; }
        std::string operator()(const Associate&) { return "associate"; }
        std::string operator()(const AssociateAck&) { return "associate_ack"; }
        std::string operator()(const PacketIn&) { return "packet_in"; }
        std::string operator()(const FlowMod&) { return "flow_mod"; }
        std::string operator()(const EmergencyBroadcast&) { return "emergency_broadcast"; }
        std::string operator()(const LowBattery&) { return "low_battery"; }
        std::string operator()(const HandoverNotice&) { return "handover_notice"; }
        std::string operator()(const ControllerHeartbeat&) { return "controller_heartbeat"; }
    };
    return std::visit(Namer{}, msg.payload);
}

json to_json(const FlowKey& key) {
    return json{{"switch", to_string(key.src_switch)},
                {"app", key.app ? json(to_string(*key.app)) : json("*")},
                {"class", to_string(key.cls)}};
}

FlowKey flow_key_from_json(const json& j) {
    FlowKey key;
    key.src_switch = parse_node_id(j.at("switch").get<std::string>());
    std::string app = j.at("app").get<std::string>();
    key.app = (app == "*") ? std::nullopt : std::optional<AppKind>(parse_app_kind(app));
    key.cls = parse_traffic_class(j.at("class").get<std::string>());
    return key;
}

json to_json(const FlowEntry& entry) {
    json j{{"key", to_json(entry.key)},
           {"priority", entry.priority},
           {"idle_timeout_s", timeout_to_json(entry.idle_timeout_s)},
           {"installed_at", entry.installed_at},
           {"last_matched_at", entry.last_matched_at},
           {"match_count", entry.match_count}};
    if (entry.action.kind == ActionKind::ForwardTo) {
        j["action"] = "forward";
        j["next_hop"] = to_string(*entry.action.next_hop);
    } else {
        j["action"] = "drop";
    }
    return j;
}

FlowEntry flow_entry_from_json(const json& j) {
    FlowEntry entry;
    entry.key = flow_key_from_json(j.at("key"));
    if (j.at("action").get<std::string>() == "forward") {
        entry.action = FlowAction::forward_to(parse_node_id(j.at("next_hop").get<std::string>()));
    } else {
        entry.action = FlowAction::drop();
    }
    entry.priority = j.at("priority").get<int>();
    entry.idle_timeout_s = timeout_from_json(j.at("idle_timeout_s"));
    entry.installed_at = j.at("installed_at").get<double>();
    entry.last_matched_at = j.at("last_matched_at").get<double>();
    entry.match_count = j.at("match_count").get<uint64_t>();
    return entry;
}

json to_json(const Packet& pkt) {
    json hops = json::array();
    for (NodeId hop : pkt.hop_trace) {
        hops.push_back(to_string(hop));
    }
    return json{{"packet_id", pkt.packet_id},
                {"src_sensor", to_string(pkt.src_sensor)},
                {"src_switch", to_string(pkt.src_switch)},
                {"app", to_string(pkt.app)},
                {"class", to_string(pkt.cls)},
                {"value", pkt.reading.value},
                {"sampled_at", pkt.reading.sampled_at},
                {"created_at", pkt.created_at},
                {"size_bits", pkt.size_bits},
                {"hops", hops}};
}

Packet packet_from_json(const json& j) {
    Packet pkt;
    pkt.packet_id = j.at("packet_id").get<uint64_t>();
    pkt.src_sensor = parse_node_id(j.at("src_sensor").get<std::string>());
    pkt.src_switch = parse_node_id(j.at("src_switch").get<std::string>());
    pkt.app = parse_app_kind(j.at("app").get<std::string>());
    pkt.cls = parse_traffic_class(j.at("class").get<std::string>());
    pkt.reading.app = pkt.app;
    pkt.reading.value = j.at("value").get<double>();
    pkt.reading.sampled_at = j.at("sampled_at").get<double>();
    pkt.created_at = j.at("created_at").get<double>();
    pkt.size_bits = j.at("size_bits").get<int>();
    for (const auto& hop : j.at("hops")) {
        pkt.hop_trace.push_back(parse_node_id(hop.get<std::string>()));
    }
    return pkt;
}

namespace {

struct PayloadEncoder {
    json operator()(const Hello& p) {
        json j{{"patient", p.patient}, {"position", vec2_to_json(p.position)}};
        if (p.attachment) j["attachment"] = to_string(*p.attachment);
        return j;
    }
    json operator()(const Associate& p) {
        json j{{"patient", p.patient}, {"position", vec2_to_json(p.position)}};
        if (p.attachment) j["attachment"] = to_string(*p.attachment);
        return j;
    }
    json operator()(const AssociateAck& p) {
        return json{{"emergency_entry", to_json(p.emergency_entry)}};
    }
    json operator()(const PacketIn& p) {
        return json{{"key", to_json(p.key)}, {"trigger", to_json(p.trigger)}};
    }
    json operator()(const FlowMod& p) { return json{{"entry", to_json(p.entry)}}; }
    json operator()(const EmergencyBroadcast& p) { return json{{"entry", to_json(p.entry)}}; }
    json operator()(const LowBattery& p) {
        return json{{"node", to_string(p.node)}, {"battery_j", p.battery_j}};
    }
    json operator()(const HandoverNotice& p) {
        json j{{"position", vec2_to_json(p.position)}};
        if (p.new_attachment) j["attachment"] = to_string(*p.new_attachment);
        return j;
    }
    json operator()(const ControllerHeartbeat& p) {
        json j{{"tick", p.tick}};
        if (p.registry) j["registry"] = snapshot_to_json(*p.registry);
        return j;
    }
};

std::optional<NodeId> opt_node(const json& j, const char* field) {
    if (!j.contains(field)) return std::nullopt;
    return parse_node_id(j.at(field).get<std::string>());
}

ControlPayload decode_payload(const std::string& type, const json& j) {
    if (type == "hello") {
        return Hello{j.at("patient").get<int>(), vec2_from_json(j.at("position")),
                     opt_node(j, "attachment")};
    }
    if (type == "associate") {
        return Associate{j.at("patient").get<int>(), vec2_from_json(j.at("position")),
                         opt_node(j, "attachment")};
    }
    if (type == "associate_ack") {
        return AssociateAck{flow_entry_from_json(j.at("emergency_entry"))};
    }
    if (type == "packet_in") {
        return PacketIn{flow_key_from_json(j.at("key")), packet_from_json(j.at("trigger"))};
    }
    if (type == "flow_mod") {
        return FlowMod{flow_entry_from_json(j.at("entry"))};
    }
    if (type == "emergency_broadcast") {
        return EmergencyBroadcast{flow_entry_from_json(j.at("entry"))};
    }
    if (type == "low_battery") {
        return LowBattery{parse_node_id(j.at("node").get<std::string>()),
                          j.at("battery_j").get<double>()};
    }
    if (type == "handover_notice") {
        return HandoverNotice{opt_node(j, "attachment"), vec2_from_json(j.at("position"))};
    }
    if (type == "controller_heartbeat") {
        ControllerHeartbeat hb;
        hb.tick = j.at("tick").get<uint64_t>();
        if (j.contains("registry")) hb.registry = snapshot_from_json(j.at("registry"));
        return hb;
    }
    throw ConfigError("unknown control message type '" + type + "'");
}

} // namespace

json encode(const ControlMessage& msg) {
    return json{{"type", variant_name(msg)},
                {"sender", to_string(msg.sender)},
                {"receiver", to_string(msg.receiver)},
                {"sent_at", msg.sent_at},
                {"payload", std::visit(PayloadEncoder{}, msg.payload)}};
}

ControlMessage decode_control_message(const json& j) {
    ControlMessage msg;
    msg.sender = parse_node_id(j.at("sender").get<std::string>());
    msg.receiver = parse_node_id(j.at("receiver").get<std::string>());
    msg.sent_at = j.at("sent_at").get<double>();
    msg.payload = decode_payload(j.at("type").get<std::string>(), j.at("payload"));
    return msg;
}

} // namespace sdwban
