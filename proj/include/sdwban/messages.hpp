/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_MESSAGES_HPP
#define SDWBAN_MESSAGES_HPP

#include "sdwban/core.hpp"
#include "sdwban/flow_table.hpp"

#include <json.hpp>
#include <variant>

namespace sdwban {

// Registry state replicated between controllers on every heartbeat. The wired
// LC interconnect is reliable, so a plain snapshot is enough; no consensus.
struct RegistryEntry {
    int patient{-1};
    SimTime associated_since{0.0};
    Vec2 position;

    bool operator==(const RegistryEntry&) const = default;
};

using RegistrySnapshot = std::map<NodeId, RegistryEntry>;

// --- payloads ---------------------------------------------------------------

// Switch presence announcement, sent at boot to every controller in range.
struct Hello {
    int patient{-1};
    Vec2 position;
    std::optional<NodeId> attachment;

    bool operator==(const Hello&) const = default;
};

// Association request to one specific controller.
struct Associate {
    int patient{-1};
    Vec2 position;
    std::optional<NodeId> attachment;

    bool operator==(const Associate&) const = default;
};

// Acceptance; carries the pre-installed Emergency wildcard rule.
struct AssociateAck {
    FlowEntry emergency_entry;

    bool operator==(const AssociateAck&) const = default;
};

// Table-miss escalation. Carries the full header and reading of the first
// missing packet; the packet body stays buffered at the switch.
struct PacketIn {
    FlowKey key;
    Packet trigger;

    bool operator==(const PacketIn&) const = default;
};

struct FlowMod {
    FlowEntry entry;

    bool operator==(const FlowMod&) const = default;
};

// Emergency rule push to one registered switch (one message per receiver).
struct EmergencyBroadcast {
    FlowEntry entry;

    bool operator==(const EmergencyBroadcast&) const = default;
};

struct LowBattery {
    NodeId node;
    double battery_j{0.0};

    bool operator==(const LowBattery&) const = default;
};

struct HandoverNotice {
    std::optional<NodeId> new_attachment;
    Vec2 position;

    bool operator==(const HandoverNotice&) const = default;
};

struct ControllerHeartbeat {
    uint64_t tick{0};
    // Present only on the wired controller-to-controller copies.
    std::optional<RegistrySnapshot> registry;

    bool operator==(const ControllerHeartbeat&) const = default;
};

using ControlPayload = std::variant<Hello, Associate, AssociateAck, PacketIn, FlowMod,
                                    EmergencyBroadcast, LowBattery, HandoverNotice,
                                    ControllerHeartbeat>;

struct ControlMessage {
    ControlPayload payload;
    NodeId sender;
    NodeId receiver;
    SimTime sent_at{0.0};

    bool operator==(const ControlMessage&) const = default;
};

// Variant tag as it appears on the wire / in traces: "packet_in", "flow_mod"...
std::string variant_name(const ControlMessage& msg);

// --- serialization ----------------------------------------------------------
// Lossless round-trip: decode(encode(m)) == m for every variant.

nlohmann::json encode(const ControlMessage& msg);
ControlMessage decode_control_message(const nlohmann::json& j);

nlohmann::json to_json(const Packet& pkt);
Packet packet_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FlowEntry& entry);
FlowEntry flow_entry_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FlowKey& key);
FlowKey flow_key_from_json(const nlohmann::json& j);

} // namespace sdwban

#endif // SDWBAN_MESSAGES_HPP
