/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/flow_table.hpp"

#include <algorithm>

namespace sdwban {

std::string to_string(const FlowAction& action) {
    if (action.kind == ActionKind::ForwardTo) {
        return "forward_to:" + to_string(*action.next_hop);
    }
    return "drop";
}

bool FlowTable::key_matches(const FlowKey& entry_key, const FlowKey& key) {
    if (entry_key.src_switch != key.src_switch) {
        return false;
    }
    if (entry_key.cls != key.cls) {
        return false;
    }
    if (entry_key.is_wildcard()) {
        // Wildcard app is only meaningful for Emergency entries.
        return entry_key.cls == TrafficClass::Emergency;
    }
    return entry_key.app == key.app;
}

MatchResult FlowTable::lookup(const FlowKey& key, SimTime now) {
    if (key.src_switch != owner_) {
        throw ContractViolation("lookup for key " + to_string(key) + " on table owned by " +
                                to_string(owner_));
    }
    FlowEntry* best = nullptr;
    for (auto& entry : entries_) {
        if (entry.expired(now) || !key_matches(entry.key, key)) {
            continue;
        }
        if (best == nullptr || entry.priority > best->priority ||
            (entry.priority == best->priority && best->key.is_wildcard() &&
             !entry.key.is_wildcard())) {
            // Equal priority can only pair a wildcard with an exact entry;
            // prefer the exact one so the result stays deterministic.
            best = &entry;
        }
    }
    if (best == nullptr) {
        return MatchResult::miss();
    }
    best->last_matched_at = now;
    best->match_count += 1;
    return MatchResult{MatchResult::Kind::Hit, *best};
}

void FlowTable::install(FlowEntry entry, SimTime now) {
    if (entry.key.src_switch != owner_) {
        throw ContractViolation("install of entry " + to_string(entry.key) +
                                " on table owned by " + to_string(owner_));
    }
    if (entry.key.is_wildcard() && entry.key.cls != TrafficClass::Emergency) {
        throw InvariantError("wildcard app is only allowed for Emergency keys");
    }
    // Emergency entries must strictly outrank every Normal entry (and vice
    // versa), otherwise the wildcard-vs-exact overlap would be ambiguous.
    for (const auto& existing : entries_) {
        if (entry.key.cls == TrafficClass::Emergency &&
            existing.key.cls == TrafficClass::Normal && entry.priority <= existing.priority) {
            throw InvariantError("emergency entry priority " + std::to_string(entry.priority) +
                                 " must exceed normal entry priority " +
                                 std::to_string(existing.priority));
        }
        if (entry.key.cls == TrafficClass::Normal &&
            existing.key.cls == TrafficClass::Emergency && entry.priority >= existing.priority) {
            throw InvariantError("normal entry priority " + std::to_string(entry.priority) +
                                 " must stay below emergency entry priority " +
                                 std::to_string(existing.priority));
        }
    }
    entry.installed_at = now;
    entry.last_matched_at = now;
    entry.match_count = 0;
    auto same_slot = [&](const FlowEntry& e) {
        return e.key == entry.key && e.priority == entry.priority;
    };
    auto it = std::find_if(entries_.begin(), entries_.end(), same_slot);
    if (it != entries_.end()) {
        *it = entry;
    } else {
        if (capacity_ > 0 && entries_.size() >= capacity_) {
            throw TableFullError("table at " + to_string(owner_) + " is full (" +
                                 std::to_string(capacity_) + " entries), new install rejected");
        }
        entries_.push_back(entry);
    }
}

std::vector<FlowEntry> FlowTable::purge_expired(SimTime now) {
    std::vector<FlowEntry> removed;
    auto it = std::stable_partition(entries_.begin(), entries_.end(),
                                    [&](const FlowEntry& e) { return !e.expired(now); });
    removed.assign(it, entries_.end());
    entries_.erase(it, entries_.end());
    return removed;
}

} // namespace sdwban
