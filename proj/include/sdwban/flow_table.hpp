/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_FLOW_TABLE_HPP
#define SDWBAN_FLOW_TABLE_HPP

#include "sdwban/core.hpp"

#include <utility>
#include <vector>

namespace sdwban {

enum class ActionKind {
    ForwardTo,
    Drop,
};

struct FlowAction {
    ActionKind kind{ActionKind::Drop};
    std::optional<NodeId> next_hop; // set iff kind == ForwardTo

    static FlowAction forward_to(NodeId hop) { return {ActionKind::ForwardTo, hop}; }
    static FlowAction drop() { return {ActionKind::Drop, std::nullopt}; }

    bool operator==(const FlowAction&) const = default;
};

std::string to_string(const FlowAction& action);

struct FlowEntry {
    FlowKey key;
    FlowAction action;
    int priority{0};
    double idle_timeout_s{kInfiniteTimeout};
    SimTime installed_at{0.0};
    SimTime last_matched_at{0.0};
    uint64_t match_count{0};

    bool expired(SimTime now) const {
        return now - last_matched_at > idle_timeout_s;
    }

    bool operator==(const FlowEntry&) const = default;
};

struct MatchResult {
    enum class Kind { Hit, TableMiss } kind{Kind::TableMiss};
    // Valid only on Hit; copies the entry as matched (counters already bumped).
    FlowEntry entry;

    bool hit() const { return kind == Kind::Hit; }
    static MatchResult miss() { return MatchResult{}; }
};

// Install rejected because the table is at its configured capacity.
struct TableFullError : InvariantError {
    explicit TableFullError(const std::string& what) : InvariantError(what) {}
};

// Per-switch match-action store. Entries are keyed by (key, priority) with
// replace-on-install; Emergency entries must outrank every Normal entry so a
// wildcard-vs-exact overlap is always resolved by priority.
class FlowTable {
public:
    FlowTable() = default;
    explicit FlowTable(NodeId owner, size_t capacity = 0) // 0 = unlimited
        : owner_(owner), capacity_(capacity) {}

    NodeId owner() const { return owner_; }

    // Highest-priority non-expired match; bumps last_matched_at/match_count on
    // hit. Expired entries are treated as absent (lookup never removes them;
    // see purge_expired). Throws ContractViolation for a foreign-switch key.
    MatchResult lookup(const FlowKey& key, SimTime now);

    // Replaces any prior entry with the same (key, priority). Throws
    // ContractViolation for a foreign-switch entry, InvariantError when the
    // entry would break the Emergency-over-Normal priority ordering, and
    // TableFullError when a capacity cap rejects a genuinely new entry
    // (replacements always go through).
    void install(FlowEntry entry, SimTime now);

    // Removes idle-expired entries; infinite-timeout entries never expire.
    std::vector<FlowEntry> purge_expired(SimTime now);

    const std::vector<FlowEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    void clear() { entries_.clear(); }

    // True when `entry.key` matches packets keyed `key` (exact, or the
    // Emergency app wildcard).
    static bool key_matches(const FlowKey& entry_key, const FlowKey& key);

private:
    NodeId owner_{NodeKind::Switch, 0};
    size_t capacity_{0};
    std::vector<FlowEntry> entries_; // kept in install order
};

} // namespace sdwban

#endif // SDWBAN_FLOW_TABLE_HPP
