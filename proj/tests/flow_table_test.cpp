/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/flow_table.hpp"

#include "sdwban/rng.hpp"

#include <doctest.h>

using namespace sdwban;

namespace {

const NodeId kS1{NodeKind::Switch, 1};
const NodeId kGw{NodeKind::Gateway, 0};

FlowEntry normal_entry(AppKind app, NodeId next_hop, int priority = 10,
                       double idle_timeout = 30.0) {
    FlowEntry entry;
    entry.key = make_flow_key(kS1, app, TrafficClass::Normal);
    entry.action = FlowAction::forward_to(next_hop);
    entry.priority = priority;
    entry.idle_timeout_s = idle_timeout;
    return entry;
}

FlowEntry wildcard_entry(int priority = 100) {
    FlowEntry entry;
    entry.key = make_emergency_wildcard_key(kS1);
    entry.action = FlowAction::forward_to(kGw);
    entry.priority = priority;
    entry.idle_timeout_s = kInfiniteTimeout;
    return entry;
}

} // namespace

TEST_CASE("lookup on an empty table misses") {
    FlowTable table(kS1);
    CHECK_FALSE(table.lookup(make_flow_key(kS1, AppKind::HeartRate, TrafficClass::Normal), 0.0)
                    .hit());
}

TEST_CASE("exact match within the idle window hits") {
    FlowTable table(kS1);
    table.install(normal_entry(AppKind::HeartRate, kGw), 0.0);
    auto result = table.lookup(make_flow_key(kS1, AppKind::HeartRate, TrafficClass::Normal), 10.0);
    REQUIRE(result.hit());
    CHECK(result.entry.action == FlowAction::forward_to(kGw));
    CHECK(result.entry.last_matched_at == 10.0);
    CHECK(result.entry.match_count == 1);
}

TEST_CASE("idle expiry turns a hit into a miss") {
    FlowTable table(kS1);
    table.install(normal_entry(AppKind::HeartRate, kGw), 0.0);
    // 41 - 0 > 30
    CHECK_FALSE(
        table.lookup(make_flow_key(kS1, AppKind::HeartRate, TrafficClass::Normal), 41.0).hit());
    // the boundary itself is still valid: 30 - 0 == 30 is not > 30
    FlowTable table2(kS1);
    table2.install(normal_entry(AppKind::Temperature, kGw), 0.0);
    CHECK(table2.lookup(make_flow_key(kS1, AppKind::Temperature, TrafficClass::Normal), 30.0)
              .hit());
}

TEST_CASE("the emergency wildcard matches any app of that class") {
    FlowTable table(kS1);
    table.install(normal_entry(AppKind::HeartRate, kGw, 10), 0.0);
    table.install(wildcard_entry(100), 0.0);
    auto result =
        table.lookup(make_flow_key(kS1, AppKind::Glucose, TrafficClass::Emergency), 1.0);
    REQUIRE(result.hit());
    CHECK(result.entry.key.is_wildcard());
    CHECK(result.entry.priority == 100);
}

TEST_CASE("install replaces an entry with the same key and priority") {
    FlowTable table(kS1);
    table.install(normal_entry(AppKind::HeartRate, kGw), 1.0);
    CHECK(table.entries().size() == 1);
    NodeId relay{NodeKind::Switch, 9};
    table.install(normal_entry(AppKind::HeartRate, relay), 2.0);
    CHECK(table.entries().size() == 1);
    CHECK(table.entries()[0].action == FlowAction::forward_to(relay));
    CHECK(table.entries()[0].installed_at == 2.0);
}

TEST_CASE("emergency entries must outrank every normal entry") {
    FlowTable table(kS1);
    table.install(normal_entry(AppKind::HeartRate, kGw, 10), 0.0);
    CHECK_THROWS_AS(table.install(wildcard_entry(10), 0.0), InvariantError);
    CHECK_THROWS_AS(table.install(wildcard_entry(5), 0.0), InvariantError);
    table.install(wildcard_entry(100), 0.0);
    // and the reverse direction
    CHECK_THROWS_AS(table.install(normal_entry(AppKind::Glucose, kGw, 100), 0.0), InvariantError);
}

TEST_CASE("purge_expired removes idle entries and spares infinite ones") {
    FlowTable table(kS1);
    table.install(normal_entry(AppKind::HeartRate, kGw, 10, 30.0), 0.0);
    table.install(wildcard_entry(100), 0.0);

    auto removed = table.purge_expired(31.0);
    REQUIRE(removed.size() == 1);
    CHECK(removed[0].key.app == AppKind::HeartRate);
    CHECK(table.entries().size() == 1);

    removed = table.purge_expired(1e9);
    CHECK(removed.empty());

    FlowTable empty(kS1);
    CHECK(empty.purge_expired(5.0).empty());
}

TEST_CASE("a capacity cap rejects new installs but allows replacements") {
    FlowTable table(kS1, 1);
    table.install(normal_entry(AppKind::HeartRate, kGw), 0.0);
    CHECK_THROWS_AS(table.install(normal_entry(AppKind::Glucose, kGw), 1.0), TableFullError);
    // same (key, priority) replaces in place even at capacity
    NodeId relay{NodeKind::Switch, 9};
    table.install(normal_entry(AppKind::HeartRate, relay), 2.0);
    CHECK(table.entries().size() == 1);
    CHECK(table.entries()[0].action == FlowAction::forward_to(relay));
}

TEST_CASE("foreign-switch keys violate the table contract") {
    FlowTable table(kS1);
    FlowKey foreign = make_flow_key(NodeId{NodeKind::Switch, 2}, AppKind::HeartRate,
                                    TrafficClass::Normal);
    CHECK_THROWS_AS(table.lookup(foreign, 0.0), ContractViolation);
    FlowEntry entry = normal_entry(AppKind::HeartRate, kGw);
    entry.key.src_switch = NodeId{NodeKind::Switch, 2};
    CHECK_THROWS_AS(table.install(entry, 0.0), ContractViolation);
}

TEST_CASE("lookup is deterministic and purge-transparent") {
    Rng rng(99);
    for (int iter = 0; iter < 200; ++iter) {
        FlowTable table(kS1);
        int entries = int(rng.uniform_int(0, 6));
        for (int e = 0; e < entries; ++e) {
            FlowEntry entry;
            if (rng.uniform01() < 0.3) {
                entry = wildcard_entry(100);
            } else {
                entry = normal_entry(kAllApps[rng.uniform_int(0, 4)], kGw, 10,
                                     rng.uniform(5.0, 40.0));
            }
            entry.action = rng.uniform01() < 0.8 ? FlowAction::forward_to(kGw)
                                                 : FlowAction::drop();
            table.install(entry, rng.uniform(0.0, 20.0));
        }
        FlowKey key = rng.uniform01() < 0.4
                          ? make_flow_key(kS1, kAllApps[rng.uniform_int(0, 4)],
                                          TrafficClass::Emergency)
                          : make_flow_key(kS1, kAllApps[rng.uniform_int(0, 4)],
                                          TrafficClass::Normal);
        double now = rng.uniform(0.0, 60.0);

        FlowTable copy_a = table;
        FlowTable copy_b = table;
        auto ra = copy_a.lookup(key, now);
        auto rb = copy_b.lookup(key, now);
        CHECK(ra.hit() == rb.hit());
        if (ra.hit()) {
            CHECK(ra.entry == rb.entry);
        }

        // purge_expired then lookup must agree with plain lookup
        FlowTable purged = table;
        purged.purge_expired(now);
        auto rp = purged.lookup(key, now);
        CHECK(rp.hit() == ra.hit());
        if (ra.hit()) {
            CHECK(rp.entry.key == ra.entry.key);
            CHECK(rp.entry.action == ra.entry.action);
        }
    }
}

TEST_CASE("match_count equals the number of hits over an entry's lifetime") {
    Rng rng(7);
    FlowTable table(kS1);
    table.install(normal_entry(AppKind::HeartRate, kGw, 10, kInfiniteTimeout), 0.0);
    uint64_t hits = 0;
    double now = 0.0;
    for (int i = 0; i < 100; ++i) {
        now += rng.uniform(0.0, 2.0);
        AppKind app = kAllApps[rng.uniform_int(0, 4)];
        auto result = table.lookup(make_flow_key(kS1, app, TrafficClass::Normal), now);
        if (result.hit()) {
            ++hits;
            CHECK(app == AppKind::HeartRate);
        }
    }
    CHECK(table.entries()[0].match_count == hits);
    CHECK(hits > 0);
}

TEST_CASE("install then lookup at the same instant always hits") {
    Rng rng(13);
    for (int iter = 0; iter < 50; ++iter) {
        FlowTable table(kS1);
        double now = rng.uniform(0.0, 100.0);
        AppKind app = kAllApps[rng.uniform_int(0, 4)];
        table.install(normal_entry(app, kGw, 10, rng.uniform(0.1, 30.0)), now);
        CHECK(table.lookup(make_flow_key(kS1, app, TrafficClass::Normal), now).hit());
    }
}
