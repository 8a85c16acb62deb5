/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/routing.hpp"

#include <algorithm>
#include <queue>

namespace sdwban {

void TopologyGraph::add_node(NodeId node) {
    adj_.try_emplace(node);
}

void TopologyGraph::remove_node(NodeId node) {
    remove_edges_of(node);
    adj_.erase(node);
}

bool TopologyGraph::has_node(NodeId node) const {
    return adj_.count(node) > 0;
}

void TopologyGraph::add_edge(NodeId a, NodeId b, double cost) {
    if (a == b) {
        throw ContractViolation("self edge at " + to_string(a));
    }
    auto& edges_a = adj_[a];
    adj_.try_emplace(b);
    auto it = edges_a.find(b);
    if (it == edges_a.end() || cost < it->second) {
        edges_a[b] = cost;
        adj_[b][a] = cost;
    }
}

void TopologyGraph::remove_edge(NodeId a, NodeId b) {
    auto ita = adj_.find(a);
    if (ita != adj_.end()) ita->second.erase(b);
    auto itb = adj_.find(b);
    if (itb != adj_.end()) itb->second.erase(a);
}

void TopologyGraph::remove_edges_of(NodeId node) {
    auto it = adj_.find(node);
    if (it == adj_.end()) return;
    for (const auto& [peer, cost] : it->second) {
        (void)cost;
        adj_[peer].erase(node);
    }
    it->second.clear();
}

std::vector<NodeId> TopologyGraph::nodes() const {
    std::vector<NodeId> out;
    out.reserve(adj_.size());
    for (const auto& [node, edges] : adj_) {
        (void)edges;
        out.push_back(node);
    }
    return out;
}

// Dijkstra carrying the full path in the priority key. Graphs here are tiny
// (tens of nodes), and ordering states by (cost, path) gives exactly the
// smallest lexicographic node sequence among equal-cost paths, which keeps
// route selection reproducible run to run.
std::vector<NodeId> compute_route(const TopologyGraph& view, NodeId src, NodeId dst,
                                  const std::set<NodeId>& excluded) {
    if (!view.has_node(src)) {
        throw NoRouteError("route source " + to_string(src) + " not in topology view");
    }
    if (!view.has_node(dst)) {
        throw NoRouteError("route destination " + to_string(dst) + " not in topology view");
    }

    using State = std::pair<double, std::vector<NodeId>>;
    auto worse = [](const State& a, const State& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    };
    std::priority_queue<State, std::vector<State>, decltype(worse)> frontier(worse);
    std::set<NodeId> settled;
    frontier.push({0.0, {src}});

    while (!frontier.empty()) {
        auto [cost, path] = frontier.top();
        frontier.pop();
        NodeId here = path.back();
        if (settled.count(here)) {
            continue;
        }
        settled.insert(here);
        if (here == dst) {
            return path;
        }
        auto it = view.adjacency().find(here);
        if (it == view.adjacency().end()) {
            continue;
        }
        for (const auto& [next, edge_cost] : it->second) {
            if (settled.count(next)) continue;
            // Exclusion applies to intermediate nodes only.
            if (next != dst && excluded.count(next)) continue;
            std::vector<NodeId> extended = path;
            extended.push_back(next);
            frontier.push({cost + edge_cost, std::move(extended)});
        }
    }
    throw NoRouteError("no route from " + to_string(src) + " to " + to_string(dst));
}

double path_cost(const TopologyGraph& view, const std::vector<NodeId>& path) {
    double cost = 0.0;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& edges = view.adjacency().at(path[i]);
        auto it = edges.find(path[i + 1]);
        if (it == edges.end()) {
            throw ContractViolation("path uses missing edge " + to_string(path[i]) + "-" +
                                    to_string(path[i + 1]));
        }
        cost += it->second;
    }
    return cost;
}

} // namespace sdwban
