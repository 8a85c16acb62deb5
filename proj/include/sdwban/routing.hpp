/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_ROUTING_HPP
#define SDWBAN_ROUTING_HPP

#include "sdwban/core.hpp"

#include <set>

namespace sdwban {

// Undirected weighted graph over NodeIds; the controller's view of the
// forwarding fabric. Edge costs are link latencies in seconds.
class TopologyGraph {
public:
    void add_node(NodeId node);
    void remove_node(NodeId node);
    bool has_node(NodeId node) const;

    // Adding an edge twice keeps the lower cost.
    void add_edge(NodeId a, NodeId b, double cost);
    void remove_edge(NodeId a, NodeId b);
    void remove_edges_of(NodeId node);

    const std::map<NodeId, std::map<NodeId, double>>& adjacency() const { return adj_; }
    std::vector<NodeId> nodes() const;

private:
    std::map<NodeId, std::map<NodeId, double>> adj_;
};

// Least-cost loop-free path from src to dst whose intermediate nodes avoid
// `excluded` (src and dst themselves are always allowed). Equal-cost paths
// are broken deterministically by the lexicographically smallest node
// sequence. Throws NoRouteError when dst is unreachable.
std::vector<NodeId> compute_route(const TopologyGraph& view, NodeId src, NodeId dst,
                                  const std::set<NodeId>& excluded);

double path_cost(const TopologyGraph& view, const std::vector<NodeId>& path);

} // namespace sdwban

#endif // SDWBAN_ROUTING_HPP
