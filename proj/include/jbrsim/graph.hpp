#pragma once

#include "jbrsim/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace jbrsim {

using Edge = std::pair<NodeId, NodeId>;  // stored with first < second

// Unit-disk adjacency over node positions: an edge exists iff the Euclidean
// distance is <= the transmission range (closed disk, so a pair exactly at
// range counts as connected). Neighbor lists are kept sorted.
class ConnectivityGraph {
public:
    ConnectivityGraph() = default;
    explicit ConnectivityGraph(std::size_t node_count) : adjacency_(node_count) {}

    struct Diff {
        std::vector<Edge> up;
        std::vector<Edge> down;
        bool changed() const { return !up.empty() || !down.empty(); }
    };

    // Rebuilds adjacency from scratch (grid-bucketed pair search) and reports
    // which links appeared/disappeared. Bumps the epoch when anything changed.
    Diff recompute(const std::vector<Vec2>& positions, double tx_range);

    [[nodiscard]] std::size_t node_count() const { return adjacency_.size(); }
    [[nodiscard]] const std::vector<NodeId>& neighbors(NodeId n) const { return adjacency_[n]; }
    [[nodiscard]] std::uint32_t degree(NodeId n) const {
        return static_cast<std::uint32_t>(adjacency_[n].size());
    }
    [[nodiscard]] bool connected(NodeId a, NodeId b) const;
    [[nodiscard]] std::uint64_t epoch() const { return epoch_; }

    // Active connections of x not counting m.
    [[nodiscard]] std::uint32_t degree_excluding(NodeId x, NodeId m) const {
        return degree(x) - (connected(x, m) ? 1u : 0u);
    }

    // True when `route` is a path in the current adjacency.
    [[nodiscard]] bool is_path(const std::vector<NodeId>& route) const;

private:
    std::vector<std::vector<NodeId>> adjacency_;
    std::uint64_t epoch_ = 0;
};

// BFS helpers used by the harness and tests.
bool graph_is_connected(const ConnectivityGraph& g);
bool graph_reachable(const ConnectivityGraph& g, NodeId from, NodeId to);
std::uint32_t graph_diameter(const ConnectivityGraph& g);  // max over connected pairs

} // namespace jbrsim
