#include "jbrsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace jbrsim {

namespace {

std::int64_t cell_key(std::int32_t cx, std::int32_t cy) {
    return (static_cast<std::int64_t>(cx) << 32) ^ static_cast<std::uint32_t>(cy);
}

} // namespace

ConnectivityGraph::Diff ConnectivityGraph::recompute(const std::vector<Vec2>& positions,
                                                     double tx_range) {
    const std::size_t n = positions.size();
    std::vector<std::vector<NodeId>> next(n);

    // Bucket nodes into cells of side tx_range; only neighboring cells can
    // hold nodes within range.
    std::unordered_map<std::int64_t, std::vector<NodeId>> cells;
    cells.reserve(n * 2);
    auto cell_of = [&](const Vec2& p) {
        return std::pair<std::int32_t, std::int32_t>(
            static_cast<std::int32_t>(std::floor(p.x / tx_range)),
            static_cast<std::int32_t>(std::floor(p.y / tx_range)));
    };
    for (NodeId i = 0; i < n; ++i) {
        const auto [cx, cy] = cell_of(positions[i]);
        cells[cell_key(cx, cy)].push_back(i);
    }

    const double range_sq = tx_range * tx_range;
    for (NodeId i = 0; i < n; ++i) {
        const auto [cx, cy] = cell_of(positions[i]);
        for (std::int32_t dx = -1; dx <= 1; ++dx) {
            for (std::int32_t dy = -1; dy <= 1; ++dy) {
                const auto it = cells.find(cell_key(cx + dx, cy + dy));
                if (it == cells.end()) continue;
                for (const NodeId j : it->second) {
                    if (j <= i) continue;
                    if (distance_sq(positions[i], positions[j]) <= range_sq) {
                        next[i].push_back(j);
                        next[j].push_back(i);
                    }
                }
            }
        }
    }
    for (auto& adj : next) std::sort(adj.begin(), adj.end());

    Diff diff;
    const std::size_t old_n = adjacency_.size();
    for (NodeId i = 0; i < n; ++i) {
        const std::vector<NodeId> empty;
        const auto& before = i < old_n ? adjacency_[i] : empty;
        const auto& after = next[i];
        std::vector<NodeId> gained, lost;
        std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                            std::back_inserter(gained));
        std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                            std::back_inserter(lost));
        for (const NodeId j : gained) {
            if (i < j) diff.up.emplace_back(i, j);
        }
        for (const NodeId j : lost) {
            if (i < j) diff.down.emplace_back(i, j);
        }
    }

    adjacency_ = std::move(next);
    if (diff.changed()) ++epoch_;
    return diff;
}

bool ConnectivityGraph::connected(NodeId a, NodeId b) const {
    const auto& adj = adjacency_[a];
    return std::binary_search(adj.begin(), adj.end(), b);
}

bool ConnectivityGraph::is_path(const std::vector<NodeId>& route) const {
    if (route.empty()) return false;
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        if (route[i] >= node_count() || route[i + 1] >= node_count()) return false;
        if (!connected(route[i], route[i + 1])) return false;
    }
    return true;
}

namespace {

std::vector<std::uint32_t> bfs_depths(const ConnectivityGraph& g, NodeId from) {
    constexpr std::uint32_t unreached = static_cast<std::uint32_t>(-1);
    std::vector<std::uint32_t> depth(g.node_count(), unreached);
    std::deque<NodeId> frontier{from};
    depth[from] = 0;
    while (!frontier.empty()) {
        const NodeId v = frontier.front();
        frontier.pop_front();
        for (const NodeId w : g.neighbors(v)) {
            if (depth[w] == unreached) {
                depth[w] = depth[v] + 1;
                frontier.push_back(w);
            }
        }
    }
    return depth;
}

} // namespace

bool graph_is_connected(const ConnectivityGraph& g) {
    if (g.node_count() == 0) return true;
    const auto depth = bfs_depths(g, 0);
    return std::none_of(depth.begin(), depth.end(),
                        [](std::uint32_t d) { return d == static_cast<std::uint32_t>(-1); });
}

bool graph_reachable(const ConnectivityGraph& g, NodeId from, NodeId to) {
    return bfs_depths(g, from)[to] != static_cast<std::uint32_t>(-1);
}

std::uint32_t graph_diameter(const ConnectivityGraph& g) {
    std::uint32_t best = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        for (const std::uint32_t d : bfs_depths(g, v)) {
            if (d != static_cast<std::uint32_t>(-1)) best = std::max(best, d);
        }
    }
    return best;
}

} // namespace jbrsim
