#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mrfx/types.hpp"

namespace mrfx {

// Undirected edge, endpoints in declared order.
struct Edge {
    NodeId u = -1;
    NodeId v = -1;
};

/// Immutable discrete pairwise MRF: per-node priors and per-edge
/// compatibility matrices. Safe to share across concurrent readers; the
/// with_* helpers return cheap copies that share the graph structure.
class Mrf {
public:
    Mrf(int class_count, std::vector<Distribution> priors, std::vector<Edge> edges,
        std::vector<CompatibilityMatrix> potentials);

    int node_count() const { return static_cast<int>(priors_.size()); }
    int class_count() const { return classes_; }
    int edge_count() const { return static_cast<int>(edges_->size()); }

    const Distribution& prior(NodeId n) const { return priors_[static_cast<std::size_t>(n)]; }
    std::span<const Edge> edges() const { return *edges_; }
    const Edge& edge(EdgeId e) const { return (*edges_)[static_cast<std::size_t>(e)]; }
    const CompatibilityMatrix& potential(EdgeId e) const { return (*potentials_)[static_cast<std::size_t>(e)]; }

    // Adjacency as (neighbor, edge) pairs, ascending neighbor id.
    std::span<const std::pair<NodeId, EdgeId>> neighbors(NodeId n) const {
        return (*adjacency_)[static_cast<std::size_t>(n)];
    }
    int degree(NodeId n) const { return static_cast<int>(neighbors(n).size()); }
    std::optional<EdgeId> edge_between(NodeId a, NodeId b) const;

    // psi value for class xi at endpoint i and class xj at the other
    // endpoint of edge e; resolves the stored orientation.
    double psi(EdgeId e, NodeId i, int xi, int xj) const {
        const Edge& ed = edge(e);
        return i == ed.u ? potential(e).at(xi, xj) : potential(e).at(xj, xi);
    }

    Mrf with_prior(NodeId n, Distribution d) const;
    Mrf with_priors(std::vector<Distribution> priors) const;

    // Throws ContractError for an out-of-range id.
    void check_node(NodeId n) const;

private:
    Mrf() = default;

    int classes_ = 0;
    std::vector<Distribution> priors_;
    std::shared_ptr<const std::vector<Edge>> edges_;
    std::shared_ptr<const std::vector<CompatibilityMatrix>> potentials_;
    std::shared_ptr<const std::vector<std::vector<std::pair<NodeId, EdgeId>>>> adjacency_;
};

// BFS hop counts from `source`; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const Mrf& mrf, NodeId source);

// Hop count between a and b, or nullopt when disconnected. 0 iff a == b.
std::optional<int> shortest_path_distance(const Mrf& mrf, NodeId a, NodeId b);

// Neighbors in ascending degree, ties broken by ascending NodeId.
std::vector<NodeId> degree_sorted_neighbors(const Mrf& mrf, NodeId n);

} // namespace mrfx
