#include "mrfx/mrf.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>

#include "mrfx/errors.hpp"

namespace mrfx {

namespace {

std::string edge_label(const Edge& e) {
    return "(" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
}

} // namespace

Mrf::Mrf(int class_count, std::vector<Distribution> priors, std::vector<Edge> edges,
         std::vector<CompatibilityMatrix> potentials)
    : classes_(class_count), priors_(std::move(priors)) {
    if (classes_ < 2) {
        throw ValidationError("class count must be at least 2, got " + std::to_string(classes_));
    }
    if (priors_.empty()) {
        throw ValidationError("an MRF needs at least one node");
    }
    const int n = node_count();
    for (int i = 0; i < n; ++i) {
        const Distribution& p = priors_[static_cast<std::size_t>(i)];
        if (p.size() != classes_) {
            throw ValidationError("prior for node " + std::to_string(i) + " has " + std::to_string(p.size()) +
                                  " entries, expected " + std::to_string(classes_));
        }
        if (!p.is_valid()) {
            throw ValidationError("prior for node " + std::to_string(i) +
                                  " is not a distribution (negative entry or does not sum to 1)");
        }
    }

    if (potentials.size() != edges.size()) {
        throw ValidationError("got " + std::to_string(potentials.size()) + " potentials for " +
                              std::to_string(edges.size()) + " edges");
    }
    std::set<std::pair<NodeId, NodeId>> seen;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
            throw ValidationError("edge " + edge_label(e) + " references an unknown node");
        }
        if (e.u == e.v) {
            throw ValidationError("self-loop at node " + std::to_string(e.u));
        }
        if (!seen.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second) {
            throw ValidationError("duplicate edge " + edge_label(e));
        }
        if (potentials[i].classes != classes_) {
            throw ValidationError("potential for edge " + edge_label(e) + " has wrong class count");
        }
        potentials[i].validate(edge_label(e));
    }

    std::vector<std::vector<std::pair<NodeId, EdgeId>>> adj(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, static_cast<EdgeId>(i));
        adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, static_cast<EdgeId>(i));
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());

    edges_ = std::make_shared<const std::vector<Edge>>(std::move(edges));
    potentials_ = std::make_shared<const std::vector<CompatibilityMatrix>>(std::move(potentials));
    adjacency_ = std::make_shared<const std::vector<std::vector<std::pair<NodeId, EdgeId>>>>(std::move(adj));
}

std::optional<EdgeId> Mrf::edge_between(NodeId a, NodeId b) const {
    check_node(a);
    check_node(b);
    for (const auto& [nb, e] : neighbors(a)) {
        if (nb == b) return e;
    }
    return std::nullopt;
}

Mrf Mrf::with_prior(NodeId n, Distribution d) const {
    check_node(n);
    if (d.size() != classes_ || !d.is_valid()) {
        throw ValidationError("replacement prior for node " + std::to_string(n) + " is not a valid distribution");
    }
    Mrf copy = *this;
    copy.priors_[static_cast<std::size_t>(n)] = std::move(d);
    return copy;
}

Mrf Mrf::with_priors(std::vector<Distribution> priors) const {
    if (priors.size() != priors_.size()) {
        throw ValidationError("replacement priors: expected " + std::to_string(priors_.size()) + " entries");
    }
    for (std::size_t i = 0; i < priors.size(); ++i) {
        if (priors[i].size() != classes_ || !priors[i].is_valid()) {
            throw ValidationError("replacement prior for node " + std::to_string(i) +
                                  " is not a valid distribution");
        }
    }
    Mrf copy = *this;
    copy.priors_ = std::move(priors);
    return copy;
}

void Mrf::check_node(NodeId n) const {
    if (n < 0 || n >= node_count()) {
        throw ContractError("node id " + std::to_string(n) + " out of range [0," +
                            std::to_string(node_count()) + ")");
    }
}

std::vector<int> bfs_distances(const Mrf& mrf, NodeId source) {
    mrf.check_node(source);
    std::vector<int> dist(static_cast<std::size_t>(mrf.node_count()), -1);
    std::deque<NodeId> queue;
    dist[static_cast<std::size_t>(source)] = 0;
    queue.push_back(source);
    while (!queue.empty()) {
        NodeId cur = queue.front();
        queue.pop_front();
        for (const auto& [nb, e] : mrf.neighbors(cur)) {
            if (dist[static_cast<std::size_t>(nb)] < 0) {
                dist[static_cast<std::size_t>(nb)] = dist[static_cast<std::size_t>(cur)] + 1;
                queue.push_back(nb);
            }
        }
    }
    return dist;
}

std::optional<int> shortest_path_distance(const Mrf& mrf, NodeId a, NodeId b) {
    mrf.check_node(b);
    std::vector<int> dist = bfs_distances(mrf, a);
    int d = dist[static_cast<std::size_t>(b)];
    if (d < 0) return std::nullopt;
    return d;
}

std::vector<NodeId> degree_sorted_neighbors(const Mrf& mrf, NodeId n) {
    mrf.check_node(n);
    std::vector<NodeId> result;
    result.reserve(mrf.neighbors(n).size());
    for (const auto& [nb, e] : mrf.neighbors(n)) result.push_back(nb);
    std::sort(result.begin(), result.end(), [&](NodeId a, NodeId b) {
        int da = mrf.degree(a);
        int db = mrf.degree(b);
        return da != db ? da < db : a < b;
    });
    return result;
}

} // namespace mrfx
