#include "mrfx/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mrfx/errors.hpp"
#include "mrfx/random.hpp"

namespace mrfx {

GraphKind parse_graph_kind(const std::string& name) {
    if (name == "tree") return GraphKind::Tree;
    if (name == "erdos-renyi") return GraphKind::ErdosRenyi;
    if (name == "small-world") return GraphKind::SmallWorld;
    throw ValidationError("unknown graph kind '" + name + "' (expected tree, erdos-renyi or small-world)");
}

std::string graph_kind_name(GraphKind kind) {
    switch (kind) {
        case GraphKind::Tree: return "tree";
        case GraphKind::ErdosRenyi: return "erdos-renyi";
        case GraphKind::SmallWorld: return "small-world";
    }
    return "?";
}

namespace {

std::vector<Edge> make_tree(int n, std::mt19937_64& rng) {
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) - 1);
    for (NodeId i = 1; i < n; ++i) {
        NodeId parent = static_cast<NodeId>(bounded_uint(rng, static_cast<std::uint64_t>(i)));
        edges.push_back({parent, i});
    }
    return edges;
}

std::vector<Edge> make_erdos_renyi(int n, std::mt19937_64& rng) {
    // Expected degree about 3.
    const double p = std::min(1.0, 3.0 / (n - 1));
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            if (canonical_double(rng) < p) edges.push_back({i, j});
        }
    }
    return edges;
}

std::vector<Edge> make_small_world(int n, std::mt19937_64& rng) {
    // Ring lattice with k = 4 neighbors, rewiring probability 0.1.
    const int half_k = std::min(2, (n - 1) / 2);
    const double beta = 0.1;
    std::set<std::pair<NodeId, NodeId>> present;
    std::vector<Edge> edges;
    auto canon = [](NodeId a, NodeId b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    for (NodeId i = 0; i < n; ++i) {
        for (int off = 1; off <= half_k; ++off) {
            NodeId j = static_cast<NodeId>((i + off) % n);
            if (i == j) continue;
            if (present.insert(canon(i, j)).second) edges.push_back({i, j});
        }
    }
    for (Edge& e : edges) {
        if (canonical_double(rng) >= beta) continue;
        for (int attempt = 0; attempt < 10; ++attempt) {
            NodeId v = static_cast<NodeId>(bounded_uint(rng, static_cast<std::uint64_t>(n)));
            if (v == e.u || present.count(canon(e.u, v))) continue;
            present.erase(canon(e.u, e.v));
            present.insert(canon(e.u, v));
            e.v = v;
            break;
        }
    }
    return edges;
}

} // namespace

Mrf generate_synthetic(const SyntheticConfig& config) {
    if (config.nodes < 2) throw ValidationError("synthetic graph needs at least 2 nodes");
    if (config.classes < 2) throw ValidationError("synthetic graph needs at least 2 classes");
    if (!(config.homophily > 0.0) || config.homophily > 1.0) {
        throw ValidationError("homophily strength must lie in (0,1]");
    }
    if (config.biased_fraction < 0.0 || config.biased_fraction > 1.0) {
        throw ValidationError("biased prior fraction must lie in [0,1]");
    }
    if (config.bias_strength < 1.0 / config.classes || config.bias_strength > 1.0) {
        throw ValidationError("bias strength must lie in [1/c, 1]");
    }

    std::mt19937_64 rng(config.seed);
    std::vector<Edge> edges;
    switch (config.kind) {
        case GraphKind::Tree: edges = make_tree(config.nodes, rng); break;
        case GraphKind::ErdosRenyi: edges = make_erdos_renyi(config.nodes, rng); break;
        case GraphKind::SmallWorld: edges = make_small_world(config.nodes, rng); break;
    }

    const int c = config.classes;
    std::vector<Distribution> priors(static_cast<std::size_t>(config.nodes), Distribution::uniform(c));
    std::vector<NodeId> ids(static_cast<std::size_t>(config.nodes));
    for (NodeId i = 0; i < config.nodes; ++i) ids[static_cast<std::size_t>(i)] = i;
    shuffle_inplace(ids, rng);
    const auto biased = static_cast<std::size_t>(std::llround(config.biased_fraction * config.nodes));
    const double off = c > 1 ? (1.0 - config.bias_strength) / (c - 1) : 0.0;
    for (std::size_t i = 0; i < biased && i < ids.size(); ++i) {
        int planted = static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(c)));
        std::vector<double> p(static_cast<std::size_t>(c), off);
        p[static_cast<std::size_t>(planted)] = config.bias_strength;
        priors[static_cast<std::size_t>(ids[i])] = Distribution(std::move(p));
    }

    std::vector<CompatibilityMatrix> potentials(edges.size(),
                                                CompatibilityMatrix::homophily(c, config.homophily));
    return Mrf(c, std::move(priors), std::move(edges), std::move(potentials));
}

} // namespace mrfx
