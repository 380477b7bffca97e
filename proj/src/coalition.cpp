#include "mrfx/coalition.hpp"

#include <algorithm>
#include <bit>

#include "mrfx/errors.hpp"

namespace mrfx {

namespace {

void check_config(const EnumConfig& cfg) {
    if (cfg.max_distance < 1) throw ContractError("max_distance must be positive");
    if (cfg.max_complexity < 1) throw ContractError("max_complexity must be positive");
}

struct Enumerator {
    const Mrf& mrf;
    NodeId target;
    EnumConfig cfg;
    const std::function<void(const Coalition&)>& visit;

    std::vector<int> dist;
    std::vector<char> in_sub;
    std::vector<char> forbidden;
    std::vector<char> have_order;
    std::vector<std::vector<std::pair<NodeId, EdgeId>>> order; // degree-sorted adjacency, built on demand
    Coalition cur;
    std::size_t count = 0;

    Enumerator(const Mrf& m, NodeId t, const EnumConfig& c, const std::function<void(const Coalition&)>& v)
        : mrf(m), target(t), cfg(c), visit(v) {
        dist = bfs_distances(mrf, target);
        in_sub.assign(static_cast<std::size_t>(mrf.node_count()), 0);
        forbidden.assign(static_cast<std::size_t>(mrf.edge_count()), 0);
        have_order.assign(static_cast<std::size_t>(mrf.node_count()), 0);
        order.resize(static_cast<std::size_t>(mrf.node_count()));
    }

    const std::vector<std::pair<NodeId, EdgeId>>& sorted_adjacency(NodeId n) {
        auto idx = static_cast<std::size_t>(n);
        if (!have_order[idx]) {
            auto span = mrf.neighbors(n);
            order[idx].assign(span.begin(), span.end());
            std::sort(order[idx].begin(), order[idx].end(),
                      [&](const std::pair<NodeId, EdgeId>& a, const std::pair<NodeId, EdgeId>& b) {
                          int da = mrf.degree(a.first);
                          int db = mrf.degree(b.first);
                          return da != db ? da < db : a.first < b.first;
                      });
            have_order[idx] = 1;
        }
        return order[idx];
    }

    void run() {
        cur.target = target;
        cur.nodes.push_back(target);
        in_sub[static_cast<std::size_t>(target)] = 1;
        dfs(target);
    }

    // One frame per subgraph state. Every valid boundary edge is a
    // candidate exactly once: the branch that includes it runs first, then
    // the edge joins this frame's forbidden set so the remaining candidates
    // enumerate the coalitions without it. The undo list restores the
    // forbidden set when the frame returns.
    void dfs(NodeId from_node) {
        if (static_cast<int>(cur.edges.size()) >= cfg.max_complexity) return;
        const std::string frame_key = canonical_key(cur.edges);

        std::vector<NodeId> expanders;
        expanders.reserve(cur.nodes.size());
        expanders.push_back(from_node);
        for (NodeId n : cur.nodes) {
            if (n != from_node) expanders.push_back(n);
        }

        std::vector<EdgeId> undo;
        for (NodeId w : expanders) {
            for (const auto& [u, e] : sorted_adjacency(w)) {
                if (forbidden[static_cast<std::size_t>(e)]) continue;
                if (in_sub[static_cast<std::size_t>(u)]) continue; // keep acyclic
                int du = dist[static_cast<std::size_t>(u)];
                if (du < 0 || du >= cfg.max_distance) continue;

                cur.edges.push_back(e);
                cur.nodes.push_back(u);
                in_sub[static_cast<std::size_t>(u)] = 1;
                ++count;
                Coalition snapshot;
                snapshot.target = target;
                snapshot.nodes = cur.nodes;
                snapshot.edges = cur.edges;
                snapshot.parent_key = frame_key;
                snapshot.added_edge = {w, u};
                visit(snapshot);

                dfs(u);

                in_sub[static_cast<std::size_t>(u)] = 0;
                cur.nodes.pop_back();
                cur.edges.pop_back();
                forbidden[static_cast<std::size_t>(e)] = 1;
                undo.push_back(e);
            }
        }
        for (EdgeId e : undo) forbidden[static_cast<std::size_t>(e)] = 0;
    }
};

// Disjoint-set over node ids with path halving; reset per subset via epochs.
struct UnionFind {
    std::vector<int> parent;
    std::vector<int> epoch;
    int current = 0;

    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)), epoch(static_cast<std::size_t>(n), -1) {}

    void next_epoch() { ++current; }

    int find(int x) {
        if (epoch[static_cast<std::size_t>(x)] != current) {
            epoch[static_cast<std::size_t>(x)] = current;
            parent[static_cast<std::size_t>(x)] = x;
        }
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }

    bool unite(int a, int b) {
        int ra = find(a);
        int rb = find(b);
        if (ra == rb) return false;
        parent[static_cast<std::size_t>(ra)] = rb;
        return true;
    }
};

} // namespace

std::string canonical_key(std::span<const EdgeId> edges) {
    std::vector<EdgeId> sorted(edges.begin(), edges.end());
    std::sort(sorted.begin(), sorted.end());
    std::string key;
    key.reserve(sorted.size() * 3);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i) key.push_back(',');
        key += std::to_string(sorted[i]);
    }
    return key;
}

std::size_t enumerate_coalitions(const Mrf& mrf, NodeId target, const EnumConfig& config,
                                 const std::function<void(const Coalition&)>& visitor) {
    mrf.check_node(target);
    check_config(config);
    Enumerator en(mrf, target, config, visitor);
    en.run();
    return en.count;
}

std::set<std::string> brute_force_coalitions(const Mrf& mrf, NodeId target, const EnumConfig& config) {
    mrf.check_node(target);
    check_config(config);
    const int e_count = mrf.edge_count();
    if (e_count > 20) {
        throw CapacityError("brute-force coalition enumeration supports at most 20 edges, got " +
                            std::to_string(e_count));
    }
    std::vector<int> dist = bfs_distances(mrf, target);
    UnionFind uf(mrf.node_count());
    std::set<std::string> keys;
    std::vector<EdgeId> subset;
    std::vector<NodeId> touched;

    for (std::uint32_t mask = 1; mask < (1u << e_count); ++mask) {
        if (static_cast<int>(std::popcount(mask)) > config.max_complexity) continue;
        subset.clear();
        touched.clear();
        uf.next_epoch();
        bool ok = true;
        for (int e = 0; e < e_count && ok; ++e) {
            if (!(mask & (1u << e))) continue;
            subset.push_back(e);
            const Edge& ed = mrf.edge(e);
            for (NodeId n : {ed.u, ed.v}) {
                int d = dist[static_cast<std::size_t>(n)];
                if (n != target && (d < 0 || d >= config.max_distance)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
            touched.push_back(ed.u);
            touched.push_back(ed.v);
            if (!uf.unite(ed.u, ed.v)) ok = false; // cycle
        }
        if (!ok) continue;
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        bool has_target = std::binary_search(touched.begin(), touched.end(), target);
        if (!has_target) continue;
        int root = uf.find(target);
        bool connected = true;
        for (NodeId n : touched) {
            if (uf.find(n) != root) {
                connected = false;
                break;
            }
        }
        if (!connected) continue;
        keys.insert(canonical_key(subset));
    }
    return keys;
}

std::vector<Coalition> coalitions_containing(std::span<const Coalition> coalitions, NodeId node) {
    std::vector<Coalition> out;
    for (const Coalition& c : coalitions) {
        if (std::find(c.nodes.begin(), c.nodes.end(), node) != c.nodes.end()) {
            out.push_back(c);
        }
    }
    return out;
}

} // namespace mrfx
