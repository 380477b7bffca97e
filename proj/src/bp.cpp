#include "mrfx/bp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mrfx/errors.hpp"

namespace mrfx {

namespace {

constexpr double kEntryFloor = 1e-300; // clamp before normalization

struct MsgInfo {
    NodeId from = -1;
    NodeId to = -1;
    EdgeId edge = -1;
    bool transpose = false; // potential stored as (to, from)
    int inputs_begin = 0;
    int inputs_end = 0;
    int deps_begin = 0;
    int deps_end = 0;
};

// Flattened view of the active subgraph's directed messages, sorted by
// (from, to).
struct ActiveGraph {
    std::vector<MsgInfo> msgs;
    std::vector<int> inputs; // message indices feeding each message
    std::vector<int> deps;   // message indices each message feeds

    int find(NodeId from, NodeId to) const {
        DirectedEdge key{from, to};
        auto it = std::lower_bound(msgs.begin(), msgs.end(), key, [](const MsgInfo& m, const DirectedEdge& k) {
            return DirectedEdge{m.from, m.to} < k;
        });
        if (it == msgs.end() || it->from != from || it->to != to) return -1;
        return static_cast<int>(it - msgs.begin());
    }
};

ActiveGraph build_active(const Mrf& mrf, std::span<const EdgeId> active) {
    ActiveGraph g;
    g.msgs.reserve(active.size() * 2);
    for (EdgeId e : active) {
        if (e < 0 || e >= mrf.edge_count()) {
            throw ContractError("active edge id " + std::to_string(e) + " out of range");
        }
        const Edge& ed = mrf.edge(e);
        // at(a,b) = psi(x_u = a, x_v = b); the v->u direction reads the transpose.
        g.msgs.push_back({ed.u, ed.v, e, false, 0, 0, 0, 0});
        g.msgs.push_back({ed.v, ed.u, e, true, 0, 0, 0, 0});
    }
    std::sort(g.msgs.begin(), g.msgs.end(), [](const MsgInfo& a, const MsgInfo& b) {
        return DirectedEdge{a.from, a.to} < DirectedEdge{b.from, b.to};
    });
    for (std::size_t i = 1; i < g.msgs.size(); ++i) {
        if (g.msgs[i].from == g.msgs[i - 1].from && g.msgs[i].to == g.msgs[i - 1].to) {
            throw ContractError("duplicate active edge between " + std::to_string(g.msgs[i].from) + " and " +
                                std::to_string(g.msgs[i].to));
        }
    }

    // inputs of (j -> i): all (k -> j) with k != i; deps are the reverse.
    std::vector<std::vector<int>> incoming_by_node;
    std::vector<NodeId> nodes;
    nodes.reserve(g.msgs.size());
    for (const MsgInfo& m : g.msgs) nodes.push_back(m.to);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    auto node_slot = [&](NodeId n) {
        return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), n) - nodes.begin());
    };
    incoming_by_node.resize(nodes.size());
    for (std::size_t i = 0; i < g.msgs.size(); ++i) {
        incoming_by_node[node_slot(g.msgs[i].to)].push_back(static_cast<int>(i));
    }

    std::vector<std::vector<int>> dep_lists(g.msgs.size());
    for (std::size_t i = 0; i < g.msgs.size(); ++i) {
        MsgInfo& m = g.msgs[i];
        m.inputs_begin = static_cast<int>(g.inputs.size());
        for (int in : incoming_by_node[node_slot(m.from)]) {
            if (g.msgs[static_cast<std::size_t>(in)].from != m.to) {
                g.inputs.push_back(in);
                dep_lists[static_cast<std::size_t>(in)].push_back(static_cast<int>(i));
            }
        }
        m.inputs_end = static_cast<int>(g.inputs.size());
    }
    for (std::size_t i = 0; i < g.msgs.size(); ++i) {
        g.msgs[i].deps_begin = static_cast<int>(g.deps.size());
        for (int d : dep_lists[i]) g.deps.push_back(d);
        g.msgs[i].deps_end = static_cast<int>(g.deps.size());
    }
    return g;
}

} // namespace

MessageSet::MessageSet(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return std::make_pair(a.key.to, a.key.from) < std::make_pair(b.key.to, b.key.from);
    });
}

const Distribution* MessageSet::find(NodeId from, NodeId to) const {
    auto key = std::make_pair(to, from);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key, [](const Entry& e, const std::pair<NodeId, NodeId>& k) {
        return std::make_pair(e.key.to, e.key.from) < k;
    });
    if (it == entries_.end() || it->key.to != to || it->key.from != from) return nullptr;
    return &it->value;
}

std::span<const MessageSet::Entry> MessageSet::incoming(NodeId to) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), to,
                               [](const Entry& e, NodeId n) { return e.key.to < n; });
    auto hi = std::upper_bound(entries_.begin(), entries_.end(), to,
                               [](NodeId n, const Entry& e) { return n < e.key.to; });
    return {&*lo, static_cast<std::size_t>(hi - lo)};
}

BpResult run_bp_on(const Mrf& mrf, std::span<const EdgeId> active_edges, const BpConfig& cfg,
                   const MessageSet* warm_start, std::span<const NodeId> stale_sources) {
    if (!(cfg.tolerance > 0.0)) throw ContractError("BP tolerance must be positive");
    if (cfg.max_iterations < 1) throw ContractError("BP max_iterations must be at least 1");
    if (cfg.damping < 0.0 || cfg.damping >= 1.0) throw ContractError("BP damping must lie in [0,1)");

    BpResult result;
    if (active_edges.empty()) {
        result.converged = true;
        return result;
    }

    ActiveGraph g = build_active(mrf, active_edges);
    const int c = mrf.class_count();
    const std::size_t m = g.msgs.size();

    std::vector<double> values(m * static_cast<std::size_t>(c), 1.0 / c);
    std::vector<char> never(m, 1);
    if (warm_start != nullptr) {
        for (const MessageSet::Entry& e : warm_start->entries()) {
            int idx = g.find(e.key.from, e.key.to);
            if (idx < 0) {
                throw ContractError("warm-start message " + std::to_string(e.key.from) + "->" +
                                    std::to_string(e.key.to) + " is not an active directed edge");
            }
            std::copy(e.value.probs.begin(), e.value.probs.end(),
                      values.begin() + static_cast<std::size_t>(idx) * c);
            never[static_cast<std::size_t>(idx)] = 0;
        }
        for (NodeId s : stale_sources) {
            for (std::size_t i = 0; i < m; ++i) {
                if (g.msgs[i].from == s) never[i] = 1;
            }
        }
    }

    std::vector<char> changed_prev(m, 0);
    std::vector<char> changed_cur(m, 0);
    std::vector<int> work;
    work.reserve(m);
    std::vector<double> staged(m * static_cast<std::size_t>(c));
    std::vector<double> weight(static_cast<std::size_t>(c));

    const bool damped = cfg.damping > 0.0;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        work.clear();
        for (std::size_t i = 0; i < m; ++i) {
            bool need = never[i] != 0 || (damped && changed_prev[i] != 0);
            for (int k = g.msgs[i].inputs_begin; !need && k < g.msgs[i].inputs_end; ++k) {
                need = changed_prev[static_cast<std::size_t>(g.inputs[static_cast<std::size_t>(k)])] != 0;
            }
            if (need) work.push_back(static_cast<int>(i));
        }

        // All reads below see the previous sweep's state (synchronous sweep).
        for (int wi : work) {
            const MsgInfo& info = g.msgs[static_cast<std::size_t>(wi)];
            const Distribution& phi = mrf.prior(info.from);
            for (int x = 0; x < c; ++x) weight[static_cast<std::size_t>(x)] = phi[x];
            for (int k = info.inputs_begin; k < info.inputs_end; ++k) {
                const double* in = &values[static_cast<std::size_t>(g.inputs[static_cast<std::size_t>(k)]) * c];
                for (int x = 0; x < c; ++x) weight[static_cast<std::size_t>(x)] *= in[x];
            }
            const CompatibilityMatrix& psi = mrf.potential(info.edge);
            double* out = &staged[static_cast<std::size_t>(wi) * c];
            double sum = 0.0;
            for (int xt = 0; xt < c; ++xt) {
                double acc = 0.0;
                for (int xs = 0; xs < c; ++xs) {
                    // message value at class xt of the target node
                    acc += (info.transpose ? psi.at(xt, xs) : psi.at(xs, xt)) * weight[static_cast<std::size_t>(xs)];
                }
                out[xt] = acc;
                sum += acc;
            }
            if (sum <= 0.0 || !std::isfinite(sum)) {
                throw NumericalError("message " + std::to_string(info.from) + "->" + std::to_string(info.to) +
                                     " annihilated (all entries underflowed to zero)");
            }
            sum = 0.0;
            for (int x = 0; x < c; ++x) {
                out[x] = std::max(out[x], kEntryFloor);
                sum += out[x];
            }
            for (int x = 0; x < c; ++x) out[x] /= sum;
            if (damped) {
                const double* old = &values[static_cast<std::size_t>(wi) * c];
                for (int x = 0; x < c; ++x) {
                    out[x] = cfg.damping * old[x] + (1.0 - cfg.damping) * out[x];
                }
            }
        }

        double max_change = 0.0;
        std::fill(changed_cur.begin(), changed_cur.end(), 0);
        for (int wi : work) {
            double* dst = &values[static_cast<std::size_t>(wi) * c];
            const double* src = &staged[static_cast<std::size_t>(wi) * c];
            bool changed = false;
            for (int x = 0; x < c; ++x) {
                double diff = std::abs(src[x] - dst[x]);
                if (diff > max_change) max_change = diff;
                if (src[x] != dst[x]) changed = true;
                dst[x] = src[x];
            }
            changed_cur[static_cast<std::size_t>(wi)] = changed ? 1 : 0;
            never[static_cast<std::size_t>(wi)] = 0;
        }
        result.message_updates += static_cast<long long>(work.size());
        result.iterations_used = it;
        std::swap(changed_prev, changed_cur);
        if (max_change <= cfg.tolerance) {
            result.converged = true;
            break;
        }
    }

    std::vector<MessageSet::Entry> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        Distribution d(std::vector<double>(values.begin() + static_cast<long>(i) * c,
                                           values.begin() + static_cast<long>(i + 1) * c));
        out.push_back({DirectedEdge{g.msgs[i].from, g.msgs[i].to}, std::move(d)});
    }
    result.messages = MessageSet(std::move(out));
    return result;
}

BpResult run_bp(const Mrf& mrf, const BpConfig& cfg, const MessageSet* warm_start) {
    std::vector<EdgeId> all = all_edge_ids(mrf);
    return run_bp_on(mrf, all, cfg, warm_start);
}

Distribution compute_belief(const Mrf& mrf, const MessageSet& messages, NodeId node) {
    mrf.check_node(node);
    Distribution b = mrf.prior(node);
    for (const MessageSet::Entry& e : messages.incoming(node)) {
        for (int x = 0; x < b.size(); ++x) b[x] *= e.value[x];
    }
    double sum = 0.0;
    for (double v : b.probs) sum += v;
    if (sum <= 0.0 || !std::isfinite(sum)) {
        throw NumericalError("belief at node " + std::to_string(node) + " annihilated");
    }
    for (double& v : b.probs) v = std::max(v, kEntryFloor);
    b.normalize();
    return b;
}

BpResult adaptive_bp(const Mrf& mrf, std::span<const EdgeId> base_edges, const MessageSet& base_messages,
                     std::pair<NodeId, NodeId> new_edge, const BpConfig& cfg) {
    std::optional<EdgeId> eid = mrf.edge_between(new_edge.first, new_edge.second);
    if (!eid.has_value()) {
        throw ContractError("no edge between " + std::to_string(new_edge.first) + " and " +
                            std::to_string(new_edge.second));
    }
    bool v_in_base = base_edges.empty();
    for (EdgeId e : base_edges) {
        if (e == *eid) throw ContractError("new edge is already part of the base subgraph");
        const Edge& ed = mrf.edge(e);
        if (ed.u == new_edge.first || ed.v == new_edge.first) v_in_base = true;
    }
    if (!v_in_base) {
        throw ContractError("node " + std::to_string(new_edge.first) + " is not part of the base subgraph");
    }
    std::vector<EdgeId> active(base_edges.begin(), base_edges.end());
    active.push_back(*eid);
    std::sort(active.begin(), active.end());
    return run_bp_on(mrf, active, cfg, &base_messages);
}

std::vector<EdgeId> all_edge_ids(const Mrf& mrf) {
    std::vector<EdgeId> ids(static_cast<std::size_t>(mrf.edge_count()));
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

} // namespace mrfx
