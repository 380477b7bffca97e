#include "mrfx/shapley.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "mrfx/errors.hpp"

namespace mrfx {

namespace {

constexpr double kLogFloor = 1e-12;

double clamp_entry(double v) {
    return std::min(std::max(v, kLogFloor), 1.0);
}

} // namespace

double symmetric_kl(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size() || p.size() == 0) {
        throw ContractError("symmetric_kl: distributions must have equal positive length");
    }
    double acc = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        double a = clamp_entry(p[i]);
        double b = clamp_entry(q[i]);
        acc += a * std::log(a / b) + b * std::log(b / a);
    }
    return std::max(acc, 0.0);
}

double characteristic(const Distribution& reference, const Distribution& approx) {
    return -symmetric_kl(reference, approx);
}

std::vector<EdgeId> coalition_minus(const Mrf& mrf, NodeId target, std::span<const EdgeId> coalition_edges,
                                    NodeId node) {
    if (node == target) {
        throw ContractError("the target is never an explaining variable");
    }
    bool present = false;
    for (EdgeId e : coalition_edges) {
        const Edge& ed = mrf.edge(e);
        if (ed.u == node || ed.v == node) present = true;
    }
    if (!present) {
        throw ContractError("node " + std::to_string(node) + " is not part of the coalition");
    }

    // BFS over coalition edges, skipping those incident to the removed node.
    std::set<NodeId> frontier_done;
    std::vector<NodeId> queue{target};
    frontier_done.insert(target);
    std::vector<EdgeId> kept;
    std::set<EdgeId> kept_set;
    while (!queue.empty()) {
        NodeId cur = queue.back();
        queue.pop_back();
        for (EdgeId e : coalition_edges) {
            const Edge& ed = mrf.edge(e);
            if (ed.u == node || ed.v == node) continue;
            NodeId other;
            if (ed.u == cur) {
                other = ed.v;
            } else if (ed.v == cur) {
                other = ed.u;
            } else {
                continue;
            }
            if (kept_set.insert(e).second) kept.push_back(e);
            if (frontier_done.insert(other).second) queue.push_back(other);
        }
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

CoalitionEvaluator::CoalitionEvaluator(const Mrf& mrf, NodeId target, const BpConfig& config, bool force_scratch)
    : mrf_(mrf), target_(target), coalition_cfg_(config), force_scratch_(force_scratch) {
    mrf_.check_node(target);
    coalition_cfg_.tolerance = std::min(config.tolerance, 1e-12);

    BpResult reference = run_bp(mrf_, config);
    reference_converged_ = reference.converged;
    reference_updates_ = reference.message_updates;
    reference_belief_ = compute_belief(mrf_, reference.messages, target_);

    Entry target_only;
    target_only.belief = mrf_.prior(target_);
    target_only.nu = characteristic(reference_belief_, target_only.belief);
    target_only.parent_key = "";
    nu_trace_.push_back({"", target_only.nu});
    cache_.emplace("", std::move(target_only));
}

const CoalitionEvaluator::Entry& CoalitionEvaluator::run_and_cache(const std::string& key,
                                                                   std::span<const EdgeId> edges,
                                                                   const MessageSet* warm,
                                                                   std::string parent_key) {
    std::vector<EdgeId> sorted(edges.begin(), edges.end());
    std::sort(sorted.begin(), sorted.end());
    BpResult run = run_bp_on(mrf_, sorted, coalition_cfg_, force_scratch_ ? nullptr : warm);
    updates_ += run.message_updates;

    Entry entry;
    entry.edges = std::move(sorted);
    entry.belief = compute_belief(mrf_, run.messages, target_);
    entry.messages = std::move(run.messages);
    entry.nu = characteristic(reference_belief_, entry.belief);
    entry.parent_key = std::move(parent_key);
    nu_trace_.push_back({key, entry.nu});
    return cache_.emplace(key, std::move(entry)).first->second;
}

double CoalitionEvaluator::evaluate_coalition(const Coalition& coalition) {
    const std::string key = canonical_key(coalition.edges);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second.nu;
    auto parent = cache_.find(coalition.parent_key);
    if (parent == cache_.end()) {
        throw ContractError("parent coalition '" + coalition.parent_key + "' has not been evaluated yet");
    }
    return run_and_cache(key, coalition.edges, &parent->second.messages, coalition.parent_key).nu;
}

double CoalitionEvaluator::evaluate_subtree(std::span<const EdgeId> edges, const std::string& context_key) {
    if (edges.empty()) return nu_target_only();
    const std::string key = canonical_key(edges);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second.nu;

    const MessageSet* warm = nullptr;
    std::string warm_key;
    std::set<EdgeId> inside(edges.begin(), edges.end());
    auto context = cache_.find(context_key);
    std::string walk = context == cache_.end() ? std::string() : context->second.parent_key;
    while (true) {
        auto it = cache_.find(walk);
        if (it == cache_.end()) break;
        bool subset = true;
        for (EdgeId e : it->second.edges) {
            if (!inside.count(e)) {
                subset = false;
                break;
            }
        }
        if (subset) {
            warm = &it->second.messages;
            warm_key = walk;
            break;
        }
        if (walk.empty()) break;
        walk = it->second.parent_key;
    }
    return run_and_cache(key, edges, warm, warm_key).nu;
}

double CoalitionEvaluator::nu_target_only() const {
    return cache_.at("").nu;
}

double marginal_contribution(CoalitionEvaluator& evaluator, const Coalition& coalition, NodeId node) {
    double nu_full = evaluator.evaluate_coalition(coalition);
    std::vector<EdgeId> remainder = coalition_minus(evaluator.mrf(), coalition.target, coalition.edges, node);
    double nu_without = evaluator.evaluate_subtree(remainder, canonical_key(coalition.edges));
    return nu_full - nu_without;
}

ExplanationResult explain(const Mrf& mrf, NodeId target, const EnumConfig& enum_config, const BpConfig& bp_config,
                          const ExplainOptions& options) {
    auto start = std::chrono::steady_clock::now();
    mrf.check_node(target);

    CoalitionEvaluator evaluator(mrf, target, bp_config, options.force_scratch);
    const std::size_t n = static_cast<std::size_t>(mrf.node_count());
    std::vector<double> sums(n, 0.0);
    std::vector<std::size_t> counts(n, 0);
    std::vector<VisitTraceEntry> visit_trace;

    std::size_t visited = enumerate_coalitions(mrf, target, enum_config, [&](const Coalition& coalition) {
        double nu = evaluator.evaluate_coalition(coalition);
        for (std::size_t i = 1; i < coalition.nodes.size(); ++i) {
            NodeId xi = coalition.nodes[i];
            double mu = marginal_contribution(evaluator, coalition, xi);
            sums[static_cast<std::size_t>(xi)] += mu;
            counts[static_cast<std::size_t>(xi)] += 1;
        }
        if (options.record_trace) {
            visit_trace.push_back({canonical_key(coalition.edges), static_cast<int>(coalition.edges.size()), nu,
                                   evaluator.message_updates()});
        }
    });

    ExplanationResult result;
    result.target = target;
    result.attributions.reserve(n - 1);
    for (NodeId node = 0; node < mrf.node_count(); ++node) {
        if (node == target) continue;
        NodeAttribution a;
        a.node = node;
        a.coalition_count = counts[static_cast<std::size_t>(node)];
        a.shapley_value = a.coalition_count > 0 ? sums[static_cast<std::size_t>(node)] / a.coalition_count : 0.0;
        result.attributions.push_back(a);
    }
    result.ranking.reserve(result.attributions.size());
    for (const NodeAttribution& a : result.attributions) result.ranking.push_back(a.node);
    std::sort(result.ranking.begin(), result.ranking.end(), [&](NodeId a, NodeId b) {
        double sa = result.attributions[static_cast<std::size_t>(a > target ? a - 1 : a)].shapley_value;
        double sb = result.attributions[static_cast<std::size_t>(b > target ? b - 1 : b)].shapley_value;
        return sa != sb ? sa > sb : a < b;
    });

    result.diagnostics.coalitions = visited;
    result.diagnostics.bp_message_updates = evaluator.message_updates();
    result.diagnostics.reference_updates = evaluator.reference_updates();
    result.diagnostics.reference_converged = evaluator.reference_converged();
    result.diagnostics.visit_trace = std::move(visit_trace);
    result.diagnostics.nu_trace = evaluator.take_nu_trace();
    result.diagnostics.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace mrfx
