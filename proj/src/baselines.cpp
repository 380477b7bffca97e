#include "mrfx/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "mrfx/errors.hpp"
#include "mrfx/random.hpp"

namespace mrfx {

std::vector<NodeId> rank_order(std::span<const std::pair<NodeId, double>> scores) {
    std::vector<NodeId> order;
    order.reserve(scores.size());
    for (const auto& [node, score] : scores) order.push_back(node);
    std::vector<double> by_node;
    NodeId max_node = -1;
    for (const auto& [node, score] : scores) max_node = std::max(max_node, node);
    by_node.assign(static_cast<std::size_t>(max_node) + 1, 0.0);
    for (const auto& [node, score] : scores) by_node[static_cast<std::size_t>(node)] = score;
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        double sa = by_node[static_cast<std::size_t>(a)];
        double sb = by_node[static_cast<std::size_t>(b)];
        return sa != sb ? sa > sb : a < b;
    });
    return order;
}

Ranking random_ranking(const Mrf& mrf, NodeId target, std::uint64_t seed) {
    mrf.check_node(target);
    std::mt19937_64 rng(seed);
    Ranking r;
    r.target = target;
    r.method = "random";
    r.seed = seed;
    for (NodeId n = 0; n < mrf.node_count(); ++n) {
        if (n == target) continue;
        r.scores.emplace_back(n, canonical_double(rng));
    }
    r.order = rank_order(r.scores);
    return r;
}

std::vector<double> pagerank_scores(const Mrf& mrf, double damping, double tol, int max_iterations) {
    const int n = mrf.node_count();
    std::vector<double> rank(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int it = 0; it < max_iterations; ++it) {
        double dangling = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            if (mrf.degree(u) == 0) dangling += rank[static_cast<std::size_t>(u)];
        }
        const double teleport = (1.0 - damping) / n + damping * dangling / n;
        std::fill(next.begin(), next.end(), teleport);
        for (NodeId u = 0; u < n; ++u) {
            const double share = damping * rank[static_cast<std::size_t>(u)] / std::max(mrf.degree(u), 1);
            for (const auto& [nb, e] : mrf.neighbors(u)) {
                next[static_cast<std::size_t>(nb)] += share;
            }
        }
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            delta += std::abs(next[static_cast<std::size_t>(i)] - rank[static_cast<std::size_t>(i)]);
        }
        std::swap(rank, next);
        if (delta <= tol) break;
    }
    double sum = 0.0;
    for (double v : rank) sum += v;
    for (double& v : rank) v /= sum;
    return rank;
}

Ranking pagerank_ranking(const Mrf& mrf, NodeId target, double damping, double tol) {
    mrf.check_node(target);
    std::vector<double> scores = pagerank_scores(mrf, damping, tol);
    Ranking r;
    r.target = target;
    r.method = "pagerank";
    for (NodeId n = 0; n < mrf.node_count(); ++n) {
        if (n == target) continue;
        r.scores.emplace_back(n, scores[static_cast<std::size_t>(n)]);
    }
    r.order = rank_order(r.scores);
    return r;
}

Ranking sensitivity_ranking(const Mrf& mrf, NodeId target, const BpConfig& config) {
    mrf.check_node(target);
    BpResult reference = run_bp(mrf, config);
    Distribution b_ref = compute_belief(mrf, reference.messages, target);
    std::vector<EdgeId> all = all_edge_ids(mrf);

    Ranking r;
    r.target = target;
    r.method = "sensitivity";
    for (NodeId n = 0; n < mrf.node_count(); ++n) {
        if (n == target) continue;
        if (is_uniform(mrf.prior(n))) {
            r.scores.emplace_back(n, 0.0);
            continue;
        }
        Mrf perturbed = mrf.with_prior(n, Distribution::uniform(mrf.class_count()));
        NodeId stale[] = {n};
        BpResult run = run_bp_on(perturbed, all, config, &reference.messages, stale);
        Distribution b = compute_belief(perturbed, run.messages, target);
        r.scores.emplace_back(n, symmetric_kl(b_ref, b));
    }
    r.order = rank_order(r.scores);
    return r;
}

std::vector<EdgeId> sample_spanning_tree(const Mrf& mrf, NodeId target, const EnumConfig& config,
                                         std::mt19937_64& rng) {
    std::vector<int> dist = bfs_distances(mrf, target);
    std::vector<char> in_tree(static_cast<std::size_t>(mrf.node_count()), 0);
    in_tree[static_cast<std::size_t>(target)] = 1;

    std::vector<std::pair<EdgeId, NodeId>> candidates;
    auto push_candidates = [&](NodeId from) {
        for (const auto& [nb, e] : mrf.neighbors(from)) {
            int d = dist[static_cast<std::size_t>(nb)];
            if (!in_tree[static_cast<std::size_t>(nb)] && d >= 0 && d < config.max_distance) {
                candidates.emplace_back(e, nb);
            }
        }
    };
    push_candidates(target);

    std::vector<EdgeId> edges;
    while (!candidates.empty() && static_cast<int>(edges.size()) < config.max_complexity) {
        std::size_t pick = static_cast<std::size_t>(bounded_uint(rng, candidates.size()));
        auto [e, u] = candidates[pick];
        candidates[pick] = candidates.back();
        candidates.pop_back();
        if (in_tree[static_cast<std::size_t>(u)]) continue; // joined through another edge
        in_tree[static_cast<std::size_t>(u)] = 1;
        edges.push_back(e);
        push_candidates(u);
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

Ranking mc_shapley_ranking(const Mrf& mrf, NodeId target, const EnumConfig& enum_config, const BpConfig& bp_config,
                           int num_samples, std::uint64_t seed) {
    mrf.check_node(target);
    if (num_samples < 1) throw ContractError("num_samples must be at least 1");

    CoalitionEvaluator evaluator(mrf, target, bp_config);
    std::mt19937_64 rng(seed);
    const std::size_t n = static_cast<std::size_t>(mrf.node_count());
    std::vector<double> sums(n, 0.0);
    std::vector<std::size_t> counts(n, 0);

    for (int s = 0; s < num_samples; ++s) {
        std::vector<EdgeId> tree = sample_spanning_tree(mrf, target, enum_config, rng);
        if (tree.empty()) continue;
        const std::string key = canonical_key(tree);
        double nu_full = evaluator.evaluate_subtree(tree, key);

        std::vector<NodeId> members;
        for (EdgeId e : tree) {
            members.push_back(mrf.edge(e).u);
            members.push_back(mrf.edge(e).v);
        }
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        for (NodeId node : members) {
            if (node == target) continue;
            std::vector<EdgeId> remainder = coalition_minus(mrf, target, tree, node);
            double nu_without = evaluator.evaluate_subtree(remainder, key);
            sums[static_cast<std::size_t>(node)] += nu_full - nu_without;
            counts[static_cast<std::size_t>(node)] += 1;
        }
    }

    Ranking r;
    r.target = target;
    r.method = "mc_shapley";
    r.seed = seed;
    for (NodeId node = 0; node < mrf.node_count(); ++node) {
        if (node == target) continue;
        double score = counts[static_cast<std::size_t>(node)] > 0
                           ? sums[static_cast<std::size_t>(node)] / counts[static_cast<std::size_t>(node)]
                           : 0.0;
        r.scores.emplace_back(node, score);
    }
    r.order = rank_order(r.scores);
    return r;
}

Ranking ranking_from_explanation(const ExplanationResult& result) {
    Ranking r;
    r.target = result.target;
    r.method = "shapley";
    for (const NodeAttribution& a : result.attributions) {
        r.scores.emplace_back(a.node, a.shapley_value);
    }
    r.order = result.ranking;
    return r;
}

} // namespace mrfx
