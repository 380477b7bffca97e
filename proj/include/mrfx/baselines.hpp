#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mrfx/bp.hpp"
#include "mrfx/coalition.hpp"
#include "mrfx/mrf.hpp"
#include "mrfx/shapley.hpp"

namespace mrfx {

/// Per-node importance scores for one target, shared output contract of all
/// explanation methods. Scores cover every node except the target.
struct Ranking {
    NodeId target = -1;
    std::string method;
    std::uint64_t seed = 0;
    std::vector<std::pair<NodeId, double>> scores; // ascending node id
    std::vector<NodeId> order;                     // descending score, ascending id on ties
};

std::vector<NodeId> rank_order(std::span<const std::pair<NodeId, double>> scores);

/// I.i.d. uniform(0,1) scores, reproducible from the seed.
Ranking random_ranking(const Mrf& mrf, NodeId target, std::uint64_t seed);

/// Power iteration on the undirected random-walk matrix with uniform
/// teleport; one score per node, summing to 1. Mass of degree-0 nodes is
/// redistributed uniformly.
std::vector<double> pagerank_scores(const Mrf& mrf, double damping = 0.85, double tol = 1e-10,
                                    int max_iterations = 1000);

/// Target-independent global ranking; the target is dropped from the list.
Ranking pagerank_ranking(const Mrf& mrf, NodeId target, double damping = 0.85, double tol = 1e-10);

/// score(X_i) = symmetric KL between the reference belief and the belief
/// recomputed with X_i's prior replaced by uniform (topology unchanged).
/// Nodes whose prior is already uniform score exactly 0. Perturbed runs
/// warm-start from the reference messages.
Ranking sensitivity_ranking(const Mrf& mrf, NodeId target, const BpConfig& config);

/// Randomized-traversal spanning tree of the target's distance ball,
/// truncated to at most max_complexity edges.
std::vector<EdgeId> sample_spanning_tree(const Mrf& mrf, NodeId target, const EnumConfig& config,
                                         std::mt19937_64& rng);

/// Monte-Carlo Shapley estimate: marginal contributions averaged over
/// sampled spanning trees instead of the enumerated coalitions. A node's
/// score is its mean contribution over the samples containing it.
Ranking mc_shapley_ranking(const Mrf& mrf, NodeId target, const EnumConfig& enum_config, const BpConfig& bp_config,
                           int num_samples, std::uint64_t seed);

Ranking ranking_from_explanation(const ExplanationResult& result);

} // namespace mrfx
