#pragma once

#include <functional>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mrfx/mrf.hpp"

namespace mrfx {

inline constexpr int kUnbounded = std::numeric_limits<int>::max();

struct EnumConfig {
    // Candidate nodes must satisfy d(u, target) < max_distance in the full
    // graph (strict), so max_distance = 2 admits direct neighbors only.
    int max_distance = 3;
    // Edge-count cap: coalitions carry at most max_complexity edges.
    int max_complexity = 8;
};

/// Connected acyclic edge subset containing the target, visited as its
/// parent coalition plus one edge. parent_key == "" names the implicit
/// target-only subgraph that single-edge coalitions extend.
struct Coalition {
    NodeId target = -1;
    std::vector<NodeId> nodes; // insertion order; nodes.front() == target
    std::vector<EdgeId> edges; // insertion order
    std::string parent_key;
    std::pair<NodeId, NodeId> added_edge{-1, -1}; // (node already present, appended node)
};

/// Sorted edge ids rendered as a byte string; equal keys iff equal edge sets.
std::string canonical_key(std::span<const EdgeId> edges);

/// Depth-first enumeration of every coalition rooted at `target` under the
/// distance and complexity bounds, without duplicates. Candidate edges are
/// tried from the most recently added node first and then from the other
/// subgraph nodes in insertion order, each node's neighbors in ascending
/// degree. An edge becomes forbidden for the remainder of its frame only
/// after the branch that included it has been fully explored; forbidden
/// sets do not leak across frames. Returns the number of visits.
std::size_t enumerate_coalitions(const Mrf& mrf, NodeId target, const EnumConfig& config,
                                 const std::function<void(const Coalition&)>& visitor);

/// Exhaustive check of all edge subsets; testing oracle, |E| <= 20.
std::set<std::string> brute_force_coalitions(const Mrf& mrf, NodeId target, const EnumConfig& config);

/// Filters a visited coalition list down to those containing `node`.
std::vector<Coalition> coalitions_containing(std::span<const Coalition> coalitions, NodeId node);

} // namespace mrfx
