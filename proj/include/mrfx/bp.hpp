#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mrfx/mrf.hpp"

namespace mrfx {

struct BpConfig {
    double tolerance = 1e-6; // max absolute per-entry message change
    int max_iterations = 200;
    double damping = 0.0; // in [0,1); 0 = undamped
};

/// Snapshot of all directed messages of one BP run. The key set equals the
/// directed-edge set of the (sub)graph the run was computed on. Entries are
/// sorted by (to, from) so that a node's incoming messages are contiguous.
class MessageSet {
public:
    struct Entry {
        DirectedEdge key;
        Distribution value;
    };

    MessageSet() = default;
    explicit MessageSet(std::vector<Entry> entries);

    const Distribution* find(NodeId from, NodeId to) const;
    std::span<const Entry> entries() const { return entries_; }
    std::span<const Entry> incoming(NodeId to) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<Entry> entries_;
};

struct BpResult {
    MessageSet messages;
    bool converged = false;
    int iterations_used = 0;
    long long message_updates = 0; // individual directed-message recomputations
};

/// Synchronous sum-product sweeps until the max per-entry message change
/// drops to cfg.tolerance or max_iterations runs out. Messages are updated
/// in (source, target) order; a message is only recomputed when one of its
/// inputs changed since its last recomputation, which leaves the per-sweep
/// values bitwise identical to full sweeps while message_updates counts the
/// work actually done. Messages absent from warm_start initialize uniform;
/// messages sourced at a node in stale_sources are recomputed even if warm.
BpResult run_bp_on(const Mrf& mrf, std::span<const EdgeId> active_edges, const BpConfig& cfg,
                   const MessageSet* warm_start = nullptr, std::span<const NodeId> stale_sources = {});

/// run_bp_on over every edge of the graph.
BpResult run_bp(const Mrf& mrf, const BpConfig& cfg, const MessageSet* warm_start = nullptr);

/// b(X_i) ~ phi(X_i) * prod over stored messages into the node, normalized.
Distribution compute_belief(const Mrf& mrf, const MessageSet& messages, NodeId node);

/// Fixed point on base_edges + the (v,u) edge, warm-started from converged
/// messages on base_edges. v must already be an endpoint of base_edges (or
/// the base may be empty); (v,u) must exist in the graph and not in the base.
BpResult adaptive_bp(const Mrf& mrf, std::span<const EdgeId> base_edges, const MessageSet& base_messages,
                     std::pair<NodeId, NodeId> new_edge, const BpConfig& cfg);

std::vector<EdgeId> all_edge_ids(const Mrf& mrf);

} // namespace mrfx
