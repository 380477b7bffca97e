#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "mrfx/bp.hpp"
#include "mrfx/coalition.hpp"
#include "mrfx/mrf.hpp"

namespace mrfx {

/// KL(p||q) + KL(q||p) with entries clamped to [1e-12, 1] before the logs.
/// Always >= 0; 0 iff the clamped distributions are equal.
double symmetric_kl(const Distribution& p, const Distribution& q);

/// Characteristic value nu = -symmetric_kl(reference, approx); <= 0.
double characteristic(const Distribution& reference, const Distribution& approx);

/// Edges of the target's connected component after deleting `node` and its
/// incident edges from the coalition. An empty result means only the target
/// remains; fragments disconnected from the target are dropped since they
/// cannot pass messages to it.
std::vector<EdgeId> coalition_minus(const Mrf& mrf, NodeId target, std::span<const EdgeId> coalition_edges,
                                    NodeId node);

struct NuTraceEntry {
    std::string key;
    double nu = 0.0;
};

/// Characteristic-function evaluation with incremental caching. Holds the
/// full-graph reference belief and, per canonical key, the converged
/// coalition messages, belief and nu value. Coalition BP runs use the
/// caller's config with the tolerance tightened to at most 1e-12: coalitions
/// are trees, where the extra sweeps are cheap and make warm-started and
/// from-scratch values agree far below the cache-consistency tolerance.
class CoalitionEvaluator {
public:
    CoalitionEvaluator(const Mrf& mrf, NodeId target, const BpConfig& config, bool force_scratch = false);

    /// nu of an enumerator-visited coalition, warm-started from its parent's
    /// cached messages (the enumeration order guarantees the parent entry).
    double evaluate_coalition(const Coalition& coalition);

    /// nu of an arbitrary subtree containing the target (removal results).
    /// When uncached, BP warm-starts from the largest cached ancestor of
    /// `context_key` whose edges all lie inside the subtree; the target-only
    /// entry always qualifies, so the fallback is a scratch run.
    double evaluate_subtree(std::span<const EdgeId> edges, const std::string& context_key);

    double nu_target_only() const;
    const Distribution& reference_belief() const { return reference_belief_; }
    bool reference_converged() const { return reference_converged_; }
    long long reference_updates() const { return reference_updates_; }
    long long message_updates() const { return updates_; }
    const std::vector<NuTraceEntry>& nu_trace() const { return nu_trace_; }
    std::vector<NuTraceEntry> take_nu_trace() { return std::move(nu_trace_); }

    const Mrf& mrf() const { return mrf_; }
    NodeId target() const { return target_; }

private:
    struct Entry {
        std::vector<EdgeId> edges;
        MessageSet messages;
        Distribution belief;
        double nu = 0.0;
        std::string parent_key;
    };

    const Entry& run_and_cache(const std::string& key, std::span<const EdgeId> edges,
                               const MessageSet* warm, std::string parent_key);

    const Mrf& mrf_;
    NodeId target_;
    BpConfig coalition_cfg_;
    bool force_scratch_;
    Distribution reference_belief_;
    bool reference_converged_ = false;
    long long reference_updates_ = 0;
    long long updates_ = 0;
    std::unordered_map<std::string, Entry> cache_;
    std::vector<NuTraceEntry> nu_trace_;
};

/// mu = nu(S) - nu(S minus node), per the component-removal rule above.
double marginal_contribution(CoalitionEvaluator& evaluator, const Coalition& coalition, NodeId node);

struct NodeAttribution {
    NodeId node = -1;
    double shapley_value = 0.0;
    std::size_t coalition_count = 0;
};

struct VisitTraceEntry {
    std::string key;
    int edge_count = 0;
    double nu = 0.0;
    long long cumulative_updates = 0; // evaluator updates after this visit, removals included
};

struct ExplainDiagnostics {
    std::size_t coalitions = 0;
    long long bp_message_updates = 0; // coalition-evaluation work
    long long reference_updates = 0;  // full-graph reference run
    double wall_ms = 0.0;
    bool reference_converged = false;
    std::vector<VisitTraceEntry> visit_trace;
    std::vector<NuTraceEntry> nu_trace;
};

struct ExplanationResult {
    NodeId target = -1;
    std::vector<NodeAttribution> attributions; // every node except the target, ascending id
    std::vector<NodeId> ranking;               // descending shapley value, ascending id on ties
    ExplainDiagnostics diagnostics;
};

struct ExplainOptions {
    bool force_scratch = false; // cold-start every coalition BP run
    bool record_trace = true;
};

/// Shapley value of every explaining variable for the target's belief:
/// the per-node mean marginal contribution over all enumerated coalitions
/// containing the node. Nodes in no coalition get value 0 and count 0.
ExplanationResult explain(const Mrf& mrf, NodeId target, const EnumConfig& enum_config, const BpConfig& bp_config,
                          const ExplainOptions& options = {});

} // namespace mrfx
