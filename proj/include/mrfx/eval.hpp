#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mrfx/baselines.hpp"
#include "mrfx/bp.hpp"
#include "mrfx/coalition.hpp"
#include "mrfx/mrf.hpp"

namespace mrfx {

struct EvalConfig {
    double restore_fraction = 0.25;
    std::vector<double> fractions = {0.25, 0.5, 0.75, 1.0}; // ascending, each in (0,1]
    double biased_prior_fraction = 0.8;
    double bias_strength = 0.9;
};

struct MaskedRunStats {
    double wall_ms = 0.0;
    long long message_updates = 0;
    bool converged = false;
};

/// Faithfulness protocol: every prior except the target's goes uniform, the
/// original priors of the top ceil(fraction * (n-1)) ranked nodes are put
/// back, BP reruns on the unchanged topology and the result is the symmetric
/// KL between the reference belief and the masked belief at the target.
/// Passing `reference` skips the internal reference run.
double masked_fidelity(const Mrf& mrf, NodeId target, const Ranking& ranking, double fraction,
                       const BpConfig& config, const Distribution* reference = nullptr,
                       MaskedRunStats* stats = nullptr);

struct EvalCell {
    std::string method;
    NodeId target = -1;
    double fraction = 0.0;
    double sym_kl = 0.0;
    double wall_ms = 0.0;
    long long msg_updates = 0;
    std::string error; // empty on success
};

struct MethodSpec {
    std::string name;
    std::function<Ranking(const Mrf&, NodeId)> run;
};

struct EvalReport {
    std::vector<EvalCell> cells;

    // Mean sym_kl over error-free cells of one method at one fraction.
    std::optional<double> mean(const std::string& method, double fraction) const;
    // Two-sided paired t statistic across targets (method_a minus method_b).
    std::optional<double> paired_t(const std::string& method_a, const std::string& method_b,
                                   double fraction) const;

    void write_long_csv(std::ostream& out) const;
    void write_summary(std::ostream& out) const;
};

/// Full (method, target, fraction) cross product of masked_fidelity values.
/// Cells that throw are recorded with their error message; the sweep keeps
/// going. Cells run in parallel across (method, target) pairs.
EvalReport sweep_fractions(const Mrf& mrf, std::span<const NodeId> targets, std::span<const MethodSpec> methods,
                           std::span<const double> fractions, const BpConfig& config, int workers = 1);

struct SpeedupRow {
    std::size_t index = 0;
    int coalition_size = 0;
    long long cumulative_adaptive = 0;
    long long cumulative_scratch = 0;
};

struct SpeedupReport {
    std::vector<SpeedupRow> rows; // one per visited coalition, in visit order
    long long total_adaptive = 0;
    long long total_scratch = 0;
    double wall_ms_adaptive = 0.0;
    double wall_ms_scratch = 0.0;
    double max_sv_difference = 0.0; // between the two modes
};

/// Runs the full explanation twice, once with warm starts and once forcing
/// scratch BP per coalition, and reports cumulative message-update counts.
SpeedupReport speedup_benchmark(const Mrf& mrf, NodeId target, const EnumConfig& enum_config,
                                const BpConfig& bp_config);

struct DSensitivityRow {
    int max_distance = 0;
    double mean_sym_kl = 0.0;
    std::vector<double> per_target;
};

/// Masked fidelity of the Shapley ranking at `fraction` for each distance
/// bound in d_values (ascending).
std::vector<DSensitivityRow> d_sensitivity(const Mrf& mrf, std::span<const NodeId> targets,
                                           std::span<const int> d_values, int max_complexity,
                                           const BpConfig& bp_config, double fraction = 0.25);

} // namespace mrfx
