#include "mrfx/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "mrfx/errors.hpp"
#include "mrfx/parallel.hpp"
#include "mrfx/shapley.hpp"

namespace mrfx {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

double masked_fidelity(const Mrf& mrf, NodeId target, const Ranking& ranking, double fraction,
                       const BpConfig& config, const Distribution* reference, MaskedRunStats* stats) {
    mrf.check_node(target);
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ContractError("restore fraction must lie in (0,1]");
    }
    if (ranking.target != target) {
        throw ContractError("ranking was computed for a different target");
    }

    Distribution b_ref;
    if (reference != nullptr) {
        b_ref = *reference;
    } else {
        BpResult ref_run = run_bp(mrf, config);
        b_ref = compute_belief(mrf, ref_run.messages, target);
    }

    const int n = mrf.node_count();
    std::vector<Distribution> priors(static_cast<std::size_t>(n), Distribution::uniform(mrf.class_count()));
    priors[static_cast<std::size_t>(target)] = mrf.prior(target); // the target's prior is never masked
    const auto restore = static_cast<std::size_t>(std::ceil(fraction * (n - 1)));
    for (std::size_t i = 0; i < restore && i < ranking.order.size(); ++i) {
        NodeId node = ranking.order[i];
        priors[static_cast<std::size_t>(node)] = mrf.prior(node);
    }
    Mrf masked = mrf.with_priors(std::move(priors));

    auto start = std::chrono::steady_clock::now();
    BpResult run = run_bp(masked, config);
    Distribution b_masked = compute_belief(masked, run.messages, target);
    if (stats != nullptr) {
        stats->wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        stats->message_updates = run.message_updates;
        stats->converged = run.converged;
    }
    return symmetric_kl(b_ref, b_masked);
}

std::optional<double> EvalReport::mean(const std::string& method, double fraction) const {
    double sum = 0.0;
    int count = 0;
    for (const EvalCell& cell : cells) {
        if (cell.method == method && cell.fraction == fraction && cell.error.empty()) {
            sum += cell.sym_kl;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / count;
}

std::optional<double> EvalReport::paired_t(const std::string& method_a, const std::string& method_b,
                                           double fraction) const {
    std::map<NodeId, double> a, b;
    for (const EvalCell& cell : cells) {
        if (cell.fraction != fraction || !cell.error.empty()) continue;
        if (cell.method == method_a) a[cell.target] = cell.sym_kl;
        if (cell.method == method_b) b[cell.target] = cell.sym_kl;
    }
    std::vector<double> diffs;
    for (const auto& [target, value] : a) {
        auto it = b.find(target);
        if (it != b.end()) diffs.push_back(value - it->second);
    }
    if (diffs.size() < 2) return std::nullopt;
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    var /= static_cast<double>(diffs.size() - 1);
    if (var <= 0.0) return std::nullopt;
    return mean / std::sqrt(var / static_cast<double>(diffs.size()));
}

void EvalReport::write_long_csv(std::ostream& out) const {
    out << "method,target,fraction,sym_kl,wall_ms,msg_updates\n";
    for (const EvalCell& cell : cells) {
        if (!cell.error.empty()) continue;
        out << cell.method << "," << cell.target << "," << fmt(cell.fraction) << "," << fmt(cell.sym_kl) << ","
            << fmt(cell.wall_ms) << "," << cell.msg_updates << "\n";
    }
}

void EvalReport::write_summary(std::ostream& out) const {
    std::vector<std::string> methods;
    std::vector<double> fractions;
    for (const EvalCell& cell : cells) {
        if (std::find(methods.begin(), methods.end(), cell.method) == methods.end()) {
            methods.push_back(cell.method);
        }
        if (std::find(fractions.begin(), fractions.end(), cell.fraction) == fractions.end()) {
            fractions.push_back(cell.fraction);
        }
    }
    std::sort(fractions.begin(), fractions.end());

    out << "mean symmetric KL by method and restore fraction\n";
    out << "method";
    for (double f : fractions) out << "\tf=" << f;
    out << "\n";
    for (const std::string& m : methods) {
        out << m;
        for (double f : fractions) {
            auto v = mean(m, f);
            out << "\t";
            if (v.has_value()) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.6g", *v);
                out << buf;
            } else {
                out << "-";
            }
        }
        out << "\n";
    }
    int failures = 0;
    for (const EvalCell& cell : cells) {
        if (!cell.error.empty()) ++failures;
    }
    if (failures > 0) out << failures << " cell(s) failed\n";
    for (std::size_t i = 1; i < methods.size(); ++i) {
        for (double f : fractions) {
            auto t = paired_t(methods[0], methods[i], f);
            if (t.has_value()) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4g", *t);
                out << "paired t (" << methods[0] << " - " << methods[i] << ") at f=" << f << ": " << buf << "\n";
            }
        }
    }
}

EvalReport sweep_fractions(const Mrf& mrf, std::span<const NodeId> targets, std::span<const MethodSpec> methods,
                           std::span<const double> fractions, const BpConfig& config, int workers) {
    EvalReport report;
    const std::size_t groups = methods.size() * targets.size();
    std::vector<std::vector<EvalCell>> results(groups);

    // Reference beliefs are shared across methods; precompute per target.
    std::vector<Distribution> references(targets.size());
    parallel_for(targets.size(), workers, [&](std::size_t ti) {
        BpResult ref = run_bp(mrf, config);
        references[ti] = compute_belief(mrf, ref.messages, targets[ti]);
    });

    parallel_for(groups, workers, [&](std::size_t g) {
        const MethodSpec& method = methods[g / targets.size()];
        const std::size_t ti = g % targets.size();
        NodeId target = targets[ti];
        std::vector<EvalCell>& cells = results[g];
        try {
            Ranking ranking = method.run(mrf, target);
            for (double f : fractions) {
                EvalCell cell;
                cell.method = method.name;
                cell.target = target;
                cell.fraction = f;
                MaskedRunStats stats;
                cell.sym_kl = masked_fidelity(mrf, target, ranking, f, config, &references[ti], &stats);
                cell.wall_ms = stats.wall_ms;
                cell.msg_updates = stats.message_updates;
                cells.push_back(std::move(cell));
            }
        } catch (const std::exception& ex) {
            for (double f : fractions) {
                EvalCell cell;
                cell.method = method.name;
                cell.target = target;
                cell.fraction = f;
                cell.error = ex.what();
                cells.push_back(std::move(cell));
            }
        }
    });

    for (std::vector<EvalCell>& group : results) {
        for (EvalCell& cell : group) report.cells.push_back(std::move(cell));
    }
    return report;
}

SpeedupReport speedup_benchmark(const Mrf& mrf, NodeId target, const EnumConfig& enum_config,
                                const BpConfig& bp_config) {
    ExplainOptions adaptive_opts;
    ExplainOptions scratch_opts;
    scratch_opts.force_scratch = true;

    ExplanationResult adaptive = explain(mrf, target, enum_config, bp_config, adaptive_opts);
    ExplanationResult scratch = explain(mrf, target, enum_config, bp_config, scratch_opts);

    SpeedupReport report;
    report.wall_ms_adaptive = adaptive.diagnostics.wall_ms;
    report.wall_ms_scratch = scratch.diagnostics.wall_ms;
    report.total_adaptive = adaptive.diagnostics.bp_message_updates;
    report.total_scratch = scratch.diagnostics.bp_message_updates;

    const std::size_t visits = adaptive.diagnostics.visit_trace.size();
    if (scratch.diagnostics.visit_trace.size() != visits) {
        throw Error("speedup benchmark: enumeration diverged between modes");
    }
    report.rows.reserve(visits);
    for (std::size_t i = 0; i < visits; ++i) {
        const VisitTraceEntry& a = adaptive.diagnostics.visit_trace[i];
        const VisitTraceEntry& s = scratch.diagnostics.visit_trace[i];
        if (a.key != s.key) throw Error("speedup benchmark: visit order diverged between modes");
        report.rows.push_back({i, a.edge_count, a.cumulative_updates, s.cumulative_updates});
    }

    for (std::size_t i = 0; i < adaptive.attributions.size(); ++i) {
        double diff = std::abs(adaptive.attributions[i].shapley_value - scratch.attributions[i].shapley_value);
        report.max_sv_difference = std::max(report.max_sv_difference, diff);
    }
    return report;
}

std::vector<DSensitivityRow> d_sensitivity(const Mrf& mrf, std::span<const NodeId> targets,
                                           std::span<const int> d_values, int max_complexity,
                                           const BpConfig& bp_config, double fraction) {
    std::vector<Distribution> references(targets.size());
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        BpResult ref = run_bp(mrf, bp_config);
        references[ti] = compute_belief(mrf, ref.messages, targets[ti]);
    }

    std::vector<DSensitivityRow> rows;
    for (int d : d_values) {
        DSensitivityRow row;
        row.max_distance = d;
        EnumConfig enum_config;
        enum_config.max_distance = d;
        enum_config.max_complexity = max_complexity;
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            ExplanationResult result = explain(mrf, targets[ti], enum_config, bp_config);
            Ranking ranking = ranking_from_explanation(result);
            row.per_target.push_back(
                masked_fidelity(mrf, targets[ti], ranking, fraction, bp_config, &references[ti]));
        }
        double sum = 0.0;
        for (double v : row.per_target) sum += v;
        row.mean_sym_kl = row.per_target.empty() ? 0.0 : sum / static_cast<double>(row.per_target.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace mrfx
