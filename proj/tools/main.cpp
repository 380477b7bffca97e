// Command-line front end: load, infer, explain, baseline, eval, bench and
// generate subcommands over the library. Every run echoes its fully
// resolved configuration into the output directory; all result files except
// the timing fields are byte-identical across reruns of the same config.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mrfx/baselines.hpp"
#include "mrfx/bp.hpp"
#include "mrfx/errors.hpp"
#include "mrfx/eval.hpp"
#include "mrfx/io.hpp"
#include "mrfx/parallel.hpp"
#include "mrfx/shapley.hpp"
#include "mrfx/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mrfx;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitPartial = 3;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Options {
    std::string graph, priors, potentials;
    std::string out = "out";
    std::string targets = "all-uniform-prior-nodes";
    int max_distance = 3;
    int max_complexity = 8;
    double bp_tol = 1e-6;
    int bp_max_iters = 200;
    double damping = 0.0;
    std::string method = "random";
    std::string methods = "shapley,random,pagerank,sensitivity,mc_shapley";
    int samples = 100;
    std::uint64_t seed = 0;
    double fraction = 0.25;
    std::vector<double> fractions = {0.25, 0.5, 0.75, 1.0};
    std::string format = "csv";
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    std::vector<int> d_values;

    // synthetic inputs (generate subcommand and eval --synthetic mode)
    std::string synthetic;
    int instances = 1;
    int nodes = 50;
    int classes = 3;
    double homophily = 0.9;
    double bias_fraction = 0.8;
    double bias_strength = 0.9;

    BpConfig bp_config() const {
        BpConfig cfg;
        cfg.tolerance = bp_tol;
        cfg.max_iterations = bp_max_iters;
        cfg.damping = damping;
        return cfg;
    }
    EnumConfig enum_config() const {
        EnumConfig cfg;
        cfg.max_distance = max_distance;
        cfg.max_complexity = max_complexity;
        return cfg;
    }
    SyntheticConfig synthetic_config() const {
        SyntheticConfig cfg;
        cfg.kind = parse_graph_kind(synthetic.empty() ? "tree" : synthetic);
        cfg.nodes = nodes;
        cfg.classes = classes;
        cfg.homophily = homophily;
        cfg.biased_fraction = bias_fraction;
        cfg.bias_strength = bias_strength;
        cfg.seed = seed;
        return cfg;
    }
};

void add_input_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--graph", opt.graph, "edge list file, one 'u v' pair per line");
    cmd->add_option("--priors", opt.priors, "priors CSV (node,p_0,...,p_{c-1})");
    cmd->add_option("--potentials", opt.potentials, "potentials key-value file");
}

void add_bp_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--bp-tol", opt.bp_tol, "BP convergence tolerance");
    cmd->add_option("--bp-max-iters", opt.bp_max_iters, "BP sweep limit");
    cmd->add_option("--damping", opt.damping, "BP damping in [0,1)");
}

void add_enum_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--max-distance", opt.max_distance, "strict distance bound D on coalition nodes");
    cmd->add_option("--max-complexity", opt.max_complexity, "edge-count cap C per coalition");
}

void add_synthetic_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--nodes", opt.nodes, "node count");
    cmd->add_option("--classes", opt.classes, "class count");
    cmd->add_option("--homophily", opt.homophily, "diagonal strength of the shared potential");
    cmd->add_option("--bias-fraction", opt.bias_fraction, "fraction of class-biased priors");
    cmd->add_option("--bias-strength", opt.bias_strength, "prior mass on the planted class");
}

Mrf load_inputs(const Options& opt) {
    if (opt.graph.empty() || opt.priors.empty() || opt.potentials.empty()) {
        throw ValidationError("--graph, --priors and --potentials are required");
    }
    return load_mrf(opt.graph, opt.priors, opt.potentials);
}

std::vector<NodeId> resolve_targets(const Mrf& mrf, const std::string& spec) {
    std::vector<NodeId> targets;
    if (spec == "all-uniform-prior-nodes") {
        for (NodeId n = 0; n < mrf.node_count(); ++n) {
            if (is_uniform(mrf.prior(n))) targets.push_back(n);
        }
        if (targets.empty()) {
            throw ValidationError("no uniform-prior nodes found; pass --targets explicitly");
        }
        return targets;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        long value = 0;
        try {
            value = std::stol(item, &pos);
        } catch (const std::exception&) {
            throw ValidationError("invalid target '" + item + "'");
        }
        if (pos != item.size() || value < 0 || value >= mrf.node_count()) {
            throw ValidationError("invalid target '" + item + "'");
        }
        targets.push_back(static_cast<NodeId>(value));
    }
    if (targets.empty()) throw ValidationError("empty target list");
    return targets;
}

json base_config_json(const std::string& command, const Options& opt) {
    json cfg;
    cfg["command"] = command;
    cfg["graph"] = opt.graph;
    cfg["priors"] = opt.priors;
    cfg["potentials"] = opt.potentials;
    cfg["targets"] = opt.targets;
    cfg["max_distance"] = opt.max_distance;
    cfg["max_complexity"] = opt.max_complexity;
    cfg["bp_tol"] = opt.bp_tol;
    cfg["bp_max_iters"] = opt.bp_max_iters;
    cfg["damping"] = opt.damping;
    cfg["seed"] = opt.seed;
    cfg["out"] = opt.out;
    cfg["format"] = opt.format;
    cfg["workers"] = opt.workers;
    return cfg;
}

void write_config(const fs::path& dir, const json& cfg) {
    std::ofstream out(dir / "config.json");
    out << cfg.dump(2) << "\n";
}

fs::path prepare_out_dir(const Options& opt) {
    fs::path dir(opt.out);
    fs::create_directories(dir);
    return dir;
}

void check_method_name(const std::string& name) {
    static const char* known[] = {"shapley", "random", "pagerank", "sensitivity", "mc_shapley"};
    for (const char* k : known) {
        if (name == k) return;
    }
    throw ValidationError("unknown method '" + name +
                          "' (expected shapley, random, pagerank, sensitivity or mc_shapley)");
}

Ranking run_method(const std::string& name, const Mrf& mrf, NodeId target, const Options& opt) {
    if (name == "shapley") {
        return ranking_from_explanation(explain(mrf, target, opt.enum_config(), opt.bp_config()));
    }
    if (name == "random") return random_ranking(mrf, target, opt.seed);
    if (name == "pagerank") return pagerank_ranking(mrf, target);
    if (name == "sensitivity") return sensitivity_ranking(mrf, target, opt.bp_config());
    if (name == "mc_shapley") {
        return mc_shapley_ranking(mrf, target, opt.enum_config(), opt.bp_config(), opt.samples, opt.seed);
    }
    throw ValidationError("unknown method '" + name +
                          "' (expected shapley, random, pagerank, sensitivity or mc_shapley)");
}

std::vector<std::string> split_list(const std::string& spec) {
    std::vector<std::string> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------- commands

int cmd_generate(const Options& opt) {
    fs::path dir = prepare_out_dir(opt);
    Mrf mrf = generate_synthetic(opt.synthetic_config());
    save_mrf(mrf, dir / "graph.txt", dir / "priors.csv", dir / "potentials.txt");
    json cfg = base_config_json("generate", opt);
    cfg["synthetic"] = opt.synthetic.empty() ? "tree" : opt.synthetic;
    cfg["nodes"] = opt.nodes;
    cfg["classes"] = opt.classes;
    cfg["homophily"] = opt.homophily;
    cfg["bias_fraction"] = opt.bias_fraction;
    cfg["bias_strength"] = opt.bias_strength;
    write_config(dir, cfg);
    std::cout << "wrote " << (dir / "graph.txt").string() << " (" << mrf.node_count() << " nodes, "
              << mrf.edge_count() << " edges)\n";
    return kExitOk;
}

int cmd_infer(const Options& opt) {
    Mrf mrf = load_inputs(opt);
    fs::path dir = prepare_out_dir(opt);
    BpResult result = run_bp(mrf, opt.bp_config());
    {
        std::ofstream out(dir / "beliefs.csv");
        out << "node";
        for (int x = 0; x < mrf.class_count(); ++x) out << ",b_" << x;
        out << "\n";
        for (NodeId n = 0; n < mrf.node_count(); ++n) {
            Distribution b = compute_belief(mrf, result.messages, n);
            out << n;
            for (double v : b.probs) out << "," << fmt17(v);
            out << "\n";
        }
    }
    {
        json report;
        report["converged"] = result.converged;
        report["iterations"] = result.iterations_used;
        report["message_updates"] = result.message_updates;
        report["tolerance"] = opt.bp_tol;
        report["max_iterations"] = opt.bp_max_iters;
        report["damping"] = opt.damping;
        std::ofstream out(dir / "convergence.json");
        out << report.dump(2) << "\n";
    }
    write_config(dir, base_config_json("infer", opt));
    if (!result.converged) {
        std::cerr << "warning: BP did not converge within " << opt.bp_max_iters << " iterations\n";
    }
    return kExitOk;
}

void write_explanation_csv(const fs::path& path, const ExplanationResult& result) {
    std::ofstream out(path);
    out << "node,shapley_value,coalition_count\n";
    for (NodeId node : result.ranking) {
        const NodeAttribution& a =
            result.attributions[static_cast<std::size_t>(node > result.target ? node - 1 : node)];
        out << node << "," << fmt17(a.shapley_value) << "," << a.coalition_count << "\n";
    }
}

json explanation_json(const ExplanationResult& result) {
    json doc;
    doc["target"] = result.target;
    doc["reference_converged"] = result.diagnostics.reference_converged;
    doc["coalitions"] = result.diagnostics.coalitions;
    doc["bp_message_updates"] = result.diagnostics.bp_message_updates;
    doc["reference_updates"] = result.diagnostics.reference_updates;
    doc["wall_ms"] = result.diagnostics.wall_ms;
    return doc;
}

int cmd_explain(const Options& opt) {
    Mrf mrf = load_inputs(opt);
    std::vector<NodeId> targets = resolve_targets(mrf, opt.targets);
    fs::path dir = prepare_out_dir(opt);
    write_config(dir, base_config_json("explain", opt));

    std::mutex log_mutex;
    std::vector<std::string> failures(targets.size());
    parallel_for(targets.size(), opt.workers, [&](std::size_t i) {
        NodeId target = targets[i];
        try {
            ExplainOptions options;
            options.record_trace = false;
            ExplanationResult result = explain(mrf, target, opt.enum_config(), opt.bp_config(), options);
            if (opt.format == "json") {
                json doc = explanation_json(result);
                doc["ranking"] = result.ranking;
                json rows = json::array();
                for (const NodeAttribution& a : result.attributions) {
                    rows.push_back({{"node", a.node},
                                    {"shapley_value", a.shapley_value},
                                    {"coalition_count", a.coalition_count}});
                }
                doc["attributions"] = rows;
                std::ofstream out(dir / ("result_" + std::to_string(target) + ".json"));
                out << doc.dump(2) << "\n";
            } else {
                write_explanation_csv(dir / ("ranking_" + std::to_string(target) + ".csv"), result);
                std::ofstream out(dir / ("diagnostics_" + std::to_string(target) + ".json"));
                out << explanation_json(result).dump(2) << "\n";
            }
        } catch (const std::exception& ex) {
            std::lock_guard<std::mutex> lock(log_mutex);
            failures[i] = ex.what();
            std::cerr << "target " << target << " failed: " << ex.what() << "\n";
        }
    });
    for (const std::string& f : failures) {
        if (!f.empty()) return kExitPartial;
    }
    return kExitOk;
}

int cmd_baseline(const Options& opt) {
    check_method_name(opt.method);
    Mrf mrf = load_inputs(opt);
    std::vector<NodeId> targets = resolve_targets(mrf, opt.targets);
    fs::path dir = prepare_out_dir(opt);
    json cfg = base_config_json("baseline", opt);
    cfg["method"] = opt.method;
    cfg["samples"] = opt.samples;
    write_config(dir, cfg);

    std::mutex log_mutex;
    std::vector<std::string> failures(targets.size());
    parallel_for(targets.size(), opt.workers, [&](std::size_t i) {
        NodeId target = targets[i];
        try {
            Ranking ranking = run_method(opt.method, mrf, target, opt);
            std::ofstream out(dir / ("ranking_" + opt.method + "_" + std::to_string(target) + ".csv"));
            out << "node,score,method\n";
            std::vector<double> by_node(static_cast<std::size_t>(mrf.node_count()), 0.0);
            for (const auto& [node, score] : ranking.scores) by_node[static_cast<std::size_t>(node)] = score;
            for (NodeId node : ranking.order) {
                out << node << "," << fmt17(by_node[static_cast<std::size_t>(node)]) << "," << ranking.method
                    << "\n";
            }
        } catch (const std::exception& ex) {
            std::lock_guard<std::mutex> lock(log_mutex);
            failures[i] = ex.what();
            std::cerr << "target " << target << " failed: " << ex.what() << "\n";
        }
    });
    for (const std::string& f : failures) {
        if (!f.empty()) return kExitPartial;
    }
    return kExitOk;
}

void write_fraction_sweep_csv(const fs::path& path, const EvalReport& report,
                              const std::vector<std::string>& methods, std::span<const double> fractions) {
    std::ofstream out(path);
    out << "fraction,method,mean_sym_kl\n";
    for (double f : fractions) {
        for (const std::string& m : methods) {
            auto v = report.mean(m, f);
            if (v.has_value()) out << fmt17(f) << "," << m << "," << fmt17(*v) << "\n";
        }
    }
}

int cmd_eval(const Options& opt) {
    fs::path dir = prepare_out_dir(opt);
    std::vector<std::string> methods = split_list(opt.methods);
    if (methods.empty()) throw ValidationError("--methods is empty");

    std::vector<MethodSpec> specs;
    for (const std::string& name : methods) {
        check_method_name(name);
        specs.push_back({name, [name, &opt](const Mrf& g, NodeId t) { return run_method(name, g, t, opt); }});
    }

    json cfg = base_config_json("eval", opt);
    cfg["methods"] = methods;
    cfg["fractions"] = opt.fractions;
    cfg["samples"] = opt.samples;

    EvalReport report;
    if (!opt.synthetic.empty()) {
        // Seeded multi-instance suite: one explained target per instance;
        // the target column of the report holds the instance index.
        cfg["synthetic"] = opt.synthetic;
        cfg["instances"] = opt.instances;
        cfg["nodes"] = opt.nodes;
        cfg["classes"] = opt.classes;
        cfg["homophily"] = opt.homophily;
        cfg["bias_fraction"] = opt.bias_fraction;
        cfg["bias_strength"] = opt.bias_strength;
        for (int inst = 0; inst < opt.instances; ++inst) {
            SyntheticConfig synth = opt.synthetic_config();
            synth.seed = opt.seed + static_cast<std::uint64_t>(inst);
            Mrf mrf = generate_synthetic(synth);
            NodeId target = 0;
            for (NodeId n = 0; n < mrf.node_count(); ++n) {
                if (is_uniform(mrf.prior(n))) {
                    target = n;
                    break;
                }
            }
            std::vector<NodeId> targets{target};
            EvalReport part =
                sweep_fractions(mrf, targets, specs, opt.fractions, opt.bp_config(), opt.workers);
            for (EvalCell& cell : part.cells) {
                cell.target = static_cast<NodeId>(inst);
                report.cells.push_back(std::move(cell));
            }
        }
    } else {
        Mrf mrf = load_inputs(opt);
        std::vector<NodeId> targets = resolve_targets(mrf, opt.targets);
        report = sweep_fractions(mrf, targets, specs, opt.fractions, opt.bp_config(), opt.workers);

        if (!opt.d_values.empty()) {
            std::vector<DSensitivityRow> rows =
                d_sensitivity(mrf, targets, opt.d_values, opt.max_complexity, opt.bp_config(), opt.fraction);
            std::ofstream out(dir / "d_sweep.csv");
            out << "max_distance,mean_sym_kl\n";
            for (const DSensitivityRow& row : rows) {
                out << row.max_distance << "," << fmt17(row.mean_sym_kl) << "\n";
            }
            cfg["d_values"] = opt.d_values;
        }
    }

    write_config(dir, cfg);
    {
        std::ofstream out(dir / "eval_long.csv");
        report.write_long_csv(out);
    }
    write_fraction_sweep_csv(dir / "fraction_sweep.csv", report, methods, opt.fractions);
    {
        std::ofstream out(dir / "summary.txt");
        report.write_summary(out);
    }
    int failures = 0;
    for (const EvalCell& cell : report.cells) {
        if (!cell.error.empty()) ++failures;
    }
    if (failures > 0) {
        std::cerr << failures << " eval cell(s) failed; see summary.txt\n";
        return kExitPartial;
    }
    return kExitOk;
}

int cmd_bench(const Options& opt) {
    Mrf mrf = load_inputs(opt);
    std::vector<NodeId> targets = resolve_targets(mrf, opt.targets);
    fs::path dir = prepare_out_dir(opt);
    write_config(dir, base_config_json("bench", opt));

    NodeId target = targets.front();
    SpeedupReport report = speedup_benchmark(mrf, target, opt.enum_config(), opt.bp_config());
    {
        std::ofstream out(dir / "speedup_curve.csv");
        out << "coalition_index,coalition_size,cumulative_updates_adaptive,cumulative_updates_scratch\n";
        for (const SpeedupRow& row : report.rows) {
            out << row.index << "," << row.coalition_size << "," << row.cumulative_adaptive << ","
                << row.cumulative_scratch << "\n";
        }
    }
    {
        json doc;
        doc["target"] = target;
        doc["total_updates_adaptive"] = report.total_adaptive;
        doc["total_updates_scratch"] = report.total_scratch;
        doc["wall_ms_adaptive"] = report.wall_ms_adaptive;
        doc["wall_ms_scratch"] = report.wall_ms_scratch;
        doc["max_sv_difference"] = report.max_sv_difference;
        std::ofstream out(dir / "bench.json");
        out << doc.dump(2) << "\n";
    }
    if (report.max_sv_difference > 1e-6) {
        std::cerr << "warning: adaptive and scratch Shapley values diverged by " << report.max_sv_difference
                  << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shapley-value explanations for belief propagation on discrete MRFs"};
    app.require_subcommand(1);
    Options opt;

    CLI::App* generate = app.add_subcommand("generate", "write a seeded synthetic MRF to disk");
    generate->add_option("--kind", opt.synthetic, "tree | erdos-renyi | small-world")->required();
    add_synthetic_flags(generate, opt);
    generate->add_option("--seed", opt.seed, "generator seed");
    generate->add_option("--out", opt.out, "output directory")->required();

    CLI::App* infer = app.add_subcommand("infer", "run BP and write per-node beliefs");
    add_input_flags(infer, opt);
    add_bp_flags(infer, opt);
    infer->add_option("--out", opt.out, "output directory")->required();

    CLI::App* explain_cmd = app.add_subcommand("explain", "Shapley explanation per target");
    add_input_flags(explain_cmd, opt);
    add_bp_flags(explain_cmd, opt);
    add_enum_flags(explain_cmd, opt);
    explain_cmd->add_option("--targets", opt.targets, "comma list of ids or 'all-uniform-prior-nodes'");
    explain_cmd->add_option("--format", opt.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    explain_cmd->add_option("--workers", opt.workers, "parallel targets");
    explain_cmd->add_option("--out", opt.out, "output directory")->required();

    CLI::App* baseline = app.add_subcommand("baseline", "baseline explainer per target");
    add_input_flags(baseline, opt);
    add_bp_flags(baseline, opt);
    add_enum_flags(baseline, opt);
    baseline->add_option("--method", opt.method, "random | pagerank | sensitivity | mc_shapley")->required();
    baseline->add_option("--targets", opt.targets, "comma list of ids or 'all-uniform-prior-nodes'");
    baseline->add_option("--samples", opt.samples, "MC sample count");
    baseline->add_option("--seed", opt.seed, "seed for stochastic methods");
    baseline->add_option("--workers", opt.workers, "parallel targets");
    baseline->add_option("--out", opt.out, "output directory")->required();

    CLI::App* eval_cmd = app.add_subcommand("eval", "masked-fidelity protocol across methods");
    add_input_flags(eval_cmd, opt);
    add_bp_flags(eval_cmd, opt);
    add_enum_flags(eval_cmd, opt);
    eval_cmd->add_option("--targets", opt.targets, "comma list of ids or 'all-uniform-prior-nodes'");
    eval_cmd->add_option("--methods", opt.methods, "comma list of methods to compare");
    eval_cmd->add_option("--fractions", opt.fractions, "restore fractions to sweep")->delimiter(',');
    eval_cmd->add_option("--fraction", opt.fraction, "fraction for the D sweep");
    eval_cmd->add_option("--d-values", opt.d_values, "distance bounds for the D sweep")->delimiter(',');
    eval_cmd->add_option("--samples", opt.samples, "MC sample count");
    eval_cmd->add_option("--seed", opt.seed, "base seed");
    eval_cmd->add_option("--synthetic", opt.synthetic, "run on seeded synthetic instances of this kind");
    eval_cmd->add_option("--instances", opt.instances, "synthetic instance count");
    add_synthetic_flags(eval_cmd, opt);
    eval_cmd->add_option("--workers", opt.workers, "parallel cells");
    eval_cmd->add_option("--out", opt.out, "output directory")->required();

    CLI::App* bench = app.add_subcommand("bench", "adaptive vs scratch BP update counts");
    add_input_flags(bench, opt);
    add_bp_flags(bench, opt);
    add_enum_flags(bench, opt);
    bench->add_option("--targets", opt.targets, "first listed target is benchmarked");
    bench->add_option("--out", opt.out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(opt);
        if (infer->parsed()) return cmd_infer(opt);
        if (explain_cmd->parsed()) return cmd_explain(opt);
        if (baseline->parsed()) return cmd_baseline(opt);
        if (eval_cmd->parsed()) return cmd_eval(opt);
        if (bench->parsed()) return cmd_bench(opt);
    } catch (const NumericalError& ex) {
        std::cerr << "numerical error: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInput;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
