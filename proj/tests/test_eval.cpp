#include <random>
#include <sstream>

#include "doctest.h"
#include "mrfx/errors.hpp"
#include "mrfx/eval.hpp"
#include "mrfx/shapley.hpp"
#include "mrfx/synthetic.hpp"
#include "oracles.hpp"

using namespace mrfx;

namespace {

Ranking manual_ranking(NodeId target, std::vector<NodeId> order) {
    Ranking r;
    r.target = target;
    r.method = "manual";
    double score = static_cast<double>(order.size());
    for (NodeId n : order) r.scores.emplace_back(n, score--);
    std::sort(r.scores.begin(), r.scores.end());
    r.order = std::move(order);
    return r;
}

} // namespace

TEST_CASE("masked fidelity: restoring everything recovers the reference") {
    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 5; ++rep) {
        Mrf m = oracles::random_graph_mrf(8, 3, 12, rng);
        Ranking r = random_ranking(m, 0, rep);
        CHECK(masked_fidelity(m, 0, r, 1.0, {}) <= 1e-9);
    }
}

TEST_CASE("masked fidelity: all-uniform priors make masking a no-op") {
    std::mt19937_64 rng(52);
    std::vector<Distribution> priors(7, Distribution::uniform(2));
    std::vector<Edge> edges = oracles::random_tree_edges(7, rng);
    std::vector<CompatibilityMatrix> pots(edges.size(), CompatibilityMatrix::homophily(2, 0.9));
    Mrf m(2, priors, edges, pots);
    for (double f : {0.2, 0.5, 1.0}) {
        CHECK(masked_fidelity(m, 0, random_ranking(m, 0, 1), f, {}) <= 1e-12);
    }
}

TEST_CASE("masked fidelity: informative ranking beats its reverse") {
    // 10-node star-ish tree; nodes 1..3 carry strong priors, the rest are
    // uniform. Restoring the informative nodes first must approximate the
    // reference better than restoring them last.
    std::vector<Distribution> priors(10, Distribution::uniform(2));
    priors[1] = Distribution(std::vector<double>{0.95, 0.05});
    priors[2] = Distribution(std::vector<double>{0.9, 0.1});
    priors[3] = Distribution(std::vector<double>{0.05, 0.95});
    std::vector<Edge> edges{{0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {2, 6}, {2, 7}, {3, 8}, {3, 9}};
    std::vector<CompatibilityMatrix> pots(edges.size(), CompatibilityMatrix::homophily(2, 0.85));
    Mrf m(2, priors, edges, pots);

    std::vector<NodeId> good{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<NodeId> bad(good.rbegin(), good.rend());
    double fraction = 3.0 / 9.0; // restores exactly three nodes
    double kl_good = masked_fidelity(m, 0, manual_ranking(0, good), fraction, {});
    double kl_bad = masked_fidelity(m, 0, manual_ranking(0, bad), fraction, {});
    CHECK(kl_good < kl_bad);
    CHECK(kl_good <= 1e-9); // the three informative nodes are the only information
}

TEST_CASE("masked fidelity validates the fraction") {
    std::mt19937_64 rng(53);
    Mrf m = oracles::random_tree_mrf(5, 2, rng);
    Ranking r = random_ranking(m, 0, 1);
    CHECK_THROWS_AS(masked_fidelity(m, 0, r, 0.0, {}), ContractError);
    CHECK_THROWS_AS(masked_fidelity(m, 0, r, 1.5, {}), ContractError);
    CHECK_THROWS_AS(masked_fidelity(m, 1, r, 0.5, {}), ContractError); // wrong target
}

TEST_CASE("sweep_fractions crosses methods, targets and fractions") {
    std::mt19937_64 rng(54);
    Mrf m = oracles::random_tree_mrf(9, 2, rng);
    std::vector<MethodSpec> methods{
        {"random", [](const Mrf& g, NodeId t) { return random_ranking(g, t, 1); }},
        {"pagerank", [](const Mrf& g, NodeId t) { return pagerank_ranking(g, t); }},
    };
    std::vector<NodeId> targets{0, 4};
    std::vector<double> fractions{0.25, 1.0};
    EvalReport report = sweep_fractions(m, targets, methods, fractions, {}, 2);
    CHECK(report.cells.size() == 8);
    CHECK(report.mean("random", 1.0).value() <= 1e-9);
    CHECK(report.mean("pagerank", 1.0).value() <= 1e-9);
    CHECK(report.mean("random", 0.25).has_value());
    CHECK_FALSE(report.mean("nope", 0.25).has_value());

    std::ostringstream csv;
    report.write_long_csv(csv);
    CHECK(csv.str().find("method,target,fraction,sym_kl,wall_ms,msg_updates") == 0);
    std::ostringstream summary;
    report.write_summary(summary);
    CHECK(summary.str().find("pagerank") != std::string::npos);
}

TEST_CASE("sweep_fractions records per-cell failures without aborting") {
    std::mt19937_64 rng(55);
    Mrf m = oracles::random_tree_mrf(6, 2, rng);
    std::vector<MethodSpec> methods{
        {"broken", [](const Mrf&, NodeId) -> Ranking { throw NumericalError("expected failure"); }},
        {"random", [](const Mrf& g, NodeId t) { return random_ranking(g, t, 1); }},
    };
    std::vector<NodeId> targets{0};
    std::vector<double> fractions{0.5};
    EvalReport report = sweep_fractions(m, targets, methods, fractions, {}, 1);
    REQUIRE(report.cells.size() == 2);
    int failed = 0;
    for (const EvalCell& cell : report.cells) {
        if (!cell.error.empty()) {
            ++failed;
            CHECK(cell.method == "broken");
            CHECK(cell.error.find("expected failure") != std::string::npos);
        }
    }
    CHECK(failed == 1);
    CHECK_FALSE(report.mean("broken", 0.5).has_value());
    CHECK(report.mean("random", 0.5).has_value());
}

TEST_CASE("speedup benchmark: single edge has nothing to reuse") {
    std::vector<Distribution> priors{Distribution::uniform(2), Distribution(std::vector<double>{0.8, 0.2})};
    Mrf m(2, priors, {{0, 1}}, {CompatibilityMatrix::homophily(2, 0.9)});
    EnumConfig cfg;
    cfg.max_distance = kUnbounded;
    cfg.max_complexity = kUnbounded;
    SpeedupReport report = speedup_benchmark(m, 0, cfg, {});
    REQUIRE(report.rows.size() == 1);
    CHECK(report.total_adaptive == report.total_scratch);
    CHECK(report.max_sv_difference <= 1e-12);
}

TEST_CASE("speedup benchmark: path graphs favor warm starts") {
    std::mt19937_64 rng(56);
    const int n = 10;
    std::vector<Distribution> priors;
    for (int i = 0; i < n; ++i) priors.push_back(oracles::random_distribution(2, rng));
    std::vector<Edge> edges;
    for (NodeId i = 0; i + 1 < n; ++i) edges.push_back({i, static_cast<NodeId>(i + 1)});
    std::vector<CompatibilityMatrix> pots(edges.size(), CompatibilityMatrix::homophily(2, 0.8));
    Mrf m(2, priors, edges, pots);

    EnumConfig cfg;
    cfg.max_distance = kUnbounded;
    cfg.max_complexity = kUnbounded;
    SpeedupReport report = speedup_benchmark(m, 0, cfg, {});
    CHECK(report.rows.size() == 9); // path segments from the end node
    CHECK(report.total_adaptive < report.total_scratch);
    CHECK(report.max_sv_difference <= 1e-6);
    // cumulative counts are monotone and aligned row by row
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        CHECK(report.rows[i].cumulative_adaptive >= report.rows[i - 1].cumulative_adaptive);
        CHECK(report.rows[i].cumulative_scratch >= report.rows[i - 1].cumulative_scratch);
    }
}

TEST_CASE("d sensitivity: direct neighbors only under the tightest bound") {
    std::mt19937_64 rng(57);
    Mrf m = oracles::random_tree_mrf(9, 2, rng);
    // max_distance = 2 admits only distance-1 nodes (the test is strict)
    EnumConfig cfg;
    cfg.max_distance = 2;
    cfg.max_complexity = kUnbounded;
    ExplanationResult result = explain(m, 0, cfg, {});
    std::vector<int> dist = bfs_distances(m, 0);
    for (const NodeAttribution& a : result.attributions) {
        if (dist[static_cast<std::size_t>(a.node)] > 1) {
            CHECK(a.coalition_count == 0);
            CHECK(a.shapley_value == 0.0);
        } else {
            CHECK(a.coalition_count > 0);
        }
    }
}

TEST_CASE("d sensitivity: values saturate once the ball covers the graph") {
    std::mt19937_64 rng(58);
    Mrf m = oracles::random_tree_mrf(7, 2, rng);
    std::vector<NodeId> targets{0};
    std::vector<int> ds{4, 8, 16};
    // depth <= 6, so 8 and 16 admit every node
    std::vector<DSensitivityRow> rows = d_sensitivity(m, targets, ds, 6, {});
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].mean_sym_kl == doctest::Approx(rows[2].mean_sym_kl).epsilon(1e-12));
}

TEST_CASE("synthetic generation: shapes, determinism, validation") {
    SyntheticConfig cfg;
    cfg.kind = GraphKind::Tree;
    cfg.nodes = 50;
    cfg.classes = 3;
    cfg.seed = 17;
    Mrf a = generate_synthetic(cfg);
    Mrf b = generate_synthetic(cfg);
    CHECK(a.node_count() == 50);
    CHECK(a.edge_count() == 49);
    REQUIRE(b.edge_count() == a.edge_count());
    for (EdgeId e = 0; e < a.edge_count(); ++e) {
        CHECK(a.edge(e).u == b.edge(e).u);
        CHECK(a.edge(e).v == b.edge(e).v);
    }
    for (NodeId n = 0; n < a.node_count(); ++n) {
        for (int x = 0; x < 3; ++x) CHECK(a.prior(n)[x] == b.prior(n)[x]); // bitwise
    }

    cfg.kind = GraphKind::ErdosRenyi;
    Mrf er = generate_synthetic(cfg);
    CHECK(er.node_count() == 50);

    cfg.kind = GraphKind::SmallWorld;
    Mrf sw = generate_synthetic(cfg);
    CHECK(sw.node_count() == 50);
    CHECK(sw.edge_count() >= 50); // ring lattice with k = 4 keeps ~2n edges

    SyntheticConfig bad = cfg;
    bad.nodes = 1;
    CHECK_THROWS_AS(generate_synthetic(bad), ValidationError);
    bad = cfg;
    bad.homophily = 0.0;
    CHECK_THROWS_AS(generate_synthetic(bad), ValidationError);
    bad = cfg;
    bad.biased_fraction = 1.5;
    CHECK_THROWS_AS(generate_synthetic(bad), ValidationError);

    CHECK(parse_graph_kind("tree") == GraphKind::Tree);
    CHECK(parse_graph_kind("erdos-renyi") == GraphKind::ErdosRenyi);
    CHECK(parse_graph_kind("small-world") == GraphKind::SmallWorld);
    CHECK_THROWS_AS(parse_graph_kind("mesh"), ValidationError);
}

TEST_CASE("synthetic: homophily 1/c decouples beliefs from the graph") {
    SyntheticConfig cfg;
    cfg.kind = GraphKind::Tree;
    cfg.nodes = 12;
    cfg.classes = 3;
    cfg.homophily = 1.0 / 3.0;
    cfg.seed = 5;
    Mrf m = generate_synthetic(cfg);
    BpResult r = run_bp(m, {});
    REQUIRE(r.converged);
    for (NodeId n = 0; n < m.node_count(); ++n) {
        Distribution b = compute_belief(m, r.messages, n);
        for (int x = 0; x < 3; ++x) {
            CHECK(b[x] == doctest::Approx(m.prior(n)[x]).epsilon(1e-12));
        }
    }
}

TEST_CASE("synthetic: biased fraction zero leaves every prior uniform") {
    SyntheticConfig cfg;
    cfg.nodes = 20;
    cfg.classes = 4;
    cfg.biased_fraction = 0.0;
    cfg.seed = 9;
    Mrf m = generate_synthetic(cfg);
    for (NodeId n = 0; n < m.node_count(); ++n) {
        CHECK(is_uniform(m.prior(n)));
    }
}

TEST_CASE("paired t statistic on hand-built cells") {
    EvalReport report;
    for (NodeId t = 0; t < 4; ++t) {
        report.cells.push_back({"a", t, 0.25, 0.10 + 0.01 * t, 0.0, 0, ""});
        report.cells.push_back({"b", t, 0.25, 0.20 + 0.02 * t, 0.0, 0, ""});
    }
    auto t_ab = report.paired_t("a", "b", 0.25);
    REQUIRE(t_ab.has_value());
    CHECK(*t_ab < 0.0); // a scores lower KL than b on every pair
    CHECK_FALSE(report.paired_t("a", "missing", 0.25).has_value());
}
