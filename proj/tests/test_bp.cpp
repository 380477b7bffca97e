#include <cstring>
#include <random>

#include "doctest.h"
#include "mrfx/bp.hpp"
#include "mrfx/brute_force.hpp"
#include "mrfx/errors.hpp"
#include "oracles.hpp"

using namespace mrfx;

namespace {

bool messages_identical(const MessageSet& a, const MessageSet& b) {
    if (a.size() != b.size()) return false;
    auto ea = a.entries();
    auto eb = b.entries();
    for (std::size_t i = 0; i < ea.size(); ++i) {
        if (ea[i].key != eb[i].key) return false;
        if (std::memcmp(ea[i].value.probs.data(), eb[i].value.probs.data(),
                        ea[i].value.probs.size() * sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("single node graph: empty message set, zero iterations") {
    std::vector<Distribution> priors{Distribution(std::vector<double>{0.2, 0.8})};
    Mrf m(2, priors, {}, {});
    BpResult r = run_bp(m, {});
    CHECK(r.converged);
    CHECK(r.iterations_used == 0);
    CHECK(r.message_updates == 0);
    CHECK(r.messages.size() == 0);

    Distribution b = compute_belief(m, r.messages, 0);
    CHECK(b[0] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("all-ones potential decouples a chain") {
    std::vector<Distribution> priors{Distribution(std::vector<double>{0.7, 0.3}),
                                     Distribution(std::vector<double>{0.4, 0.6})};
    Mrf m(2, priors, {{0, 1}}, {CompatibilityMatrix::constant(2, 1.0)});
    BpResult r = run_bp(m, {});
    REQUIRE(r.converged);
    for (const auto& entry : r.messages.entries()) {
        CHECK(entry.value[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK(compute_belief(m, r.messages, 0)[0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(compute_belief(m, r.messages, 1)[1] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("identity potential copies a delta along a chain") {
    std::vector<Distribution> priors{Distribution(std::vector<double>{1.0, 0.0}), Distribution::uniform(2)};
    Mrf m(2, priors, {{0, 1}}, {CompatibilityMatrix::identity(2)});
    BpResult r = run_bp(m, {});
    REQUIRE(r.converged);
    Distribution b = compute_belief(m, r.messages, 1);
    CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tree beliefs match the joint-enumeration oracle") {
    std::mt19937_64 rng(5);
    BpConfig cfg;
    cfg.tolerance = 1e-10;
    for (int rep = 0; rep < 10; ++rep) {
        Mrf m = oracles::random_tree_mrf(8, 3, rng);
        BpResult r = run_bp(m, cfg);
        REQUIRE(r.converged);
        for (NodeId n = 0; n < m.node_count(); ++n) {
            Distribution b = compute_belief(m, r.messages, n);
            Distribution want = brute_force_marginal(m, n);
            for (int x = 0; x < 3; ++x) {
                CHECK(b[x] == doctest::Approx(want[x]).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("every message and belief stays normalized") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 10; ++rep) {
        Mrf m = oracles::random_graph_mrf(9, 3, 14, rng);
        BpResult r = run_bp(m, {});
        for (const auto& entry : r.messages.entries()) {
            CHECK(entry.value.is_valid(1e-9));
        }
        for (NodeId n = 0; n < m.node_count(); ++n) {
            CHECK(compute_belief(m, r.messages, n).is_valid(1e-9));
        }
    }
}

TEST_CASE("identical runs are bitwise identical") {
    std::mt19937_64 rng(7);
    Mrf m = oracles::random_graph_mrf(10, 3, 16, rng);
    BpResult a = run_bp(m, {});
    BpResult b = run_bp(m, {});
    CHECK(a.converged == b.converged);
    CHECK(a.iterations_used == b.iterations_used);
    CHECK(a.message_updates == b.message_updates);
    CHECK(messages_identical(a.messages, b.messages));
}

TEST_CASE("uniform potentials leave beliefs at priors") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<Distribution> priors;
        for (int i = 0; i < 7; ++i) priors.push_back(oracles::random_distribution(3, rng));
        std::vector<Edge> edges = oracles::random_tree_edges(7, rng);
        std::vector<CompatibilityMatrix> pots(edges.size(), CompatibilityMatrix::constant(3, 1.0));
        Mrf m(3, priors, edges, pots);
        BpResult r = run_bp(m, {});
        REQUIRE(r.converged);
        for (NodeId n = 0; n < m.node_count(); ++n) {
            Distribution b = compute_belief(m, r.messages, n);
            for (int x = 0; x < 3; ++x) {
                CHECK(b[x] == doctest::Approx(m.prior(n)[x]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("non-convergence is reported, beliefs still usable") {
    // Antiferromagnetic triangle oscillates under synchronous updates.
    std::vector<Distribution> priors{Distribution(std::vector<double>{0.9, 0.1}), Distribution::uniform(2),
                                     Distribution::uniform(2)};
    std::vector<Edge> edges{{0, 1}, {1, 2}, {0, 2}};
    CompatibilityMatrix anti(2, {0.05, 0.95, 0.95, 0.05});
    std::vector<CompatibilityMatrix> pots(3, anti);
    Mrf m(2, priors, edges, pots);
    BpConfig cfg;
    cfg.max_iterations = 50;
    BpResult r = run_bp(m, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations_used == 50);
    for (NodeId n = 0; n < 3; ++n) {
        CHECK(compute_belief(m, r.messages, n).is_valid(1e-9));
    }
    // Damping settles the same fixed point.
    cfg.damping = 0.5;
    cfg.max_iterations = 500;
    BpResult damped = run_bp(m, cfg);
    CHECK(damped.converged);
}

TEST_CASE("message annihilation raises a numerical error naming the edge") {
    // Star center 0 with four delta leaves, two per class, identity
    // potentials: the center's outgoing message underflows to zero.
    std::vector<Distribution> priors{Distribution::uniform(2), Distribution::delta(2, 0),
                                     Distribution::delta(2, 1), Distribution::delta(2, 0),
                                     Distribution::delta(2, 1), Distribution::uniform(2)};
    std::vector<Edge> edges{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};
    std::vector<CompatibilityMatrix> pots(5, CompatibilityMatrix::identity(2));
    Mrf m(2, priors, edges, pots);
    CHECK_THROWS_WITH_AS(run_bp(m, {}), doctest::Contains("0->5"), NumericalError);
}

TEST_CASE("warm start with keys outside the active set is rejected") {
    std::mt19937_64 rng(9);
    Mrf m = oracles::random_tree_mrf(5, 2, rng);
    BpResult full = run_bp(m, {});
    std::vector<EdgeId> partial{0, 1};
    CHECK_THROWS_AS(run_bp_on(m, partial, {}, &full.messages), ContractError);
}

TEST_CASE("adaptive_bp on an empty base equals scratch") {
    std::mt19937_64 rng(10);
    Mrf m = oracles::random_tree_mrf(4, 2, rng);
    MessageSet empty;
    BpResult grown = adaptive_bp(m, {}, empty, {m.edge(0).u, m.edge(0).v}, {});
    std::vector<EdgeId> single{0};
    BpResult scratch = run_bp_on(m, single, {});
    CHECK(grown.converged);
    CHECK(messages_identical(grown.messages, scratch.messages));
    CHECK(grown.message_updates == scratch.message_updates);
}

TEST_CASE("adaptive_bp matches scratch on growing subgraphs") {
    std::mt19937_64 rng(11);
    BpConfig cfg;
    for (int rep = 0; rep < 10; ++rep) {
        Mrf m = oracles::random_tree_mrf(9, 3, rng);
        // grow edge by edge in a connected order starting from node 0
        std::vector<EdgeId> base;
        std::vector<char> in_tree(static_cast<std::size_t>(m.node_count()), 0);
        in_tree[0] = 1;
        MessageSet messages;
        for (int step = 0; step < m.edge_count(); ++step) {
            EdgeId next = -1;
            NodeId anchor = -1, fresh = -1;
            for (EdgeId e = 0; e < m.edge_count(); ++e) {
                const Edge& ed = m.edge(e);
                bool have_u = in_tree[static_cast<std::size_t>(ed.u)] != 0;
                bool have_v = in_tree[static_cast<std::size_t>(ed.v)] != 0;
                if (have_u != have_v) {
                    next = e;
                    anchor = have_u ? ed.u : ed.v;
                    fresh = have_u ? ed.v : ed.u;
                    break;
                }
            }
            REQUIRE(next >= 0);
            BpResult grown = adaptive_bp(m, base, messages, {anchor, fresh}, cfg);
            base.push_back(next);
            std::sort(base.begin(), base.end());
            in_tree[static_cast<std::size_t>(fresh)] = 1;

            BpResult scratch = run_bp_on(m, base, cfg);
            REQUIRE(grown.converged);
            REQUIRE(scratch.converged);
            for (NodeId n = 0; n < m.node_count(); ++n) {
                Distribution ba = compute_belief(m, grown.messages, n);
                Distribution bs = compute_belief(m, scratch.messages, n);
                for (int x = 0; x < 3; ++x) {
                    CHECK(ba[x] == doctest::Approx(bs[x]).epsilon(10 * cfg.tolerance));
                }
            }
            messages = std::move(grown.messages);
        }
    }
}

TEST_CASE("adaptive path growth needs fewer cumulative updates than scratch") {
    // 10-node path with informative priors.
    std::mt19937_64 rng(12);
    const int n = 10;
    std::vector<Distribution> priors;
    for (int i = 0; i < n; ++i) priors.push_back(oracles::random_distribution(2, rng));
    std::vector<Edge> edges;
    for (NodeId i = 0; i + 1 < n; ++i) edges.push_back({i, static_cast<NodeId>(i + 1)});
    std::vector<CompatibilityMatrix> pots(edges.size(), CompatibilityMatrix::homophily(2, 0.8));
    Mrf m(2, priors, edges, pots);

    long long cumulative_adaptive = 0;
    long long cumulative_scratch = 0;
    std::vector<EdgeId> base;
    MessageSet messages;
    for (EdgeId e = 0; e < m.edge_count(); ++e) {
        BpResult grown = adaptive_bp(m, base, messages, {m.edge(e).u, m.edge(e).v}, {});
        cumulative_adaptive += grown.message_updates;
        base.push_back(e);
        BpResult scratch = run_bp_on(m, base, {});
        cumulative_scratch += scratch.message_updates;
        if (e == 0) {
            // nothing to reuse on the first edge
            CHECK(cumulative_adaptive == cumulative_scratch);
        } else {
            CHECK(cumulative_adaptive < cumulative_scratch);
        }
        messages = std::move(grown.messages);
    }
}

TEST_CASE("triangle growth: adaptive equals scratch beliefs") {
    // The four grow steps of the triangle walkthrough.
    std::vector<Distribution> priors{Distribution(std::vector<double>{0.5, 0.5}),
                                     Distribution(std::vector<double>{0.9, 0.1}),
                                     Distribution(std::vector<double>{0.3, 0.7})};
    std::vector<Edge> edges{{0, 1}, {0, 2}, {1, 2}};
    std::vector<CompatibilityMatrix> pots(3, CompatibilityMatrix::homophily(2, 0.9));
    Mrf m(2, priors, edges, pots);

    struct Step {
        std::vector<EdgeId> base;
        std::pair<NodeId, NodeId> add;
    };
    std::vector<Step> steps{
        {{}, {0, 1}},   // {X} -> S1
        {{0}, {1, 2}},  // S1 -> S2
        {{0}, {0, 2}},  // S1 -> S3
        {{}, {0, 2}},   // {X} -> S4
        {{1}, {2, 1}},  // S4 -> S5
    };
    for (const Step& step : steps) {
        MessageSet base_messages;
        if (!step.base.empty()) {
            base_messages = run_bp_on(m, step.base, {}).messages;
        }
        BpResult grown = adaptive_bp(m, step.base, base_messages, step.add, {});
        std::vector<EdgeId> active = step.base;
        active.push_back(*m.edge_between(step.add.first, step.add.second));
        std::sort(active.begin(), active.end());
        BpResult scratch = run_bp_on(m, active, {});
        for (NodeId n = 0; n < 3; ++n) {
            Distribution ba = compute_belief(m, grown.messages, n);
            Distribution bs = compute_belief(m, scratch.messages, n);
            for (int x = 0; x < 2; ++x) {
                CHECK(ba[x] == doctest::Approx(bs[x]).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("adaptive_bp contract checks") {
    std::mt19937_64 rng(13);
    Mrf m = oracles::random_tree_mrf(5, 2, rng);
    std::vector<EdgeId> base{0};
    MessageSet messages = run_bp_on(m, base, {}).messages;
    CHECK_THROWS_AS(adaptive_bp(m, base, messages, {m.edge(0).u, m.edge(0).v}, {}), ContractError);
    CHECK_THROWS_AS(adaptive_bp(m, base, messages, {99, 100}, {}), ContractError);
}

TEST_CASE("bp config validation") {
    std::mt19937_64 rng(14);
    Mrf m = oracles::random_tree_mrf(3, 2, rng);
    BpConfig bad;
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(run_bp(m, bad), ContractError);
    bad = {};
    bad.max_iterations = 0;
    CHECK_THROWS_AS(run_bp(m, bad), ContractError);
    bad = {};
    bad.damping = 1.0;
    CHECK_THROWS_AS(run_bp(m, bad), ContractError);
}
