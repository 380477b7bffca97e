#pragma once

#include <cstdint>
#include <string>

#include "mrfx/mrf.hpp"

namespace mrfx {

enum class GraphKind { Tree, ErdosRenyi, SmallWorld };

GraphKind parse_graph_kind(const std::string& name);
std::string graph_kind_name(GraphKind kind);

struct SyntheticConfig {
    GraphKind kind = GraphKind::Tree;
    int nodes = 50;
    int classes = 3;
    double homophily = 0.9;        // diagonal weight of the shared potential
    double biased_fraction = 0.8;  // share of nodes with a class-biased prior
    double bias_strength = 0.9;    // prior mass on the planted class
    std::uint64_t seed = 0;
};

/// Seeded random MRF: random topology of the requested kind, one shared
/// homophily potential (diagonal h, off-diagonal (1-h)/(c-1)), and a random
/// subset of nodes with priors concentrated on a uniformly drawn planted
/// class while the rest stay uniform. Bitwise reproducible from the seed.
Mrf generate_synthetic(const SyntheticConfig& config);

} // namespace mrfx
