#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace mrfx {

// Dense 0-based identifiers, stable across one loaded graph.
using NodeId = std::int32_t;
using EdgeId = std::int32_t;

// Key of a message m_{from -> to}.
struct DirectedEdge {
    NodeId from = -1;
    NodeId to = -1;
    auto operator<=>(const DirectedEdge&) const = default;
};

// Probability vector over the c classes.
struct Distribution {
    std::vector<double> probs;

    Distribution() = default;
    explicit Distribution(std::vector<double> p) : probs(std::move(p)) {}

    static Distribution uniform(int classes);
    static Distribution delta(int classes, int hot);

    int size() const { return static_cast<int>(probs.size()); }
    double operator[](int i) const { return probs[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return probs[static_cast<std::size_t>(i)]; }

    // Non-negative entries summing to 1 within tol.
    bool is_valid(double tol = 1e-9) const;
    // Divides by the total mass; throws NumericalError if the mass is zero.
    void normalize();
};

bool is_uniform(const Distribution& d, double tol = 1e-12);

// c x c non-negative table scoring joint class assignments of an edge's
// endpoints. Stored once per edge in declared endpoint order; the reverse
// direction reads the transpose.
struct CompatibilityMatrix {
    int classes = 0;
    std::vector<double> entries; // row-major

    CompatibilityMatrix() = default;
    CompatibilityMatrix(int c, std::vector<double> e) : classes(c), entries(std::move(e)) {}

    static CompatibilityMatrix constant(int classes, double value);
    static CompatibilityMatrix identity(int classes);
    // Diagonal `strength`, off-diagonal (1 - strength) / (classes - 1).
    static CompatibilityMatrix homophily(int classes, double strength);

    double at(int a, int b) const { return entries[static_cast<std::size_t>(a) * classes + b]; }
    double& at(int a, int b) { return entries[static_cast<std::size_t>(a) * classes + b]; }

    // Entries non-negative, at least one positive entry in every row and
    // column. `label` names the edge in the error message.
    void validate(const std::string& label) const;
};

} // namespace mrfx
