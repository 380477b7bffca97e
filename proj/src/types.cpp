#include "mrfx/types.hpp"

#include <cmath>

#include "mrfx/errors.hpp"

namespace mrfx {

Distribution Distribution::uniform(int classes) {
    return Distribution(std::vector<double>(static_cast<std::size_t>(classes), 1.0 / classes));
}

Distribution Distribution::delta(int classes, int hot) {
    std::vector<double> p(static_cast<std::size_t>(classes), 0.0);
    p[static_cast<std::size_t>(hot)] = 1.0;
    return Distribution(std::move(p));
}

bool Distribution::is_valid(double tol) const {
    if (probs.empty()) return false;
    double sum = 0.0;
    for (double v : probs) {
        if (!(v >= 0.0)) return false; // also rejects NaN
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

void Distribution::normalize() {
    double sum = 0.0;
    for (double v : probs) sum += v;
    if (sum <= 0.0 || !std::isfinite(sum)) {
        throw NumericalError("cannot normalize distribution with total mass " + std::to_string(sum));
    }
    for (double& v : probs) v /= sum;
}

bool is_uniform(const Distribution& d, double tol) {
    if (d.size() == 0) return false;
    const double u = 1.0 / d.size();
    for (double v : d.probs) {
        if (std::abs(v - u) > tol) return false;
    }
    return true;
}

CompatibilityMatrix CompatibilityMatrix::constant(int classes, double value) {
    return {classes, std::vector<double>(static_cast<std::size_t>(classes) * classes, value)};
}

CompatibilityMatrix CompatibilityMatrix::identity(int classes) {
    CompatibilityMatrix m = constant(classes, 0.0);
    for (int a = 0; a < classes; ++a) m.at(a, a) = 1.0;
    return m;
}

CompatibilityMatrix CompatibilityMatrix::homophily(int classes, double strength) {
    const double off = classes > 1 ? (1.0 - strength) / (classes - 1) : 0.0;
    CompatibilityMatrix m = constant(classes, off);
    for (int a = 0; a < classes; ++a) m.at(a, a) = strength;
    return m;
}

void CompatibilityMatrix::validate(const std::string& label) const {
    if (classes < 1 || entries.size() != static_cast<std::size_t>(classes) * classes) {
        throw ValidationError("potential " + label + ": expected " + std::to_string(classes) + "x" +
                              std::to_string(classes) + " entries");
    }
    for (double v : entries) {
        if (!(v >= 0.0)) {
            throw ValidationError("potential " + label + ": negative or non-finite entry");
        }
    }
    for (int a = 0; a < classes; ++a) {
        bool row = false;
        bool col = false;
        for (int b = 0; b < classes; ++b) {
            row = row || at(a, b) > 0.0;
            col = col || at(b, a) > 0.0;
        }
        if (!row) throw ValidationError("potential " + label + ": row " + std::to_string(a) + " is all zero");
        if (!col) throw ValidationError("potential " + label + ": column " + std::to_string(a) + " is all zero");
    }
}

} // namespace mrfx
