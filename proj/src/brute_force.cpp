#include "mrfx/brute_force.hpp"

#include <string>

#include "mrfx/errors.hpp"

namespace mrfx {

Distribution brute_force_marginal(const Mrf& mrf, NodeId node) {
    mrf.check_node(node);
    const int n = mrf.node_count();
    const int c = mrf.class_count();

    double states = 1.0;
    for (int i = 0; i < n; ++i) {
        states *= c;
        if (states > 1e7) {
            throw CapacityError("joint table with " + std::to_string(c) + "^" + std::to_string(n) +
                                " states exceeds the 1e7 oracle limit");
        }
    }

    std::vector<int> state(static_cast<std::size_t>(n), 0);
    std::vector<double> marginal(static_cast<std::size_t>(c), 0.0);
    while (true) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
            w *= mrf.prior(i)[state[static_cast<std::size_t>(i)]];
        }
        for (EdgeId e = 0; e < mrf.edge_count(); ++e) {
            const Edge& ed = mrf.edge(e);
            w *= mrf.potential(e).at(state[static_cast<std::size_t>(ed.u)], state[static_cast<std::size_t>(ed.v)]);
        }
        marginal[static_cast<std::size_t>(state[static_cast<std::size_t>(node)])] += w;

        int pos = 0;
        while (pos < n && ++state[static_cast<std::size_t>(pos)] == c) {
            state[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == n) break;
    }

    Distribution result(std::move(marginal));
    result.normalize();
    return result;
}

} // namespace mrfx
