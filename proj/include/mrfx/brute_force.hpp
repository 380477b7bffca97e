#pragma once

#include "mrfx/mrf.hpp"

namespace mrfx {

/// Exact marginal of `node` by summing the joint factorization
/// P(V) ~ prod_i phi(X_i) * prod_{(i,j) in E} psi(X_i, X_j) over all joint
/// states. Testing oracle for small instances; throws CapacityError when
/// c^n exceeds 10^7 states.
Distribution brute_force_marginal(const Mrf& mrf, NodeId node);

} // namespace mrfx
