#pragma once

#include <filesystem>

#include "mrfx/mrf.hpp"

namespace mrfx {

/// Loads an MRF from three text files.
///
/// Graph file: one edge per line, "u v" with 0-based integer node ids;
/// lines beginning with '#' are ignored.
///
/// Priors file: CSV with header "node,p_0,...,p_{c-1}" and one row per node
/// with a non-uniform prior; omitted nodes default to the uniform prior.
///
/// Potentials file: key-value text of the form
///
///     classes <c>
///     potential global        (one c x c matrix applied to every edge)
///     <c rows of c floats>
///
/// or one "potential u,v" block per edge. A per-edge key may list the
/// endpoints in either order; the matrix is interpreted in key order.
Mrf load_mrf(const std::filesystem::path& graph_path, const std::filesystem::path& priors_path,
             const std::filesystem::path& potentials_path);

/// Writes an MRF back into the three-file format accepted by load_mrf.
/// Priors are written for every node; the potentials file uses a single
/// global block when all edges share one matrix.
void save_mrf(const Mrf& mrf, const std::filesystem::path& graph_path,
              const std::filesystem::path& priors_path, const std::filesystem::path& potentials_path);

} // namespace mrfx
