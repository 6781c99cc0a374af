#pragma once

/// Cell-list neighbor search. Lists are index-sorted per destination so all
/// downstream reductions run in a fixed deterministic order.

#include "sphlab/domain.hpp"
#include "sphlab/types.hpp"

#include <vector>

namespace sphlab {

struct NeighborTable {
    Index n_dest = 0;
    Scalar cutoff = 0.0;       ///< interaction cutoff
    Scalar cutoff_build = 0.0; ///< cutoff + skin the lists were built with

    // CSR rows per destination, self excluded, indices ascending.
    std::vector<Index> offsets;
    std::vector<Index> indices;

    // Half-edge view for fused sweeps: every unordered pair (i, j) with
    // i < j and i a destination appears exactly once.
    std::vector<Index> edge_i;
    std::vector<Index> edge_j;

    Index begin(Index i) const { return offsets[static_cast<std::size_t>(i)]; }
    Index end(Index i) const { return offsets[static_cast<std::size_t>(i) + 1]; }
    Index neighbor(Index slot) const { return indices[static_cast<std::size_t>(slot)]; }
    Index n_edges() const { return static_cast<Index>(edge_i.size()); }
};

/// Builds the table for the first `n_dest` particles (all of them when
/// n_dest < 0) against every particle in the set. A positive `skin` widens
/// the build radius so the table stays valid under small position drift.
NeighborTable neighbor_search(const ParticleSet& ps, Scalar cutoff, Index n_dest = -1,
                              Scalar skin = 0.0);

} // namespace sphlab
