#pragma once

/// Configuration-derived field sums: summation density, numerical volume,
/// Shepard sums and plain function approximation. All include the self
/// contribution and return one value per destination.

#include "sphlab/domain.hpp"
#include "sphlab/kernels.hpp"
#include "sphlab/neighbors.hpp"

namespace sphlab {

/// rho_i = sum_j m_j W_ij (self included).
ArrayX summation_density(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k);

/// sum_j W_ij (self included).
ArrayX kernel_sum(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k);

/// omega_i = 1 / sum_j W_ij. Throws DegenerateVolumeError on a vanishing sum.
ArrayX numerical_volume(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k);

/// sum_j W_ij omega_j, the discrete normalization (1 on a uniform lattice).
ArrayX shepard_sum(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k);

/// <f>_i = sum_j f_j W_ij omega_j.
ArrayX function_approx(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                       const ArrayX& f);

} // namespace sphlab
