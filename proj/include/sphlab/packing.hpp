#pragma once

/// Perturbed-packed periodic particle distributions: a seeded random
/// perturbation relaxed by repeated shift passes until the kernel-sum
/// uniformity criterion holds.

#include "sphlab/domain.hpp"
#include "sphlab/kernels.hpp"

#include <cstdint>
#include <string>

namespace sphlab {

struct PackingOptions {
    Scalar perturb_scale = 0.2; ///< fraction of the spacing, per axis
    std::uint64_t seed = 42;
    Scalar epsilon = 1e-3;      ///< chi stopping tolerance
    int max_passes = 500;
    Scalar uniformity_tol = 5e-3; ///< required max |sum W omega - 1|
};

/// Builds the packed set. Throws PackingError (carrying the achieved
/// residual) when the uniformity tolerance is not reached.
ParticleSet build_pp_packed(Index nx, Scalar length, Scalar h_ratio, const KernelSpec& k,
                            const PackingOptions& opt = {}, const Vec2& origin = Vec2::Zero());

/// Same, but backed by a CSV cache directory (SPHLAB_CACHE_DIR or an
/// explicit path) so repeated runs skip the relaxation.
ParticleSet build_pp_packed_cached(Index nx, Scalar length, Scalar h_ratio, const KernelSpec& k,
                                   const PackingOptions& opt = {},
                                   const std::string& cache_dir = "",
                                   const Vec2& origin = Vec2::Zero());

} // namespace sphlab
