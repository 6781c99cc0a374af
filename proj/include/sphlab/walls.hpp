#pragma once

/// Solid-wall ghost layers for channel flow: fixed dummy particles outside
/// the walls with pressure and velocity extrapolated from the fluid.

#include "sphlab/corrections.hpp"
#include "sphlab/domain.hpp"
#include "sphlab/eos.hpp"
#include "sphlab/neighbors.hpp"

namespace sphlab {

struct WallSpec {
    Scalar wall_velocity_x = 0.0; ///< both walls move with this x velocity
};

/// Channel particle set: ny particles across the height, periodic in x,
/// walls at y = 0 and y = height. Dummy layers of depth support*h sit
/// outside each wall. width is rounded to a whole number of cells.
ParticleSet build_channel(Index ny, Scalar height, Scalar width, Scalar h_ratio,
                          const KernelSpec& k, Scalar rho0 = 1.0);

struct WallBcStats {
    long unsupported = 0; ///< ghosts with no fluid support this application
};

/// Extrapolates ghost pressure (Shepard), no-slip velocity (reflection) and
/// the slip variant used by the continuity equation; ghost density follows
/// from the EOS inverse. Requires a neighbor table whose destinations cover
/// the wall ghosts.
WallBcStats apply_wall_bc(ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                          const Eos& eos, const WallSpec& wall);

/// First-order-consistent velocity smoothing of the three fluid layers next
/// to each wall.
void smooth_near_wall(ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k);

/// True when particle j (or its image source) is a fluid particle.
bool is_fluid_like(const ParticleSet& ps, Index j);

} // namespace sphlab
