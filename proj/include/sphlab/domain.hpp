#pragma once

/// Particle state and periodic bookkeeping.
///
/// Layout: fluid particles first, then wall ghosts (channel cases only),
/// then periodic images. Operators never wrap coordinates; periodicity is
/// realized purely through explicit images so they stay geometry-agnostic.

#include "sphlab/kernels.hpp"
#include "sphlab/types.hpp"

#include <cstdint>
#include <vector>

namespace sphlab {

struct Domain {
    Vec2 origin = Vec2::Zero();
    Vec2 extent = Vec2::Ones();
    bool periodic_x = true;
    bool periodic_y = true;
};

enum class ParticleTag : std::uint8_t { Fluid = 0, WallGhost = 1, PeriodicImage = 2 };

struct ParticleSet {
    Domain domain;
    Scalar spacing = 0.0;     ///< initial lattice spacing
    Scalar h = 0.0;           ///< smoothing length, constant
    Scalar ref_density = 1.0; ///< reference fluid density

    Index n_fluid = 0; ///< fluid particles, stored first
    Index n_local = 0; ///< fluid + wall ghosts; periodic images follow

    Mat2X pos;
    Mat2X vel;
    ArrayX pressure;
    ArrayX varrho;  ///< transported fluid density
    ArrayX rho_sum; ///< summation density, configuration-derived
    ArrayX mass;
    ArrayX omega;   ///< numerical volume
    std::vector<ParticleTag> tag;

    /// Slip-extrapolated wall-ghost velocity; sized n_total in wall cases,
    /// mirrors vel elsewhere. Used only by the continuity equation.
    Mat2X vel_slip;

    std::vector<Index> image_source; ///< one entry per periodic image
    Mat2X image_shift;

    Index n_total() const { return pos.cols(); }
    Index n_images() const { return static_cast<Index>(image_source.size()); }

    void resize_all(Index n);
    /// Drops periodic images, keeping the first n_local particles.
    void drop_images();
    /// Total mass of the fluid particles.
    Scalar fluid_mass() const { return mass.head(n_fluid).sum(); }
};

/// nx * nx particles at the cell centers of a Cartesian grid over
/// [origin, origin+L]^2 with spacing L/nx, h = h_ratio * spacing.
ParticleSet build_up_lattice(Index nx, Scalar length, Scalar h_ratio, Scalar rho0 = 1.0,
                             const Vec2& origin = Vec2::Zero());

/// Adds periodic images of every local particle within `cutoff` of a
/// periodic edge (and corner combinations). Existing images are rebuilt.
void apply_periodic_ghosts(ParticleSet& ps, Scalar cutoff);

/// Refreshes all image fields (and positions) from their sources.
void sync_ghost_fields(ParticleSet& ps);

/// Wraps fluid positions back into the domain along periodic axes.
void wrap_positions(ParticleSet& ps);

} // namespace sphlab
