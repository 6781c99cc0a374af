#pragma once

/// Interpolation of particle properties back onto a Cartesian lattice using
/// tensor-product M4 weights with Shepard normalization.

#include "sphlab/domain.hpp"

namespace sphlab {

/// Returns a new particle set on the given lattice positions (typically the
/// original unperturbed lattice) with u, v, p and the fluid density
/// interpolated from `ps`. Mass and h are carried over unchanged. The source
/// set must cover the lattice periodically (images applied by the call).
ParticleSet remesh_m4(const ParticleSet& ps, const Mat2X& lattice);

} // namespace sphlab
