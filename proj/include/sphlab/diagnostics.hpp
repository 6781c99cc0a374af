#pragma once

/// Error metrics, convergence-order fits and conservation bookkeeping.

#include "sphlab/corrections.hpp"
#include "sphlab/domain.hpp"
#include "sphlab/neighbors.hpp"

#include <functional>
#include <vector>

namespace sphlab {

struct L1Result {
    Scalar value = 0.0;
    bool absolute_fallback = false; ///< reference vanished; unnormalized mean
};

/// Relative L1 field error sum|g - g0| / sum|g0|; falls back to the plain
/// mean absolute error when the reference is identically zero.
L1Result l1_field_error(const ArrayX& approx, const ArrayX& exact);

/// Space-time L1 accumulator: sum_t sum_i |f - f0| / N * dt per field.
struct SpacetimeL1 {
    Scalar u = 0.0;
    Scalar p = 0.0;
    /// Adds one sampled step; `exact(x, t, u, v, p)` supplies the reference.
    void accumulate(const ParticleSet& ps, Scalar t, Scalar dt,
                    const std::function<void(const Vec2&, Scalar, Scalar&, Scalar&, Scalar&)>& exact);
};

/// Least-squares slope of log(L1) against log(h). Requires >= 3 rows.
Scalar fit_order(const std::vector<Scalar>& h, const std::vector<Scalar>& l1);

struct ConservationSample {
    Scalar t = 0.0;
    Vec2 linear_momentum = Vec2::Zero();
    Scalar angular_momentum = 0.0; ///< sum m (x - origin) x u, z component
    Scalar kinetic_energy = 0.0;
    Scalar max_speed = 0.0;
};

using DiagnosticsSeries = std::vector<ConservationSample>;

ConservationSample conservation_sample(const ParticleSet& ps, Scalar t);

/// omega_z = dv/dx - du/dy via the corrected asymmetric gradients.
ArrayX vorticity_field(const ParticleSet& ps, const NeighborTable& nbrs,
                       const CorrectionSet& corr, const KernelSpec& k);

} // namespace sphlab
