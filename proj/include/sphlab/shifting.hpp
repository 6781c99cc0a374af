#pragma once

/// Particle-distribution control: iterative and single-pass shifting with
/// first-order property transfer after the move.

#include "sphlab/corrections.hpp"
#include "sphlab/domain.hpp"
#include "sphlab/neighbors.hpp"

namespace sphlab {

enum class ShiftMode { Iterative, SinglePass, Off };

struct ShiftConfig {
    Scalar epsilon = 1e-3;  ///< tolerance on the kernel-sum uniformity measure
    int max_iterations = 10;
    int cadence = 10;       ///< steps between applications
    ShiftMode mode = ShiftMode::Iterative;
};

struct ShiftResult {
    Mat2X displacement; ///< net displacement per fluid particle
    int iterations = 0;
    long clamped = 0;            ///< shifts clamped to the per-pass cap
    long monotonicity_violations = 0;
    Scalar chi_residual = 0.0;   ///< |max(chi) - chi0| at exit
};

/// chi = h^2 sum_j W_ij on an unperturbed lattice of the same spacing; the
/// reference value for the shift stopping criterion.
Scalar chi_uniform(Index nx, Scalar length, Scalar h_ratio, const KernelSpec& k);

/// One evaluation of the shift vector dx_i = h sum_j n_ij W_ij omega_j for
/// every fluid particle. Ghosts must be in sync.
Mat2X shift_vector(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k);

/// Iterates shift passes until |max(chi) - chi0| < eps or the iteration cap,
/// re-ghosting after every pass. Displacements above cap_frac * spacing per
/// pass are clamped and counted. Mutates positions (and volumes).
ShiftResult ipst_shift(ParticleSet& ps, const KernelSpec& k, const ShiftConfig& cfg, Scalar chi0,
                       Scalar cap_frac = 0.5);

/// One capped application of the shift vector (cap 0.25 spacing).
ShiftResult single_pass_shift(ParticleSet& ps, const KernelSpec& k, Scalar chi0);

/// First-order transfer of properties to the shifted positions:
/// phi(x~) = phi(x) + (x~ - x) . grad phi(x), gradients taken with the
/// corrected asymmetric form at the pre-shift configuration.
struct TaylorGradients {
    Mat2X du, dv, dp, dvarrho; ///< per-field gradients at pre-shift positions
};
TaylorGradients taylor_gradients(const ParticleSet& ps, const NeighborTable& nbrs,
                                 const CorrectionSet& corr, const KernelSpec& k);
void taylor_update(ParticleSet& ps, const TaylorGradients& grads, const Mat2X& displacement);

} // namespace sphlab
