#pragma once

/// Per-particle correction data restoring consistency of the discrete
/// operators on irregular particle distributions.

#include "sphlab/domain.hpp"
#include "sphlab/fields.hpp"
#include "sphlab/neighbors.hpp"

#include <vector>

namespace sphlab {

struct CorrectionSet {
    /// Gradient-renormalization matrix: inverse of the weighted moment
    /// M_i = sum_j grad W_ij (x) (x_j - x_i) omega_j.
    std::vector<Mat2> bonet;
    /// Inverse of the simultaneous value/gradient consistency system; the
    /// corrected pair kernel is (A_i^-1 [W, Wx, Wy]^T).
    std::vector<Mat3> liu_inv;
    /// Kernel-gradient correction tensor for the finite-difference style
    /// Laplacian.
    std::vector<Mat2> fatehi_bhat;
    /// Inverse of the second-derivative correction matrix.
    std::vector<Mat3> korzilius_gamma_inv;

    long bonet_singular = 0;
    long liu_singular = 0;
    long fatehi_singular = 0;
    long korzilius_singular = 0;

    Scalar condition_threshold = 1e12;
};

void compute_bonet(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                   CorrectionSet& corr);

void compute_liu(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                 CorrectionSet& corr);

/// Requires corr.bonet.
void compute_fatehi(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                    CorrectionSet& corr);

/// Requires corr.bonet. Quintic-spline second derivatives only.
void compute_korzilius(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                       CorrectionSet& corr);

/// Extends per-destination correction data to periodic images by copying
/// from the source particle (translation leaves them unchanged).
template <class T>
void mirror_to_images(const ParticleSet& ps, std::vector<T>& data) {
    data.resize(static_cast<std::size_t>(ps.n_total()));
    for (Index g = 0; g < ps.n_images(); ++g)
        data[static_cast<std::size_t>(ps.n_local + g)] =
            data[static_cast<std::size_t>(ps.image_source[static_cast<std::size_t>(g)])];
}

inline void mirror_to_images(const ParticleSet& ps, Mat2X& data) {
    Mat2X out(2, ps.n_total());
    out.leftCols(data.cols()) = data;
    for (Index g = 0; g < ps.n_images(); ++g)
        out.col(ps.n_local + g) = data.col(ps.image_source[static_cast<std::size_t>(g)]);
    data.swap(out);
}

inline void mirror_to_images(const ParticleSet& ps, ArrayX& data) {
    ArrayX out(ps.n_total());
    out.head(data.size()) = data;
    for (Index g = 0; g < ps.n_images(); ++g)
        out[ps.n_local + g] = data[ps.image_source[static_cast<std::size_t>(g)]];
    data.swap(out);
}

/// Solves the consistency system for one field: first-order consistent
/// value and gradient per destination. Requires corr.liu_inv.
void liu_solve(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
               const CorrectionSet& corr, const ArrayX& f, ArrayX& value, Mat2X& grad);

/// Corrected pair kernel data for pair (i -> j): value and gradient of the
/// Liu-corrected kernel. x_ij = x_i - x_j.
inline void liu_pair(const CorrectionSet& corr, const KernelSpec& k, Index i, const Vec2& x_ij,
                     Scalar h, Scalar& w_tilde, Vec2& grad_tilde) {
    const Scalar r = x_ij.norm();
    Scalar w, gmag;
    kernel_value_gradient(k, r, h, w, gmag);
    const Vec3 raw(w, gmag * x_ij.x(), gmag * x_ij.y());
    const Vec3 c = corr.liu_inv[static_cast<std::size_t>(i)] * raw;
    w_tilde = c[0];
    grad_tilde = Vec2(c[1], c[2]);
}

} // namespace sphlab
