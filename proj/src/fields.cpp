#include "sphlab/fields.hpp"

namespace sphlab {

namespace {

template <class PerPair>
void sum_over_pairs(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                    PerPair&& f) {
    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Scalar r = (pi - ps.pos.col(j)).norm();
            if (r >= nbrs.cutoff) continue;
            f(i, j, kernel_value(k, r, ps.h));
        }
    }
}

} // namespace

ArrayX summation_density(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k) {
    const Scalar w0 = kernel_value(k, 0.0, ps.h);
    ArrayX rho(nbrs.n_dest);
    for (Index i = 0; i < nbrs.n_dest; ++i) rho[i] = ps.mass[i] * w0;
    sum_over_pairs(ps, nbrs, k, [&](Index i, Index j, Scalar w) { rho[i] += ps.mass[j] * w; });
    return rho;
}

ArrayX kernel_sum(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k) {
    ArrayX s = ArrayX::Constant(nbrs.n_dest, kernel_value(k, 0.0, ps.h));
    sum_over_pairs(ps, nbrs, k, [&](Index i, Index, Scalar w) { s[i] += w; });
    return s;
}

ArrayX numerical_volume(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k) {
    ArrayX s = kernel_sum(ps, nbrs, k);
    for (Index i = 0; i < s.size(); ++i) {
        if (s[i] <= 0.0) throw DegenerateVolumeError("numerical_volume: vanishing kernel sum");
    }
    return 1.0 / s;
}

ArrayX shepard_sum(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k) {
    const Scalar w0 = kernel_value(k, 0.0, ps.h);
    ArrayX s(nbrs.n_dest);
    for (Index i = 0; i < nbrs.n_dest; ++i) s[i] = w0 * ps.omega[i];
    sum_over_pairs(ps, nbrs, k, [&](Index i, Index j, Scalar w) { s[i] += w * ps.omega[j]; });
    return s;
}

ArrayX function_approx(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                       const ArrayX& f) {
    const Scalar w0 = kernel_value(k, 0.0, ps.h);
    ArrayX out(nbrs.n_dest);
    for (Index i = 0; i < nbrs.n_dest; ++i) out[i] = f[i] * w0 * ps.omega[i];
    sum_over_pairs(ps, nbrs, k, [&](Index i, Index j, Scalar w) { out[i] += f[j] * w * ps.omega[j]; });
    return out;
}

} // namespace sphlab
