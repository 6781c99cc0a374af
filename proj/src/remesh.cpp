#include "sphlab/remesh.hpp"

#include "sphlab/neighbors.hpp"

#include <cmath>

namespace sphlab {

ParticleSet remesh_m4(const ParticleSet& ps, const Mat2X& lattice) {
    if (lattice.cols() != ps.n_fluid) throw SphError("remesh_m4: lattice size mismatch");

    ParticleSet src = ps;
    const Scalar ds = ps.spacing;
    // tensor-product support is the 2ds square; the enclosing disk covers it
    const Scalar cutoff = 2.0 * ds * std::sqrt(2.0) * 1.0001;
    wrap_positions(src);
    apply_periodic_ghosts(src, cutoff);

    // scratch set: lattice nodes first (destinations), then every source
    const Index n_nodes = ps.n_fluid;
    const Index n_src = src.n_total();
    ParticleSet comb;
    comb.domain = ps.domain;
    comb.spacing = ds;
    comb.h = ps.h;
    comb.n_fluid = n_nodes;
    comb.n_local = n_nodes;
    comb.resize_all(n_nodes + n_src);
    comb.pos.leftCols(n_nodes) = lattice;
    comb.pos.rightCols(n_src) = src.pos;
    const NeighborTable nbrs = neighbor_search(comb, cutoff, n_nodes);

    ParticleSet out = ps;
    out.drop_images();
    out.pos.leftCols(n_nodes) = lattice;

    for (Index i = 0; i < n_nodes; ++i) {
        const Vec2 xi = lattice.col(i);
        Scalar wsum = 0.0, u = 0.0, v = 0.0, p = 0.0, rho = 0.0;
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index idx = nbrs.neighbor(s);
            if (idx < n_nodes) continue; // another node, not a source
            const Index j = idx - n_nodes;
            const Vec2 xj = src.pos.col(j);
            const Scalar wx = m4_value(std::abs(xi.x() - xj.x()) / ds);
            if (wx == 0.0) continue;
            const Scalar wy = m4_value(std::abs(xi.y() - xj.y()) / ds);
            const Scalar w = wx * wy;
            if (w == 0.0) continue;
            wsum += w;
            u += w * src.vel(0, j);
            v += w * src.vel(1, j);
            p += w * src.pressure[j];
            rho += w * src.varrho[j];
        }
        if (wsum == 0.0) throw SphError("remesh_m4: degenerate weight sum at a grid point");
        out.vel(0, i) = u / wsum;
        out.vel(1, i) = v / wsum;
        out.pressure[i] = p / wsum;
        out.varrho[i] = rho / wsum;
    }
    out.vel_slip = out.vel;
    return out;
}

} // namespace sphlab
