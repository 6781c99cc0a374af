#include "sphlab/domain.hpp"

#include <cmath>

namespace sphlab {

void ParticleSet::resize_all(Index n) {
    pos.conservativeResize(2, n);
    vel.conservativeResize(2, n);
    vel_slip.conservativeResize(2, n);
    pressure.conservativeResize(n);
    varrho.conservativeResize(n);
    rho_sum.conservativeResize(n);
    mass.conservativeResize(n);
    omega.conservativeResize(n);
    tag.resize(static_cast<std::size_t>(n), ParticleTag::Fluid);
}

void ParticleSet::drop_images() {
    image_source.clear();
    image_shift.resize(2, 0);
    resize_all(n_local);
}

ParticleSet build_up_lattice(Index nx, Scalar length, Scalar h_ratio, Scalar rho0,
                             const Vec2& origin) {
    if (nx < 4) throw SphError("build_up_lattice: nx must be >= 4");
    if (length <= 0.0) throw SphError("build_up_lattice: non-positive length");
    ParticleSet ps;
    ps.domain.origin = origin;
    ps.domain.extent = Vec2(length, length);
    ps.spacing = length / static_cast<Scalar>(nx);
    ps.h = h_ratio * ps.spacing;
    ps.ref_density = rho0;
    ps.n_fluid = nx * nx;
    ps.n_local = ps.n_fluid;
    ps.resize_all(ps.n_fluid);

    const Scalar ds = ps.spacing;
    Index k = 0;
    for (Index j = 0; j < nx; ++j)
        for (Index i = 0; i < nx; ++i, ++k)
            ps.pos.col(k) = origin + Vec2((i + 0.5) * ds, (j + 0.5) * ds);

    ps.vel.setZero();
    ps.vel_slip.setZero();
    ps.pressure.setZero();
    ps.varrho.setConstant(rho0);
    ps.rho_sum.setConstant(rho0);
    ps.mass.setConstant(rho0 * ds * ds);
    ps.omega.setConstant(ds * ds);
    return ps;
}

void apply_periodic_ghosts(ParticleSet& ps, Scalar cutoff) {
    const Vec2 L = ps.domain.extent;
    if ((ps.domain.periodic_x && cutoff >= 0.5 * L.x()) ||
        (ps.domain.periodic_y && cutoff >= 0.5 * L.y()))
        throw SphError("apply_periodic_ghosts: cutoff must be < L/2");

    ps.drop_images();

    const Vec2 lo = ps.domain.origin - Vec2::Constant(cutoff);
    const Vec2 hi = ps.domain.origin + L + Vec2::Constant(cutoff);
    const int sx_max = ps.domain.periodic_x ? 1 : 0;
    const int sy_max = ps.domain.periodic_y ? 1 : 0;

    std::vector<Index> src;
    std::vector<Vec2> shift;
    for (Index i = 0; i < ps.n_local; ++i) {
        const Vec2 p = ps.pos.col(i);
        for (int sx = -sx_max; sx <= sx_max; ++sx) {
            for (int sy = -sy_max; sy <= sy_max; ++sy) {
                if (sx == 0 && sy == 0) continue;
                const Vec2 s(sx * L.x(), sy * L.y());
                const Vec2 q = p + s;
                if (q.x() > lo.x() && q.x() < hi.x() && q.y() > lo.y() && q.y() < hi.y()) {
                    src.push_back(i);
                    shift.push_back(s);
                }
            }
        }
    }

    const Index n_img = static_cast<Index>(src.size());
    const Index n0 = ps.n_local;
    ps.resize_all(n0 + n_img);
    ps.image_source = std::move(src);
    ps.image_shift.resize(2, n_img);
    for (Index g = 0; g < n_img; ++g) {
        ps.image_shift.col(g) = shift[static_cast<std::size_t>(g)];
        ps.tag[static_cast<std::size_t>(n0 + g)] = ParticleTag::PeriodicImage;
    }
    sync_ghost_fields(ps);
}

void sync_ghost_fields(ParticleSet& ps) {
    const Index n0 = ps.n_local;
    for (Index g = 0; g < ps.n_images(); ++g) {
        const Index s = ps.image_source[static_cast<std::size_t>(g)];
        const Index d = n0 + g;
        ps.pos.col(d) = ps.pos.col(s) + ps.image_shift.col(g);
        ps.vel.col(d) = ps.vel.col(s);
        ps.vel_slip.col(d) = ps.vel_slip.col(s);
        ps.pressure[d] = ps.pressure[s];
        ps.varrho[d] = ps.varrho[s];
        ps.rho_sum[d] = ps.rho_sum[s];
        ps.mass[d] = ps.mass[s];
        ps.omega[d] = ps.omega[s];
    }
}

void wrap_positions(ParticleSet& ps) {
    const Vec2 o = ps.domain.origin;
    const Vec2 L = ps.domain.extent;
    for (Index i = 0; i < ps.n_fluid; ++i) {
        if (ps.domain.periodic_x) {
            Scalar x = ps.pos(0, i);
            ps.pos(0, i) = x - L.x() * std::floor((x - o.x()) / L.x());
        }
        if (ps.domain.periodic_y) {
            Scalar y = ps.pos(1, i);
            ps.pos(1, i) = y - L.y() * std::floor((y - o.y()) / L.y());
        }
    }
}

} // namespace sphlab
