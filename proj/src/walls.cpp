#include "sphlab/walls.hpp"

#include <cmath>

namespace sphlab {

bool is_fluid_like(const ParticleSet& ps, Index j) {
    ParticleTag t = ps.tag[static_cast<std::size_t>(j)];
    if (t == ParticleTag::PeriodicImage)
        t = ps.tag[static_cast<std::size_t>(ps.image_source[static_cast<std::size_t>(j - ps.n_local)])];
    return t == ParticleTag::Fluid;
}

ParticleSet build_channel(Index ny, Scalar height, Scalar width, Scalar h_ratio,
                          const KernelSpec& k, Scalar rho0) {
    if (ny < 4) throw SphError("build_channel: ny must be >= 4");
    ParticleSet ps;
    const Scalar ds = height / static_cast<Scalar>(ny);
    const Index nx = std::max<Index>(4, static_cast<Index>(std::llround(width / ds)));
    ps.domain.origin = Vec2::Zero();
    ps.domain.extent = Vec2(nx * ds, height);
    ps.domain.periodic_x = true;
    ps.domain.periodic_y = false;
    ps.spacing = ds;
    ps.h = h_ratio * ds;
    ps.ref_density = rho0;

    const Index layers = static_cast<Index>(std::ceil(k.support_radius * h_ratio));
    ps.n_fluid = nx * ny;
    const Index n_wall = 2 * nx * layers;
    ps.n_local = ps.n_fluid + n_wall;
    ps.resize_all(ps.n_local);

    Index c = 0;
    for (Index j = 0; j < ny; ++j)
        for (Index i = 0; i < nx; ++i, ++c)
            ps.pos.col(c) = Vec2((i + 0.5) * ds, (j + 0.5) * ds);
    for (Index l = 0; l < layers; ++l) {
        for (Index i = 0; i < nx; ++i, ++c) { // below the bottom wall
            ps.pos.col(c) = Vec2((i + 0.5) * ds, -(l + 0.5) * ds);
            ps.tag[static_cast<std::size_t>(c)] = ParticleTag::WallGhost;
        }
    }
    for (Index l = 0; l < layers; ++l) {
        for (Index i = 0; i < nx; ++i, ++c) { // above the top wall
            ps.pos.col(c) = Vec2((i + 0.5) * ds, height + (l + 0.5) * ds);
            ps.tag[static_cast<std::size_t>(c)] = ParticleTag::WallGhost;
        }
    }

    ps.vel.setZero();
    ps.vel_slip.setZero();
    ps.pressure.setZero();
    ps.varrho.setConstant(rho0);
    ps.rho_sum.setConstant(rho0);
    ps.mass.setConstant(rho0 * ds * ds);
    ps.omega.setConstant(ds * ds);
    return ps;
}

WallBcStats apply_wall_bc(ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                          const Eos& eos, const WallSpec& wall) {
    WallBcStats stats;
    const Vec2 u_s(wall.wall_velocity_x, 0.0);
    for (Index g = ps.n_fluid; g < ps.n_local; ++g) {
        if (ps.tag[static_cast<std::size_t>(g)] != ParticleTag::WallGhost) continue;
        Scalar wsum = 0.0, psum = 0.0;
        Vec2 usum = Vec2::Zero();
        const Vec2 pg = ps.pos.col(g);
        for (Index s = nbrs.begin(g); s < nbrs.end(g); ++s) {
            const Index j = nbrs.neighbor(s);
            if (!is_fluid_like(ps, j)) continue;
            const Scalar w = kernel_value(k, (pg - ps.pos.col(j)).norm(), ps.h);
            if (w == 0.0) continue;
            wsum += w;
            psum += w * ps.pressure[j];
            usum += w * ps.vel.col(j);
        }
        if (wsum <= 0.0) {
            ++stats.unsupported;
            ps.vel.col(g) = u_s;
            ps.vel_slip.col(g) = u_s;
            ps.pressure[g] = 0.0;
            ps.varrho[g] = eos.rho0;
            continue;
        }
        const Vec2 u_f = usum / wsum;
        ps.pressure[g] = psum / wsum;
        ps.varrho[g] = eos.density(ps.pressure[g]);
        ps.vel.col(g) = 2.0 * u_s - u_f; // no-slip reflection
        // slip variant: reflect only the wall-normal (y) component
        ps.vel_slip(0, g) = u_f.x();
        ps.vel_slip(1, g) = 2.0 * u_s.y() - u_f.y();
    }
    return stats;
}

void smooth_near_wall(ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k) {
    const Scalar band = 3.0 * ps.spacing;
    const Scalar height = ps.domain.extent.y();
    const Scalar w0 = kernel_value(k, 0.0, ps.h);
    std::vector<Index> which;
    std::vector<Vec2> smoothed;
    for (Index i = 0; i < ps.n_fluid; ++i) {
        const Scalar y = ps.pos(1, i);
        if (y > band && y < height - band) continue;
        // first-order consistent value from the simultaneous solve
        Mat3 a = Mat3::Zero();
        Vec3 bu = Vec3::Zero(), bv = Vec3::Zero();
        const Vec2 pi = ps.pos.col(i);
        a(0, 0) = w0 * ps.omega[i];
        bu[0] = ps.vel(0, i) * w0 * ps.omega[i];
        bv[0] = ps.vel(1, i) * w0 * ps.omega[i];
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            Scalar w, gmag;
            kernel_value_gradient(k, x_ij.norm(), ps.h, w, gmag);
            if (w == 0.0 && gmag == 0.0) continue;
            const Vec3 wv(w, gmag * x_ij.x(), gmag * x_ij.y());
            const Vec3 row(1.0, -x_ij.x(), -x_ij.y());
            a += ps.omega[j] * (wv * row.transpose());
            bu += (ps.vel(0, j) * ps.omega[j]) * wv;
            bv += (ps.vel(1, j) * ps.omega[j]) * wv;
        }
        Eigen::PartialPivLU<Mat3> lu(a);
        if (!(lu.rcond() > 1e-12)) continue;
        which.push_back(i);
        smoothed.emplace_back(lu.solve(bu)[0], lu.solve(bv)[0]);
    }
    for (std::size_t n = 0; n < which.size(); ++n) {
        ps.vel.col(which[n]) = smoothed[n];
        ps.vel_slip.col(which[n]) = smoothed[n];
    }
    sync_ghost_fields(ps);
}

} // namespace sphlab
