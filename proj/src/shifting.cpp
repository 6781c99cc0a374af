#include "sphlab/shifting.hpp"

#include "sphlab/operators.hpp"

#include <cmath>

namespace sphlab {

Scalar chi_uniform(Index nx, Scalar length, Scalar h_ratio, const KernelSpec& k) {
    ParticleSet ps = build_up_lattice(nx, length, h_ratio, 1.0);
    const Scalar cutoff = k.support_radius * ps.h;
    apply_periodic_ghosts(ps, cutoff);
    const NeighborTable nbrs = neighbor_search(ps, cutoff);
    const ArrayX s = kernel_sum(ps, nbrs, k);
    return ps.h * ps.h * s.head(ps.n_fluid).maxCoeff();
}

Mat2X shift_vector(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k) {
    Mat2X dx = Mat2X::Zero(2, ps.n_fluid);
    const Scalar guard = 1e-12 * ps.h;
    for (Index i = 0; i < ps.n_fluid; ++i) {
        const Vec2 pi = ps.pos.col(i);
        Vec2 acc = Vec2::Zero();
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            if (r < guard) continue;
            const Scalar w = kernel_value(k, r, ps.h);
            if (w == 0.0) continue;
            acc += (w * ps.omega[j] / r) * x_ij;
        }
        dx.col(i) = ps.h * acc;
    }
    return dx;
}

namespace {

// Shift passes reuse one skinned neighbor list across iterations; only ghost
// positions and the kernel sums are refreshed per pass.
struct ShiftWorkspace {
    NeighborTable nbrs;
    Mat2X pos_at_build;
    Scalar skin = 0.0;
    bool valid = false;

    void ensure(ParticleSet& ps, const KernelSpec& k) {
        const Scalar cutoff = k.support_radius * ps.h;
        bool rebuild = !valid;
        if (!rebuild) {
            Scalar d2 = 0.0;
            for (Index i = 0; i < ps.n_fluid; ++i)
                d2 = std::max(d2, (ps.pos.col(i) - pos_at_build.col(i)).squaredNorm());
            rebuild = d2 > 0.25 * skin * skin;
        }
        if (!rebuild) {
            sync_ghost_fields(ps);
            return;
        }
        skin = 0.6 * ps.spacing;
        wrap_positions(ps);
        apply_periodic_ghosts(ps, cutoff + skin);
        nbrs = neighbor_search(ps, cutoff, ps.n_local, skin);
        pos_at_build = ps.pos.leftCols(ps.n_fluid);
        valid = true;
    }
};

// One fused pass: kernel sums (for chi and the volumes) and the shift
// vector. Returns max chi over the fluid.
Scalar shift_pass(ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k, Mat2X& dx) {
    const Index nd = nbrs.n_dest;
    const Scalar w0 = kernel_value(k, 0.0, ps.h);
    const Scalar guard = 1e-12 * ps.h;
    ArrayX sum_w = ArrayX::Constant(nd, w0);

    const Index ne = nbrs.n_edges();
    std::vector<Scalar> ew(static_cast<std::size_t>(ne));
    std::vector<Scalar> enx(static_cast<std::size_t>(ne)), eny(static_cast<std::size_t>(ne));
    for (Index e = 0; e < ne; ++e) {
        const Index i = nbrs.edge_i[static_cast<std::size_t>(e)];
        const Index j = nbrs.edge_j[static_cast<std::size_t>(e)];
        const Vec2 x_ij = ps.pos.col(i) - ps.pos.col(j);
        const Scalar r = x_ij.norm();
        if (r < guard || r >= k.support_radius * ps.h) {
            ew[static_cast<std::size_t>(e)] = 0.0;
            enx[static_cast<std::size_t>(e)] = 0.0;
            eny[static_cast<std::size_t>(e)] = 0.0;
            continue;
        }
        const Scalar w = kernel_value(k, r, ps.h);
        ew[static_cast<std::size_t>(e)] = w;
        enx[static_cast<std::size_t>(e)] = x_ij.x() / r;
        eny[static_cast<std::size_t>(e)] = x_ij.y() / r;
        sum_w[i] += w;
        if (j < nd) sum_w[j] += w;
    }
    for (Index i = 0; i < nd; ++i) ps.omega[i] = 1.0 / sum_w[i];
    sync_ghost_fields(ps);

    dx.setZero(2, ps.n_fluid);
    for (Index e = 0; e < ne; ++e) {
        const Scalar w = ew[static_cast<std::size_t>(e)];
        if (w == 0.0) continue;
        const Index i = nbrs.edge_i[static_cast<std::size_t>(e)];
        const Index j = nbrs.edge_j[static_cast<std::size_t>(e)];
        const Vec2 n(enx[static_cast<std::size_t>(e)], eny[static_cast<std::size_t>(e)]);
        if (i < ps.n_fluid) dx.col(i) += (w * ps.omega[j]) * n;
        if (j < ps.n_fluid) dx.col(j) -= (w * ps.omega[i]) * n;
    }
    dx *= ps.h;
    return ps.h * ps.h * sum_w.head(ps.n_fluid).maxCoeff();
}

long apply_capped(ParticleSet& ps, const Mat2X& dx, Scalar cap, Mat2X& net) {
    long clamped = 0;
    for (Index i = 0; i < ps.n_fluid; ++i) {
        Vec2 d = dx.col(i);
        const Scalar n = d.norm();
        if (n > cap) {
            d *= cap / n;
            ++clamped;
        }
        ps.pos.col(i) += d;
        net.col(i) += d;
    }
    return clamped;
}

} // namespace

ShiftResult ipst_shift(ParticleSet& ps, const KernelSpec& k, const ShiftConfig& cfg, Scalar chi0,
                       Scalar cap_frac) {
    ShiftResult res;
    res.displacement = Mat2X::Zero(2, ps.n_fluid);
    const Scalar cap = cap_frac * ps.spacing;

    ShiftWorkspace ws;
    ws.ensure(ps, k);
    Mat2X dx;
    Scalar chi_max = shift_pass(ps, ws.nbrs, k, dx);
    Scalar chi_prev = chi_max;
    res.chi_residual = std::abs(chi_max - chi0);
    for (int m = 0; m < cfg.max_iterations; ++m) {
        if (std::abs(chi_max - chi0) < cfg.epsilon) break;
        res.clamped += apply_capped(ps, dx, cap, res.displacement);
        ++res.iterations;
        ws.ensure(ps, k);
        chi_max = shift_pass(ps, ws.nbrs, k, dx);
        if (chi_max > chi_prev + cfg.epsilon) ++res.monotonicity_violations;
        chi_prev = chi_max;
        res.chi_residual = std::abs(chi_max - chi0);
    }
    // leave a clean full-support ghost configuration behind
    wrap_positions(ps);
    apply_periodic_ghosts(ps, k.support_radius * ps.h);
    return res;
}

ShiftResult single_pass_shift(ParticleSet& ps, const KernelSpec& k, Scalar chi0) {
    ShiftResult res;
    res.displacement = Mat2X::Zero(2, ps.n_fluid);
    ShiftWorkspace ws;
    ws.ensure(ps, k);
    Mat2X dx;
    const Scalar chi_max = shift_pass(ps, ws.nbrs, k, dx);
    res.chi_residual = std::abs(chi_max - chi0);
    res.clamped = apply_capped(ps, dx, 0.25 * ps.spacing, res.displacement);
    res.iterations = 1;
    wrap_positions(ps);
    apply_periodic_ghosts(ps, k.support_radius * ps.h);
    return res;
}

TaylorGradients taylor_gradients(const ParticleSet& ps, const NeighborTable& nbrs,
                                 const CorrectionSet& corr, const KernelSpec& k) {
    TaylorGradients g;
    // plain field gradients: divide out nothing (unit density argument)
    const ArrayX ones = ArrayX::Ones(ps.n_total());
    const ArrayX u = ps.vel.row(0).transpose().array();
    const ArrayX v = ps.vel.row(1).transpose().array();
    g.du = gradient(ps, nbrs, corr, GradientForm::AsymBC, u, ones, k);
    g.dv = gradient(ps, nbrs, corr, GradientForm::AsymBC, v, ones, k);
    g.dp = gradient(ps, nbrs, corr, GradientForm::AsymBC, ps.pressure, ones, k);
    g.dvarrho = gradient(ps, nbrs, corr, GradientForm::AsymBC, ps.varrho, ones, k);
    return g;
}

void taylor_update(ParticleSet& ps, const TaylorGradients& grads, const Mat2X& displacement) {
    for (Index i = 0; i < ps.n_fluid; ++i) {
        const Vec2 d = displacement.col(i);
        ps.vel(0, i) += d.dot(grads.du.col(i));
        ps.vel(1, i) += d.dot(grads.dv.col(i));
        ps.pressure[i] += d.dot(grads.dp.col(i));
        ps.varrho[i] += d.dot(grads.dvarrho.col(i));
    }
    sync_ghost_fields(ps);
}

} // namespace sphlab
