#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sphlab/packing.hpp"
#include "sphlab/remesh.hpp"
#include "sphlab/shifting.hpp"
#include "sphlab/cases.hpp"
#include "sphlab/fields.hpp"
#include "sphlab/operators.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace sphlab;

namespace {
const KernelSpec QS = make_kernel(KernelKind::QuinticSpline);

ParticleSet packed(Index nx, std::uint64_t seed) {
    PackingOptions po;
    po.seed = seed;
    return build_pp_packed_cached(nx, 1.0, 1.2, QS, po);
}

Scalar shepard_residual(ParticleSet ps) {
    const Scalar cutoff = QS.support_radius * ps.h;
    apply_periodic_ghosts(ps, cutoff);
    const NeighborTable nbrs = neighbor_search(ps, cutoff);
    ps.omega.head(ps.n_local) = numerical_volume(ps, nbrs, QS);
    sync_ghost_fields(ps);
    return (shepard_sum(ps, nbrs, QS).head(ps.n_fluid) - 1.0).abs().maxCoeff();
}
} // namespace

TEST_CASE("shift vector vanishes on the lattice and separates close pairs") {
    ParticleSet ps = build_up_lattice(16, 1.0, 1.2);
    const Scalar chi0 = chi_uniform(16, 1.0, 1.2, QS);
    ShiftConfig cfg;
    const ShiftResult res = ipst_shift(ps, QS, cfg, chi0);
    CHECK(res.displacement.cwiseAbs().maxCoeff() < 1e-12);

    // an isolated close pair is pushed apart along its axis
    ParticleSet two;
    two.n_fluid = two.n_local = 2;
    two.resize_all(2);
    two.domain.extent = Vec2(10, 10);
    two.spacing = 0.1;
    two.h = 0.12;
    two.pos.col(0) = Vec2(5.0, 5.0);
    two.pos.col(1) = Vec2(5.05, 5.0);
    two.omega.setConstant(0.01);
    const NeighborTable nbrs = neighbor_search(two, QS.support_radius * two.h);
    const Mat2X dx = shift_vector(two, nbrs, QS);
    CHECK(dx(0, 0) < 0.0);
    CHECK(dx(0, 1) > 0.0);
    CHECK(std::abs(dx(1, 0)) < 1e-15);
}

TEST_CASE("shifting improves the kernel-sum uniformity of a perturbed set") {
    // a freshly perturbed (unrelaxed) configuration
    ParticleSet ps = build_up_lattice(32, 1.0, 1.2);
    std::mt19937_64 rng(17);
    for (Index i = 0; i < ps.n_fluid; ++i) {
        ps.pos(0, i) += 0.2 * ps.spacing * (2.0 * uniform01(rng) - 1.0);
        ps.pos(1, i) += 0.2 * ps.spacing * (2.0 * uniform01(rng) - 1.0);
    }
    wrap_positions(ps);
    const Scalar before = shepard_residual(ps);
    const Scalar chi0 = chi_uniform(32, 1.0, 1.2, QS);
    ShiftConfig cfg;
    ipst_shift(ps, QS, cfg, chi0);
    const Scalar after = shepard_residual(ps);
    CHECK(after < before);
}

TEST_CASE("single pass equals the first iteration of the iterative shift") {
    ParticleSet a = packed(50, 21);
    ParticleSet b = a;
    const Scalar chi0 = chi_uniform(50, 1.0, 1.2, QS);

    const ShiftResult ra = single_pass_shift(a, QS, chi0);
    ShiftConfig cfg;
    cfg.max_iterations = 1;
    cfg.epsilon = 1e-15; // force the pass
    const ShiftResult rb = ipst_shift(b, QS, cfg, chi0, 0.25);
    CHECK(ra.iterations == 1);
    CHECK(rb.iterations == 1);
    CHECK((ra.displacement - rb.displacement).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.pos.leftCols(a.n_fluid) - b.pos.leftCols(b.n_fluid)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Taylor property transfer") {
    ParticleSet ps = packed(50, 33);
    const Scalar cutoff = QS.support_radius * ps.h;
    apply_periodic_ghosts(ps, cutoff);
    NeighborTable nbrs = neighbor_search(ps, cutoff);
    ps.omega.head(ps.n_local) = numerical_volume(ps, nbrs, QS);
    sync_ghost_fields(ps);

    // linear fields transfer exactly for any displacement
    for (Index i = 0; i < ps.n_total(); ++i) {
        const Scalar x = ps.pos(0, i), y = ps.pos(1, i);
        ps.vel(0, i) = 2.0 * x + y;
        ps.vel(1, i) = -x + 3.0 * y;
        ps.pressure[i] = 0.5 * x - 0.25 * y + 1.0;
        ps.varrho[i] = 1.0 + 0.1 * x;
    }
    CorrectionSet corr;
    compute_bonet(ps, nbrs, QS, corr);
    const TaylorGradients tg = taylor_gradients(ps, nbrs, corr, QS);

    // zero displacement: fluid properties unchanged
    {
        ParticleSet copy = ps;
        taylor_update(copy, tg, Mat2X::Zero(2, ps.n_fluid));
        CHECK((copy.vel.leftCols(ps.n_fluid) - ps.vel.leftCols(ps.n_fluid)).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK((copy.pressure.head(ps.n_fluid) - ps.pressure.head(ps.n_fluid)).abs().maxCoeff() ==
              0.0);
    }

    std::mt19937_64 rng(4);
    Mat2X disp(2, ps.n_fluid);
    for (Index i = 0; i < ps.n_fluid; ++i) {
        disp(0, i) = 0.4 * ps.spacing * (2.0 * uniform01(rng) - 1.0);
        disp(1, i) = 0.4 * ps.spacing * (2.0 * uniform01(rng) - 1.0);
    }
    ParticleSet moved = ps;
    taylor_update(moved, tg, disp);
    for (Index i = 0; i < ps.n_fluid; ++i) {
        const Scalar x = ps.pos(0, i) + disp(0, i);
        const Scalar y = ps.pos(1, i) + disp(1, i);
        CHECK(std::abs(moved.vel(0, i) - (2.0 * x + y)) < 1e-10);
        CHECK(std::abs(moved.vel(1, i) - (-x + 3.0 * y)) < 1e-10);
        CHECK(std::abs(moved.pressure[i] - (0.5 * x - 0.25 * y + 1.0)) < 1e-10);
        CHECK(std::abs(moved.varrho[i] - (1.0 + 0.1 * x)) < 1e-10);
    }
}

TEST_CASE("Taylor transfer of the vortex field is second-order in the spacing") {
    auto transfer_error = [](Index nx) {
        ParticleSet ps = build_up_lattice(nx, 1.0, 1.2);
        const Scalar cutoff = QS.support_radius * ps.h;
        apply_periodic_ghosts(ps, cutoff);
        NeighborTable nbrs = neighbor_search(ps, cutoff);
        ps.omega.head(ps.n_local) = numerical_volume(ps, nbrs, QS);
        sync_ghost_fields(ps);
        const CaseSpec cs = make_case(CaseId::TaylorGreen);
        init_taylor_green(ps, cs, make_tait(1.0, 10.0));
        CorrectionSet corr;
        compute_bonet(ps, nbrs, QS, corr);
        const TaylorGradients tg = taylor_gradients(ps, nbrs, corr, QS);
        const Mat2X disp = Mat2X::Constant(2, ps.n_fluid, 0.1 * ps.spacing);
        taylor_update(ps, tg, disp);
        Scalar err = 0.0;
        for (Index i = 0; i < ps.n_fluid; ++i) {
            Scalar ue, ve, pe;
            exact_taylor_green(ps.pos.col(i) + disp.col(i), 0.0, cs.reynolds, cs.u_ref, ue, ve, pe);
            err = std::max(err, std::abs(ps.vel(0, i) - ue));
        }
        return err;
    };
    const Scalar e100 = transfer_error(100);
    CHECK(e100 < 1e-4);
    // halving the spacing cuts the error by about four
    const Scalar e50 = transfer_error(50);
    CHECK(e100 < 0.35 * e50);
}

TEST_CASE("remeshing: nodal reproduction, constants, linears") {
    // sources already on the lattice: every property reproduced exactly
    ParticleSet ps = build_up_lattice(24, 1.0, 1.2);
    for (Index i = 0; i < ps.n_fluid; ++i) {
        const Scalar x = ps.pos(0, i), y = ps.pos(1, i);
        ps.vel(0, i) = std::sin(2 * pi_v * x) * y;
        ps.vel(1, i) = x * x - y;
        ps.pressure[i] = std::cos(2 * pi_v * y);
        ps.varrho[i] = 1.0 + 0.05 * x * y;
    }
    const Mat2X lattice = ps.pos.leftCols(ps.n_fluid);
    ParticleSet out = remesh_m4(ps, lattice);
    CHECK((out.vel.leftCols(out.n_fluid) - ps.vel.leftCols(ps.n_fluid)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((out.pressure.head(out.n_fluid) - ps.pressure.head(ps.n_fluid)).abs().maxCoeff() <
          1e-12);

    // perturbed sources: constants exact (Shepard normalization), mass and
    // h carried over
    ParticleSet pp = packed(50, 5);
    for (Index i = 0; i < pp.n_fluid; ++i) {
        pp.vel(0, i) = 3.14;
        pp.vel(1, i) = -0.5;
        pp.pressure[i] = 42.0;
        pp.varrho[i] = 2.0;
    }
    const ParticleSet up = build_up_lattice(50, 1.0, 1.2);
    const Mat2X nodes = up.pos.leftCols(up.n_fluid);
    ParticleSet re = remesh_m4(pp, nodes);
    for (Index i = 0; i < re.n_fluid; ++i) {
        CHECK(std::abs(re.vel(0, i) - 3.14) < 1e-12);
        CHECK(std::abs(re.pressure[i] - 42.0) < 1e-12);
    }
    CHECK((re.mass - pp.mass.head(pp.n_fluid)).abs().maxCoeff() == 0.0);
    CHECK(re.h == pp.h);

    // conservation of sum(phi * omega) for constant fields
    const Scalar before = (pp.varrho.head(pp.n_fluid) * (up.spacing * up.spacing)).sum();
    const Scalar after = (re.varrho.head(re.n_fluid) * (up.spacing * up.spacing)).sum();
    CHECK(before == doctest::Approx(after).epsilon(1e-13));

    // lattice sources, shifted targets: linears interpolate exactly on the
    // interior (the kernel's discrete moment conditions)
    ParticleSet src = build_up_lattice(50, 1.0, 1.2);
    for (Index i = 0; i < src.n_fluid; ++i) {
        const Scalar x = src.pos(0, i), y = src.pos(1, i);
        src.vel(0, i) = 1.0 - 2.0 * x + 0.5 * y;
        src.vel(1, i) = 0.25 * x + y;
    }
    Mat2X shifted = nodes;
    shifted.row(0).array() += 0.3 * src.spacing;
    shifted.row(1).array() += 0.7 * src.spacing;
    ParticleSet rs = remesh_m4(src, shifted);
    Scalar lin_err = 0.0;
    for (Index i = 0; i < rs.n_fluid; ++i) {
        const Scalar x = rs.pos(0, i), y = rs.pos(1, i);
        const Scalar margin = 4.0 * src.spacing; // linear test field is not periodic
        if (x < margin || x > 1.0 - margin || y < margin || y > 1.0 - margin) continue;
        lin_err = std::max(lin_err, std::abs(rs.vel(0, i) - (1.0 - 2.0 * x + 0.5 * y)));
        lin_err = std::max(lin_err, std::abs(rs.vel(1, i) - (0.25 * x + y)));
    }
    CHECK(lin_err < 1e-12);
}

TEST_CASE("remeshing drift on smooth fields is second order") {
    // sources sit near the lattice, as they do when remeshing every step
    auto remesh_error = [](Index nx) {
        ParticleSet pp = build_up_lattice(nx, 1.0, 1.2);
        for (Index i = 0; i < pp.n_fluid; ++i) {
            const Scalar x = pp.pos(0, i), y = pp.pos(1, i);
            pp.pos(0, i) += 0.05 * pp.spacing * std::sin(2 * pi_v * y);
            pp.pos(1, i) += 0.05 * pp.spacing * std::cos(2 * pi_v * x);
        }
        const CaseSpec cs = make_case(CaseId::TaylorGreen);
        init_taylor_green(pp, cs, make_tait(1.0, 10.0));
        const ParticleSet up = build_up_lattice(nx, 1.0, 1.2);
        ParticleSet re = remesh_m4(pp, up.pos.leftCols(up.n_fluid));
        Scalar err = 0.0;
        for (Index i = 0; i < re.n_fluid; ++i) {
            Scalar ue, ve, pe;
            exact_taylor_green(re.pos.col(i), 0.0, cs.reynolds, cs.u_ref, ue, ve, pe);
            err = std::max(err, std::abs(re.vel(0, i) - ue));
        }
        return err;
    };
    const Scalar e50 = remesh_error(50);
    const Scalar e100 = remesh_error(100);
    CHECK(e50 < 5e-2);
    CHECK(e100 < 0.35 * e50);
}

TEST_CASE("packing error reporting") {
    PackingOptions po;
    po.perturb_scale = 0.6; // out of contract
    CHECK_THROWS_AS(build_pp_packed(16, 1.0, 1.2, QS, po), SphError);

    // unreachable tolerance carries the achieved residual
    PackingOptions hard;
    hard.seed = 1;
    hard.max_passes = 1;
    hard.uniformity_tol = 1e-9;
    try {
        build_pp_packed(16, 1.0, 1.2, QS, hard);
        CHECK(false);
    } catch (const PackingError& e) {
        CHECK(e.residual > 1e-9);
    }
}
