#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sphlab/harness.hpp"
#include "oracles.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace sphlab;

namespace {
const KernelSpec QS = make_kernel(KernelKind::QuinticSpline);

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// drop the trailing (timing) column of every CSV line
std::string strip_last_column(const std::string& csv) {
    std::stringstream in(csv), out;
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        out << line.substr(0, pos) << '\n';
    }
    return out.str();
}
} // namespace

TEST_CASE("L1 field error") {
    ArrayX exact(4), approx(4);
    exact << 1.0, -2.0, 3.0, -4.0;
    approx = exact;
    CHECK(l1_field_error(approx, exact).value == 0.0);
    approx = 2.0 * exact;
    CHECK(l1_field_error(approx, exact).value == doctest::Approx(1.0).epsilon(1e-15));
    // zero reference: absolute fallback, flagged
    const ArrayX zero = ArrayX::Zero(4);
    const L1Result r = l1_field_error(approx, zero);
    CHECK(r.absolute_fallback);
    CHECK(r.value == doctest::Approx(approx.abs().mean()).epsilon(1e-15));
}

TEST_CASE("spacetime L1 accumulation") {
    ParticleSet ps = build_up_lattice(8, 1.0, 1.2);
    init_taylor_green(ps, make_case(CaseId::TaylorGreen), make_tait(1.0, 10.0));
    auto exact = [](const Vec2& x, Scalar t, Scalar& u, Scalar& v, Scalar& p) {
        exact_taylor_green(x, t, 100.0, 1.0, u, v, p);
    };
    SpacetimeL1 l1;
    l1.accumulate(ps, 0.0, 0.01, exact);
    CHECK(l1.u == 0.0); // exact replay
    CHECK(l1.p == 0.0);

    // constant pressure offset eps for duration T accumulates eps*T
    ParticleSet off = ps;
    off.pressure += 0.25;
    SpacetimeL1 l2;
    for (int k = 0; k < 10; ++k) l2.accumulate(off, 0.0, 0.05, exact);
    CHECK(l2.p == doctest::Approx(0.25 * 0.5).epsilon(1e-12));
}

TEST_CASE("order fitting") {
    std::vector<Scalar> h = {0.02, 0.01, 0.005, 0.0025};
    std::vector<Scalar> e2, flat;
    for (Scalar hh : h) {
        e2.push_back(3.7 * hh * hh);
        flat.push_back(0.42);
    }
    CHECK(fit_order(h, e2) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::abs(fit_order(h, flat)) < 1e-12);
    // scale invariance of the slope
    std::vector<Scalar> e2s = e2;
    for (auto& v : e2s) v *= 1000.0;
    CHECK(fit_order(h, e2s) == doctest::Approx(fit_order(h, e2)).epsilon(1e-12));
    CHECK_THROWS_AS(fit_order({0.1, 0.2}, {1.0, 2.0}), SphError);
}

TEST_CASE("conservation samples") {
    // velocity field antisymmetric about the center: zero momentum
    ParticleSet ps = build_up_lattice(16, 1.0, 1.2, 1.0, Vec2(-0.5, -0.5));
    for (Index i = 0; i < ps.n_fluid; ++i) {
        ps.vel(0, i) = std::sin(2 * pi_v * ps.pos(0, i));
        ps.vel(1, i) = std::sin(2 * pi_v * ps.pos(1, i));
    }
    const ConservationSample s = conservation_sample(ps, 0.0);
    CHECK(s.linear_momentum.norm() < 1e-12);

    // rigid rotation about the centroid: L_z = Omega * sum m |x|^2
    const Scalar omega_z = 0.7;
    for (Index i = 0; i < ps.n_fluid; ++i) {
        ps.vel(0, i) = -omega_z * ps.pos(1, i);
        ps.vel(1, i) = omega_z * ps.pos(0, i);
    }
    const ConservationSample r = conservation_sample(ps, 0.0);
    Scalar expect = 0.0;
    for (Index i = 0; i < ps.n_fluid; ++i)
        expect += ps.mass[i] * ps.pos.col(i).squaredNorm() * omega_z;
    CHECK(r.angular_momentum == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.kinetic_energy > 0.0);
}

TEST_CASE("vorticity against analytic references") {
    ParticleSet ps = build_up_lattice(48, 1.0, 1.2, 1.0, Vec2(-0.5, -0.5));
    const Scalar cutoff = QS.support_radius * ps.h;
    apply_periodic_ghosts(ps, cutoff);
    NeighborTable nbrs = neighbor_search(ps, cutoff);
    ps.omega.head(ps.n_local) = numerical_volume(ps, nbrs, QS);
    sync_ghost_fields(ps);
    CorrectionSet corr;
    compute_bonet(ps, nbrs, QS, corr);

    // rigid rotation: omega_z = 2 Omega (ghost velocities set analytically:
    // a rotating field is not periodic, so the copies would be wrong)
    const Scalar omg = 1.3;
    for (Index i = 0; i < ps.n_total(); ++i) {
        ps.vel(0, i) = -omg * ps.pos(1, i);
        ps.vel(1, i) = omg * ps.pos(0, i);
    }
    ArrayX wz = vorticity_field(ps, nbrs, corr, QS);
    for (Index i = 0; i < ps.n_fluid; ++i)
        CHECK(wz[i] == doctest::Approx(2.0 * omg).epsilon(1e-9));

    // uniform flow: zero exactly
    ps.vel.setConstant(0.8);
    wz = vorticity_field(ps, nbrs, corr, QS);
    CHECK(wz.abs().maxCoeff() == 0.0);

    // vortex field at t=0: omega_z = 4 pi U cos(2 pi x) cos(2 pi y); the
    // approximation carries the usual O(h^2) error, so check the level at
    // one resolution and the second-order drop at the next
    auto tg_vorticity_err = [](Index nx) {
        ParticleSet q = build_up_lattice(nx, 1.0, 1.2);
        const Scalar cut = QS.support_radius * q.h;
        apply_periodic_ghosts(q, cut);
        NeighborTable nb = neighbor_search(q, cut);
        q.omega.head(q.n_local) = numerical_volume(q, nb, QS);
        sync_ghost_fields(q);
        CorrectionSet cr;
        compute_bonet(q, nb, QS, cr);
        for (Index i = 0; i < q.n_total(); ++i) {
            Scalar u, v, p;
            exact_taylor_green(q.pos.col(i), 0.0, 100.0, 1.0, u, v, p);
            q.vel(0, i) = u;
            q.vel(1, i) = v;
        }
        const ArrayX w = vorticity_field(q, nb, cr, QS);
        Scalar num = 0.0, den = 0.0;
        for (Index i = 0; i < q.n_fluid; ++i) {
            const Scalar exact =
                4.0 * pi_v * std::cos(2 * pi_v * q.pos(0, i)) * std::cos(2 * pi_v * q.pos(1, i));
            num += std::abs(w[i] - exact);
            den += std::abs(exact);
        }
        return num / den;
    };
    const Scalar e48 = tg_vorticity_err(48);
    CHECK(e48 < 2e-2);
    CHECK(tg_vorticity_err(96) < 0.3 * e48);
}

TEST_CASE("exact-replay ladder has zero error and skips the fit") {
    LadderConfig lc;
    lc.base.scheme = SchemeId::EC;
    lc.base.case_id = CaseId::TaylorGreen;
    lc.base.t_final = 0.0; // no steps: fields stay the exact initial data
    lc.nx_list = {8, 12, 16};
    const ConvergenceReport rep = run_convergence_ladder(lc);
    REQUIRE(rep.rows.size() == 3);
    for (const auto& r : rep.rows) CHECK(r.l1_u == 0.0);
    CHECK_FALSE(rep.orders_valid);
}

TEST_CASE("ladder rows are independent of the requested order") {
    LadderConfig lc;
    lc.base.scheme = SchemeId::EC;
    lc.base.case_id = CaseId::TaylorGreen;
    lc.base.c0 = 10.0;
    lc.base.max_steps = 1;
    lc.base.t_final = 1.0;
    lc.base.dt_override = 1e-4;
    lc.nx_list = {12, 8, 16};
    const ConvergenceReport a = run_convergence_ladder(lc);
    lc.nx_list = {16, 12, 8};
    const ConvergenceReport b = run_convergence_ladder(lc);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].nx == b.rows[k].nx);
        CHECK(a.rows[k].l1_u == b.rows[k].l1_u);
    }
}

TEST_CASE("reports are byte-stable apart from the timing column") {
    LadderConfig lc;
    lc.base.scheme = SchemeId::LIpstC;
    lc.base.case_id = CaseId::TaylorGreen;
    lc.base.c0 = 10.0;
    lc.base.max_steps = 2;
    lc.base.t_final = 1.0;
    lc.base.seed = 11;
    lc.nx_list = {8, 12, 16};
    lc.dt_mode = DtMode::Shared;

    const ConvergenceReport r1 = run_convergence_ladder(lc);
    const ConvergenceReport r2 = run_convergence_ladder(lc);
    write_ladder_csv(r1, "det_a.csv");
    write_ladder_csv(r2, "det_b.csv");
    CHECK(strip_last_column(slurp("det_a.csv")) == strip_last_column(slurp("det_b.csv")));

    // frozen header
    const std::string csv = slurp("det_a.csv");
    CHECK(csv.rfind("nx,ds,h,l1_u,l1_p,total_force_ratio,wall_seconds\n", 0) == 0);
}

TEST_CASE("study CSV schema") {
    StudyConfig sc;
    sc.kind = StudyKind::Func;
    sc.packed = false;
    sc.nx_list = {8, 12, 16};
    sc.out_csv = "study_schema.csv";
    const StudyReport rep = operator_study(sc);
    REQUIRE(rep.rows.size() == 3);
    const std::string csv = slurp("study_schema.csv");
    CHECK(csv.rfind("nx,L1,order_fit,total_force_ratio,time_seconds\n", 0) == 0);
    // order only on the final row
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line); // header
    std::getline(ss, line);
    CHECK(line.find(",,") != std::string::npos);
}

TEST_CASE("function approximation converges at second order on the lattice") {
    StudyConfig sc;
    sc.kind = StudyKind::Func;
    sc.packed = false;
    sc.nx_list = {24, 48, 96};
    const StudyReport rep = operator_study(sc);
    REQUIRE(rep.order_valid);
    CHECK(rep.order > 1.8);
    CHECK(rep.order < 2.3);
}

TEST_CASE("particle dump format") {
    ParticleSet ps = build_up_lattice(4, 1.0, 1.2);
    apply_periodic_ghosts(ps, 0.3);
    write_particle_csv(ps, "dump_test.csv");
    const std::string csv = slurp("dump_test.csv");
    CHECK(csv.rfind("x,y,u,v,p,rho_fluid,rho_sum,m,omega,is_ghost\n", 0) == 0);
    // one row per particle plus header
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == ps.n_total() + 1);
}

TEST_CASE("cost table runtime grows with the step count") {
    RunConfig base;
    base.case_id = CaseId::TaylorGreen;
    base.c0 = 10.0;
    const auto fast = cost_report({SchemeId::EC}, {16}, 40, base);
    const auto slow = cost_report({SchemeId::EC}, {16}, 400, base);
    REQUIRE(fast.size() == 1);
    REQUIRE(slow.size() == 1);
    CHECK(slow[0].wall_seconds > fast[0].wall_seconds);
    CHECK(std::isfinite(fast[0].l1_u));
}
