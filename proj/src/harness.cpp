#include "sphlab/harness.hpp"

#include "sphlab/fields.hpp"
#include "sphlab/neighbors.hpp"
#include "sphlab/walls.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#ifndef SPHLAB_GIT_REV
#define SPHLAB_GIT_REV "unknown"
#endif

namespace sphlab {

std::string git_revision() { return SPHLAB_GIT_REV; }

namespace {

using Clock = std::chrono::steady_clock;

Scalar seconds_since(Clock::time_point t0) {
    return std::chrono::duration<Scalar>(Clock::now() - t0).count();
}

std::string fmt6(Scalar v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

bool starts_on_lattice(const RunConfig& rc) {
    if (rc.arrangement == Arrangement::Unperturbed) return true;
    if (rc.arrangement == Arrangement::Packed) return false;
    // defaults: Eulerian and remeshed schemes, and every case whose reference
    // configuration is a lattice
    if (rc.scheme == SchemeId::EC || rc.scheme == SchemeId::LRrC) return true;
    return rc.case_id != CaseId::TaylorGreen;
}

std::function<void(const Vec2&, Scalar, Scalar&, Scalar&, Scalar&)>
make_exact_fn(const CaseSpec& cs) {
    switch (cs.id) {
    case CaseId::TaylorGreen:
        return [re = cs.reynolds, u0 = cs.u_ref](const Vec2& x, Scalar t, Scalar& u, Scalar& v,
                                                 Scalar& p) {
            exact_taylor_green(x, t, re, u0, u, v, p);
        };
    case CaseId::Gresho:
        return [](const Vec2& x, Scalar, Scalar& u, Scalar& v, Scalar& p) {
            exact_gresho(x, u, v, p);
        };
    case CaseId::Poiseuille:
        return [](const Vec2& x, Scalar, Scalar& u, Scalar& v, Scalar& p) {
            u = exact_poiseuille_u(x.y(), 0.8, 0.1, 1.0);
            v = 0.0;
            p = 0.0;
        };
    default:
        return {};
    }
}

Rates scheme_rhs(SimState& st, const SchemeConfig& cfg) {
    switch (cfg.id) {
    case SchemeId::PeIpstC: return rhs_pressure_evolution(st, cfg);
    case SchemeId::TvC: {
        if (st.delta_u.cols() != st.ps.n_fluid) st.delta_u = Mat2X::Zero(2, st.ps.n_fluid);
        return rhs_transport_velocity(st, cfg, st.delta_u);
    }
    case SchemeId::EC: return rhs_eulerian(st, cfg);
    default: return rhs_lagrangian(st, cfg);
    }
}

SchemeConfig build_scheme_config(const RunConfig& rc, const CaseSpec& cs) {
    SchemeConfig cfg = make_scheme(rc.scheme, rc.c0, cs.nu);
    cfg.cfl = rc.cfl;
    cfg.u_ref = cs.u_ref;
    cfg.density_diffusion = cs.density_diffusion;
    if (rc.density_diffusion) cfg.density_diffusion = *rc.density_diffusion;
    if (rc.pst_mode) cfg.shift.mode = *rc.pst_mode;
    if (rc.pst_eps > 0.0) cfg.shift.epsilon = rc.pst_eps;
    if (rc.pst_every > 0) cfg.shift.cadence = rc.pst_every;
    if (rc.remesh_every > 0) cfg.remesh_every = rc.remesh_every;
    if (rc.case_id == CaseId::Poiseuille) {
        cfg.wall_channel = true;
        cfg.body_force_x = cs.body_force_x;
    }
    return cfg;
}

ParticleSet build_initial(const RunConfig& rc, const CaseSpec& cs, const SchemeConfig& cfg,
                          const KernelSpec& k) {
    const Vec2 origin = rc.case_id == CaseId::Gresho ? Vec2(-0.5, -0.5) : Vec2(0.0, 0.0);
    ParticleSet ps;
    if (rc.case_id == CaseId::Poiseuille) {
        ps = build_channel(rc.nx, cs.length, 0.4, rc.h_ratio, k);
    } else if (starts_on_lattice(rc)) {
        ps = build_up_lattice(rc.nx, cs.length, rc.h_ratio, cs.rho0, origin);
    } else {
        PackingOptions po;
        po.perturb_scale = rc.perturb_scale;
        po.seed = rc.seed;
        ps = build_pp_packed_cached(rc.nx, cs.length, rc.h_ratio, k, po, "", origin);
    }
    const Eos eos = cfg.eos(cs.rho0);
    switch (rc.case_id) {
    case CaseId::TaylorGreen: init_taylor_green(ps, cs, eos); break;
    case CaseId::Gresho: init_gresho(ps, eos); break;
    case CaseId::ShearLayer: init_shear_layer(ps); break;
    case CaseId::Poiseuille: init_poiseuille(ps); break;
    }
    return ps;
}

std::string dump_name(const RunConfig& rc, long step) {
    return case_name(rc.case_id) + "_" + scheme_name(rc.scheme) + "_" + std::to_string(rc.nx) +
           "_" + std::to_string(step) + ".csv";
}

} // namespace

RunResult run_simulation(const RunConfig& rc, bool keep_state) {
    const KernelSpec k = make_kernel(rc.kernel);
    CaseSpec cs = make_case(rc.case_id, rc.reynolds);
    const Scalar tf = rc.t_final >= 0.0 ? rc.t_final : cs.t_final;
    const SchemeConfig cfg = build_scheme_config(rc, cs);

    auto st_ptr = std::make_shared<SimState>(make_sim_state(cfg, k, build_initial(rc, cs, cfg, k)));
    SimState& st = *st_ptr;

    RunResult rr;
    SpacetimeL1 l1;
    auto exact = cs.has_exact ? make_exact_fn(cs) : nullptr;
    const long max_steps = rc.max_steps > 0 ? rc.max_steps : std::numeric_limits<long>::max();

    if (!rc.out_dir.empty()) std::filesystem::create_directories(rc.out_dir);
    if (rc.dump_every > 0 && !rc.out_dir.empty())
        write_particle_csv(st.ps, rc.out_dir + "/" + dump_name(rc, 0));

    const auto t0 = Clock::now();
    try {
        while (st.time < tf - 1e-12 && st.step < max_steps) {
            Scalar dt = rc.dt_override > 0.0 ? rc.dt_override : compute_dt(st, cfg);
            if (st.time + dt > tf) dt = tf - st.time;
            const auto ts = Clock::now();
            step_scheme(st, cfg, dt);
            if (st.step == 1) rr.first_step_seconds = seconds_since(ts);
            if (exact) l1.accumulate(st.ps, st.time, dt, exact);
            if (rc.sample_every > 0 && st.step % rc.sample_every == 0)
                rr.series.push_back(conservation_sample(st.ps, st.time));
            if (rc.dump_every > 0 && !rc.out_dir.empty() && st.step % rc.dump_every == 0)
                write_particle_csv(st.ps, rc.out_dir + "/" + dump_name(rc, st.step));
        }
    } catch (const DivergenceError& e) {
        rr.failed = true;
        rr.failed_at_step = e.step;
        rr.failure = e.what();
    }
    rr.wall_seconds = seconds_since(t0);
    rr.steps = st.step;
    rr.end_time = st.time;
    rr.diag = st.diag;

    if (exact) {
        rr.l1_u = l1.u;
        rr.l1_p = l1.p;
    }
    if (!rr.failed) {
        // final-time field error and the force balance of one RHS evaluation
        if (exact) {
            ArrayX speed(st.ps.n_fluid), speed_e(st.ps.n_fluid);
            for (Index i = 0; i < st.ps.n_fluid; ++i) {
                Scalar ue, ve, pe;
                exact(st.ps.pos.col(i), st.time, ue, ve, pe);
                speed[i] = st.ps.vel.col(i).norm();
                speed_e[i] = std::hypot(ue, ve);
            }
            rr.l1_u_final = l1_field_error(speed, speed_e).value;
        }
        SchemeConfig cfg2 = cfg;
        Rates r = scheme_rhs(st, cfg2);
        rr.total_force_ratio = total_force_ratio(r.acc, st.ps.n_fluid);
        for (Index i = 0; i < st.ps.n_fluid; ++i)
            rr.max_speed_final = std::max(rr.max_speed_final, st.ps.vel.col(i).norm());
    }
    if (!rc.out_dir.empty()) {
        write_run_json(rc, rr, rc.out_dir + "/run_" + case_name(rc.case_id) + "_" +
                                   scheme_name(rc.scheme) + "_" + std::to_string(rc.nx) + ".json");
        if (rc.dump_every > 0) write_particle_csv(st.ps, rc.out_dir + "/" + dump_name(rc, st.step));
    }
    if (keep_state) rr.final_state = st_ptr;
    return rr;
}

ConvergenceReport run_convergence_ladder(const LadderConfig& lc) {
    ConvergenceReport rep;
    rep.scheme = scheme_name(lc.base.scheme);
    rep.case_name = case_name(lc.base.case_id);
    rep.kernel = lc.base.kernel;
    rep.c0 = lc.base.c0;
    rep.seed = lc.base.seed;
    rep.git_rev = git_revision();

    std::vector<Index> nx_sorted = lc.nx_list;
    std::sort(nx_sorted.begin(), nx_sorted.end());

    Scalar shared_dt = lc.base.dt_override;
    if (lc.dt_mode == DtMode::Shared && shared_dt <= 0.0) {
        const CaseSpec cs = make_case(lc.base.case_id, lc.base.reynolds);
        const Scalar h_finest = lc.base.h_ratio * cs.length / static_cast<Scalar>(nx_sorted.back());
        shared_dt = lc.base.cfl * h_finest / (cs.u_ref + lc.base.c0);
    }

    for (Index nx : nx_sorted) {
        RunConfig rc = lc.base;
        rc.nx = nx;
        if (lc.dt_mode == DtMode::Shared) rc.dt_override = shared_dt;
        RunResult rr;
        try {
            rr = run_simulation(rc);
        } catch (const SphError& e) {
            rr.failed = true;
            rr.failure = e.what();
        }
        LadderRow row;
        row.nx = nx;
        const CaseSpec cs = make_case(lc.base.case_id, lc.base.reynolds);
        row.ds = cs.length / static_cast<Scalar>(nx);
        row.h = lc.base.h_ratio * row.ds;
        row.l1_u = rr.l1_u;
        row.l1_p = rr.l1_p;
        row.total_force_ratio = rr.total_force_ratio;
        row.wall_seconds = rr.wall_seconds;
        row.failed = rr.failed;
        row.failed_at_step = rr.failed_at_step;
        rep.rows.push_back(row);
    }

    std::vector<Scalar> hs, eu, ep;
    for (const auto& r : rep.rows) {
        if (r.failed || !(r.l1_u > 0.0) || !(r.l1_p > 0.0)) continue;
        hs.push_back(r.h);
        eu.push_back(r.l1_u);
        ep.push_back(r.l1_p);
    }
    if (hs.size() >= 3) {
        rep.order_u = fit_order(hs, eu);
        rep.order_p = fit_order(hs, ep);
        rep.orders_valid = true;
    }
    return rep;
}

StudyKind study_kind_from_name(const std::string& name) {
    if (name == "grad") return StudyKind::Grad;
    if (name == "div") return StudyKind::Div;
    if (name == "lap") return StudyKind::Lap;
    if (name == "func") return StudyKind::Func;
    throw SphError("unknown study kind '" + name + "'");
}

namespace {

struct StudyDomain {
    ParticleSet ps;
    NeighborTable nbrs;
};

// The study box has edge 2 so that sin(pi(x+y)) is periodic and ghost
// copies agree with the analytic field.
constexpr Scalar study_box = 2.0;

StudyDomain make_study_domain(Index nx, bool packed, const std::string& kernel_name,
                              Scalar h_ratio, std::uint64_t seed) {
    const KernelSpec k = make_kernel(kernel_name);
    StudyDomain d;
    if (packed) {
        PackingOptions po;
        po.seed = seed;
        d.ps = build_pp_packed_cached(nx, study_box, h_ratio, k, po);
    } else {
        d.ps = build_up_lattice(nx, study_box, h_ratio);
    }
    const Scalar cutoff = k.support_radius * d.ps.h;
    apply_periodic_ghosts(d.ps, cutoff);
    d.nbrs = neighbor_search(d.ps, cutoff);
    d.ps.omega.head(d.ps.n_local) = numerical_volume(d.ps, d.nbrs, k);
    d.ps.rho_sum.head(d.ps.n_local) = summation_density(d.ps, d.nbrs, k);
    sync_ghost_fields(d.ps);
    return d;
}

} // namespace

StudyReport operator_study(const StudyConfig& sc) {
    const KernelSpec k = make_kernel(sc.kernel);
    StudyReport rep;

    for (Index nx : sc.nx_list) {
        StudyDomain d = make_study_domain(nx, sc.packed, sc.kernel, sc.h_ratio, sc.seed);
        ParticleSet& ps = d.ps;
        const Index n = ps.n_fluid;
        const Index nt = ps.n_total();

        // fields are evaluated analytically everywhere, including images
        ArrayX scalar_field(nt);
        Mat2X vec_field(2, nt);
        for (Index i = 0; i < nt; ++i) {
            const Scalar x = ps.pos(0, i), y = ps.pos(1, i);
            const Scalar s = std::sin(pi_v * (x + y));
            scalar_field[i] = s;
            if (sc.divergence_free_field) {
                vec_field(0, i) = -std::cos(2 * pi_v * x) * std::sin(2 * pi_v * y);
                vec_field(1, i) = std::sin(2 * pi_v * x) * std::cos(2 * pi_v * y);
            } else {
                vec_field(0, i) = s;
                vec_field(1, i) = s;
            }
        }

        StudyRow row;
        row.nx = nx;
        const auto t0 = Clock::now();

        CorrectionSet corr;
        ArrayX approx_scalar;
        Mat2X approx_vec;
        switch (sc.kind) {
        case StudyKind::Grad: {
            const GradientForm form = gradient_form_from_name(sc.form);
            if (gradient_needs_bonet(form)) compute_bonet(ps, d.nbrs, k, corr);
            if (gradient_needs_liu(form)) {
                compute_liu(ps, d.nbrs, k, corr);
                mirror_to_images(ps, corr.liu_inv);
            }
            approx_vec = gradient(ps, d.nbrs, corr, form, scalar_field, ps.rho_sum, k);
            break;
        }
        case StudyKind::Div: {
            const DivergenceForm form = divergence_form_from_name(sc.form);
            if (form == DivergenceForm::DivBC) compute_bonet(ps, d.nbrs, k, corr);
            approx_scalar = divergence(ps, d.nbrs, corr, form, vec_field, k);
            break;
        }
        case StudyKind::Lap: {
            const LaplacianForm form = laplacian_form_from_name(sc.form);
            if (laplacian_needs_bonet(form)) compute_bonet(ps, d.nbrs, k, corr);
            if (laplacian_needs_liu(form)) {
                compute_liu(ps, d.nbrs, k, corr);
                mirror_to_images(ps, corr.liu_inv);
            }
            if (form == LaplacianForm::FatehiC) compute_fatehi(ps, d.nbrs, k, corr);
            if (form == LaplacianForm::Korzilius) compute_korzilius(ps, d.nbrs, k, corr);
            approx_vec = laplacian(ps, d.nbrs, corr, form, vec_field, k);
            break;
        }
        case StudyKind::Func:
            approx_scalar = function_approx(ps, d.nbrs, k, scalar_field);
            break;
        }
        row.seconds = seconds_since(t0);

        // references (x components for the vector results)
        ArrayX approx(n), exact(n);
        for (Index i = 0; i < n; ++i) {
            const Scalar x = ps.pos(0, i), y = ps.pos(1, i);
            switch (sc.kind) {
            case StudyKind::Grad:
                approx[i] = approx_vec(0, i);
                exact[i] = pi_v * std::cos(pi_v * (x + y)) / ps.rho_sum[i];
                break;
            case StudyKind::Div:
                approx[i] = approx_scalar[i];
                exact[i] = sc.divergence_free_field ? 0.0 : 2.0 * pi_v * std::cos(pi_v * (x + y));
                break;
            case StudyKind::Lap:
                approx[i] = approx_vec(0, i);
                exact[i] = -2.0 * pi_v * pi_v * std::sin(pi_v * (x + y));
                break;
            case StudyKind::Func:
                approx[i] = approx_scalar[i];
                exact[i] = std::sin(pi_v * (x + y));
                break;
            }
        }
        const L1Result l1 = l1_field_error(approx, exact);
        row.l1 = l1.value;
        row.absolute_fallback = l1.absolute_fallback;

        if (sc.kind == StudyKind::Grad || sc.kind == StudyKind::Lap) {
            row.total_force_ratio = total_force_ratio(approx_vec, n);
        } else {
            Scalar tot = 0.0, amax = 0.0;
            for (Index i = 0; i < n; ++i) {
                tot += approx[i];
                amax = std::max(amax, std::abs(approx[i]));
            }
            row.total_force_ratio = amax > 0.0 ? std::abs(tot) / amax : 0.0;
        }
        rep.rows.push_back(row);
    }

    if (rep.rows.size() >= 3) {
        std::vector<Scalar> hs, err;
        for (const auto& r : rep.rows) {
            if (!(r.l1 > 0.0)) continue;
            hs.push_back(sc.h_ratio * study_box / static_cast<Scalar>(r.nx));
            err.push_back(r.l1);
        }
        if (hs.size() >= 3) {
            rep.order = fit_order(hs, err);
            rep.order_valid = true;
        }
    }
    if (!sc.out_csv.empty()) write_study_csv(rep, sc.out_csv);
    return rep;
}

std::vector<CostRow> cost_report(const std::vector<SchemeId>& schemes,
                                 const std::vector<Index>& nx_list, long n_steps,
                                 const RunConfig& base) {
    std::vector<CostRow> rows;
    for (SchemeId s : schemes) {
        for (Index nx : nx_list) {
            RunConfig rc = base;
            rc.scheme = s;
            rc.nx = nx;
            rc.max_steps = n_steps;
            rc.t_final = 1e30;
            RunResult rr = run_simulation(rc);
            CostRow row;
            row.scheme = scheme_name(s);
            row.nx = nx;
            // warm-up step excluded
            row.wall_seconds = rr.wall_seconds - rr.first_step_seconds;
            row.l1_u = rr.l1_u;
            rows.push_back(row);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// writers

void write_particle_csv(const ParticleSet& ps, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw SphError("cannot open " + path);
    f << "x,y,u,v,p,rho_fluid,rho_sum,m,omega,is_ghost\n";
    for (Index i = 0; i < ps.n_total(); ++i) {
        const int ghost = ps.tag[static_cast<std::size_t>(i)] == ParticleTag::Fluid ? 0 : 1;
        f << fmt6(ps.pos(0, i)) << ',' << fmt6(ps.pos(1, i)) << ',' << fmt6(ps.vel(0, i)) << ','
          << fmt6(ps.vel(1, i)) << ',' << fmt6(ps.pressure[i]) << ',' << fmt6(ps.varrho[i]) << ','
          << fmt6(ps.rho_sum[i]) << ',' << fmt6(ps.mass[i]) << ',' << fmt6(ps.omega[i]) << ','
          << ghost << '\n';
    }
}

void write_run_json(const RunConfig& rc, const RunResult& rr, const std::string& path) {
    nlohmann::json j;
    j["scheme"] = scheme_name(rc.scheme);
    j["case"] = case_name(rc.case_id);
    j["nx"] = rc.nx;
    j["co"] = rc.c0;
    j["l1_u"] = rr.l1_u;
    j["l1_p"] = rr.l1_p;
    j["order_context"] = rc.order_context;
    j["total_force_ratio"] = rr.total_force_ratio;
    j["wall_time_s"] = rr.wall_seconds;
    if (rr.failed) j["failed_at_step"] = rr.failed_at_step;
    j["steps"] = rr.steps;
    j["seed"] = rc.seed;
    j["kernel"] = rc.kernel;
    j["git_rev"] = git_revision();
    j["ipst"] = {{"applications", rr.diag.ipst_applications},
                 {"iterations", rr.diag.ipst_iterations},
                 {"monotonicity_violations", rr.diag.ipst_monotonicity_violations},
                 {"clamped", rr.diag.shift_clamped}};
    j["singular"] = {{"bonet", rr.diag.bonet_singular},
                     {"liu", rr.diag.liu_singular},
                     {"fatehi", rr.diag.fatehi_singular},
                     {"korzilius", rr.diag.korzilius_singular}};
    std::ofstream f(path);
    if (!f) throw SphError("cannot open " + path);
    f << j.dump(2) << '\n';
}

void write_ladder_csv(const ConvergenceReport& rep, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw SphError("cannot open " + path);
    f << "nx,ds,h,l1_u,l1_p,total_force_ratio,wall_seconds\n";
    for (const auto& r : rep.rows) {
        f << r.nx << ',' << fmt6(r.ds) << ',' << fmt6(r.h) << ',' << fmt6(r.l1_u) << ','
          << fmt6(r.l1_p) << ',' << fmt6(r.total_force_ratio) << ',' << fmt6(r.wall_seconds)
          << '\n';
    }
}

void write_ladder_json(const ConvergenceReport& rep, const std::string& path) {
    nlohmann::json j;
    j["scheme"] = rep.scheme;
    j["case"] = rep.case_name;
    j["kernel"] = rep.kernel;
    j["co"] = rep.c0;
    j["seed"] = rep.seed;
    j["git_rev"] = rep.git_rev;
    if (rep.orders_valid) {
        j["order_u"] = rep.order_u;
        j["order_p"] = rep.order_p;
    }
    auto rows = nlohmann::json::array();
    for (const auto& r : rep.rows) {
        nlohmann::json row{{"nx", r.nx},       {"ds", r.ds},
                           {"h", r.h},         {"l1_u", r.l1_u},
                           {"l1_p", r.l1_p},   {"total_force_ratio", r.total_force_ratio},
                           {"wall_seconds", r.wall_seconds}};
        if (r.failed) row["failed_at_step"] = r.failed_at_step;
        rows.push_back(row);
    }
    j["rows"] = rows;
    std::ofstream f(path);
    if (!f) throw SphError("cannot open " + path);
    f << j.dump(2) << '\n';
}

void write_study_csv(const StudyReport& rep, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw SphError("cannot open " + path);
    f << "nx,L1,order_fit,total_force_ratio,time_seconds\n";
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        const bool last = i + 1 == rep.rows.size();
        f << r.nx << ',' << fmt6(r.l1) << ',';
        if (last && rep.order_valid) f << fmt6(rep.order);
        f << ',' << fmt6(r.total_force_ratio) << ',' << fmt6(r.seconds) << '\n';
    }
}

void write_series_csv(const DiagnosticsSeries& series, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw SphError("cannot open " + path);
    f << "t,px,py,lz,kinetic_energy,max_speed\n";
    for (const auto& s : series) {
        f << fmt6(s.t) << ',' << fmt6(s.linear_momentum.x()) << ',' << fmt6(s.linear_momentum.y())
          << ',' << fmt6(s.angular_momentum) << ',' << fmt6(s.kinetic_energy) << ','
          << fmt6(s.max_speed) << '\n';
    }
}

void write_cost_csv(const std::vector<CostRow>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw SphError("cannot open " + path);
    f << "scheme,nx,wall_seconds,l1_u\n";
    for (const auto& r : rows)
        f << r.scheme << ',' << r.nx << ',' << fmt6(r.wall_seconds) << ',' << fmt6(r.l1_u) << '\n';
}

} // namespace sphlab
