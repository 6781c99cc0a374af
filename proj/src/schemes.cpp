#include "sphlab/schemes.hpp"

#include "sphlab/fields.hpp"
#include "sphlab/neighbors.hpp"
#include "sphlab/remesh.hpp"
#include "sphlab/walls.hpp"

#include <cmath>

namespace sphlab {

SchemeId scheme_from_name(const std::string& name) {
    if (name == "L-IPST-C") return SchemeId::LIpstC;
    if (name == "L-IPST-F") return SchemeId::LIpstF;
    if (name == "L-IPST-K") return SchemeId::LIpstK;
    if (name == "L-PST-C") return SchemeId::LPstC;
    if (name == "PE-IPST-C") return SchemeId::PeIpstC;
    if (name == "L-RR-C") return SchemeId::LRrC;
    if (name == "TV-C") return SchemeId::TvC;
    if (name == "E-C") return SchemeId::EC;
    throw SphError("unknown scheme '" + name + "'");
}

std::string scheme_name(SchemeId id) {
    switch (id) {
    case SchemeId::LIpstC: return "L-IPST-C";
    case SchemeId::LIpstF: return "L-IPST-F";
    case SchemeId::LIpstK: return "L-IPST-K";
    case SchemeId::LPstC: return "L-PST-C";
    case SchemeId::PeIpstC: return "PE-IPST-C";
    case SchemeId::LRrC: return "L-RR-C";
    case SchemeId::TvC: return "TV-C";
    case SchemeId::EC: return "E-C";
    }
    return "?";
}

SchemeConfig make_scheme(SchemeId id, Scalar c0, Scalar nu) {
    SchemeConfig cfg;
    cfg.id = id;
    cfg.c0 = c0;
    cfg.nu = nu;
    cfg.ops.gradient = GradientForm::AsymBC;
    cfg.ops.divergence = DivergenceForm::DivBC;
    cfg.ops.laplacian = LaplacianForm::CoupledBC;
    cfg.eos_kind = EosKind::Tait;
    cfg.shift.mode = ShiftMode::Iterative;
    cfg.shift.cadence = 10;
    switch (id) {
    case SchemeId::LIpstC:
        break;
    case SchemeId::LIpstF:
        cfg.ops.laplacian = LaplacianForm::FatehiC;
        break;
    case SchemeId::LIpstK:
        cfg.ops.laplacian = LaplacianForm::Korzilius;
        break;
    case SchemeId::LPstC:
        cfg.shift.mode = ShiftMode::SinglePass;
        cfg.shift.cadence = 1;
        break;
    case SchemeId::PeIpstC:
        cfg.eos_kind = EosKind::Linear;
        break;
    case SchemeId::LRrC:
        cfg.shift.mode = ShiftMode::Off;
        cfg.remesh_every = 1;
        break;
    case SchemeId::TvC:
        cfg.eos_kind = EosKind::Linear;
        cfg.shift.mode = ShiftMode::Off;
        break;
    case SchemeId::EC:
        cfg.eos_kind = EosKind::Linear;
        cfg.shift.mode = ShiftMode::Off;
        break;
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineData {
    bool lists_valid = false;
    bool fields_fresh = false;
    bool geometry_cached = false; // Eulerian: static positions
    Scalar skin = 0.0;
    Index n_dest = 0;
    Mat2X pos_at_build;
    NeighborTable nbrs;

    // per-edge kernel-gradient cache, filled by the geometry sweep and
    // reused by the field sweeps (and across stages for static grids)
    std::vector<Scalar> edge_gx, edge_gy;

    CorrectionSet corr;

    std::vector<Mat2> grad_u;  // inner velocity gradient, mirrored to images
    Mat2X grad_scalar;         // gradient of the diffused scalar, mirrored
    Mat2X grad_p_raw;          // corrected asymmetric pressure gradient
    Mat2X grad_p_over_rho;     // momentum pressure-gradient term, fluid only
    ArrayX div_u;
    Mat2X lap_u;
    ArrayX lap_scalar;
};

SimState::SimState() = default;
SimState::SimState(SimState&&) noexcept = default;
SimState& SimState::operator=(SimState&&) noexcept = default;
SimState::~SimState() = default;

namespace {

ArrayX& evolved_scalar_array(ParticleSet& ps, const SchemeConfig& cfg) {
    return cfg.evolved_scalar() == EvolvedScalar::Pressure ? ps.pressure : ps.varrho;
}

Scalar list_cutoff(const SimState& st) { return st.kernel.support_radius * st.ps.h; }

void maintain_lists(SimState& st, const SchemeConfig& cfg) {
    PipelineData& pp = *st.pipe;
    ParticleSet& ps = st.ps;
    bool rebuild = !pp.lists_valid;
    if (!rebuild) {
        Scalar maxdisp2 = 0.0;
        for (Index i = 0; i < ps.n_fluid; ++i)
            maxdisp2 = std::max(maxdisp2, (ps.pos.col(i) - pp.pos_at_build.col(i)).squaredNorm());
        rebuild = maxdisp2 > 0.25 * pp.skin * pp.skin;
    }
    if (!rebuild) return;
    pp.skin = cfg.moves_particles() ? 0.15 * ps.spacing : 0.0;
    wrap_positions(ps);
    const Scalar cutoff = list_cutoff(st);
    apply_periodic_ghosts(ps, cutoff + pp.skin);
    pp.n_dest = cfg.wall_channel ? ps.n_local : ps.n_fluid;
    pp.nbrs = neighbor_search(ps, cutoff, pp.n_dest, pp.skin);
    pp.pos_at_build = ps.pos.leftCols(ps.n_fluid);
    pp.lists_valid = true;
    pp.geometry_cached = false;
}

// Geometry sums: one kernel-evaluating sweep filling the per-edge cache
// together with the kernel sums, then a cache-driven sweep building the
// gradient moment matrix with the freshly updated volumes.
void sweep_geometry(SimState& st, const SchemeConfig& cfg) {
    PipelineData& pp = *st.pipe;
    ParticleSet& ps = st.ps;
    if (pp.geometry_cached) return;
    const Index nd = pp.n_dest;
    const Scalar w0 = kernel_value(st.kernel, 0.0, ps.h);
    const Scalar guard = 1e-12 * ps.h;

    const auto& ei = pp.nbrs.edge_i;
    const auto& ej = pp.nbrs.edge_j;
    const Index ne = pp.nbrs.n_edges();
    pp.edge_gx.resize(static_cast<std::size_t>(ne));
    pp.edge_gy.resize(static_cast<std::size_t>(ne));

    ArrayX sum_w = ArrayX::Constant(nd, w0);
    const bool uniform_mass =
        (ps.mass.head(ps.n_total()).maxCoeff() == ps.mass.head(ps.n_total()).minCoeff());
    ArrayX rho;
    if (!uniform_mass) {
        rho.resize(nd);
        for (Index i = 0; i < nd; ++i) rho[i] = ps.mass[i] * w0;
    }

    for (Index e = 0; e < ne; ++e) {
        const Index i = ei[static_cast<std::size_t>(e)];
        const Index j = ej[static_cast<std::size_t>(e)];
        const Vec2 x_ij = ps.pos.col(i) - ps.pos.col(j);
        const Scalar r = x_ij.norm();
        Scalar w = 0.0, gmag = 0.0;
        if (r >= guard) kernel_value_gradient(st.kernel, r, ps.h, w, gmag);
        pp.edge_gx[static_cast<std::size_t>(e)] = gmag * x_ij.x();
        pp.edge_gy[static_cast<std::size_t>(e)] = gmag * x_ij.y();
        if (w == 0.0 && gmag == 0.0) continue;
        sum_w[i] += w;
        if (j < nd) sum_w[j] += w;
        if (!uniform_mass) {
            rho[i] += ps.mass[j] * w;
            if (j < nd) rho[j] += ps.mass[i] * w;
        }
    }

    for (Index i = 0; i < nd; ++i) {
        if (sum_w[i] <= 0.0) throw DegenerateVolumeError("prepare_stage: vanishing kernel sum");
        ps.omega[i] = 1.0 / sum_w[i];
        ps.rho_sum[i] = uniform_mass ? ps.mass[i] * sum_w[i] : rho[i];
    }

    // second pass so the moment matrix carries the volumes just computed
    pp.corr.bonet.assign(static_cast<std::size_t>(nd), Mat2::Identity());
    std::vector<Mat2> m2(static_cast<std::size_t>(nd), Mat2::Zero());
    for (Index e = 0; e < ne; ++e) {
        const Scalar gx = pp.edge_gx[static_cast<std::size_t>(e)];
        const Scalar gy = pp.edge_gy[static_cast<std::size_t>(e)];
        if (gx == 0.0 && gy == 0.0) continue;
        const Index i = ei[static_cast<std::size_t>(e)];
        const Index j = ej[static_cast<std::size_t>(e)];
        const Vec2 x_ij = ps.pos.col(i) - ps.pos.col(j);
        Mat2 rank1;
        rank1(0, 0) = -gx * x_ij.x();
        rank1(0, 1) = -gy * x_ij.x();
        rank1(1, 0) = -gx * x_ij.y();
        rank1(1, 1) = -gy * x_ij.y();
        const Scalar om_j = j < nd ? ps.omega[j]
                                   : ps.omega[ps.image_source[static_cast<std::size_t>(j - ps.n_local)]];
        m2[static_cast<std::size_t>(i)] += om_j * rank1;
        if (j < nd) m2[static_cast<std::size_t>(j)] += ps.omega[i] * rank1;
    }
    for (Index i = 0; i < nd; ++i) {
        const Mat2& m = m2[static_cast<std::size_t>(i)];
        const Scalar det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        const Scalar scale = m.cwiseAbs().maxCoeff();
        if (std::abs(det) < scale * scale / 1e12 || scale == 0.0) {
            pp.corr.bonet[static_cast<std::size_t>(i)] = Mat2::Identity();
            ++st.diag.bonet_singular;
        } else {
            pp.corr.bonet[static_cast<std::size_t>(i)] = m.inverse();
        }
    }
    if (!cfg.moves_particles()) pp.geometry_cached = true;
}

void refresh_eos_and_ghosts(SimState& st, const SchemeConfig& cfg) {
    ParticleSet& ps = st.ps;
    const Eos eos = cfg.eos(ps.ref_density);
    if (cfg.evolved_scalar() == EvolvedScalar::Pressure) {
        for (Index i = 0; i < ps.n_fluid; ++i) ps.varrho[i] = eos.density(ps.pressure[i]);
    } else {
        for (Index i = 0; i < ps.n_fluid; ++i) {
            if (!(ps.varrho[i] > 0.0))
                throw DivergenceError(st.step, i, "non-positive fluid density");
            ps.pressure[i] = eos.pressure(ps.varrho[i]);
        }
    }
    if (cfg.wall_channel) {
        ps.vel_slip.leftCols(ps.n_fluid) = ps.vel.leftCols(ps.n_fluid);
        WallSpec wall{cfg.wall_velocity_x};
        const WallBcStats s = apply_wall_bc(ps, st.pipe->nbrs, st.kernel, eos, wall);
        st.diag.wall_unsupported += s.unsupported;
    } else {
        ps.vel_slip.leftCols(ps.n_local) = ps.vel.leftCols(ps.n_local);
    }
    sync_ghost_fields(ps);
    mirror_to_images(ps, st.pipe->corr.bonet);
}

// Inner sweep: corrected gradients of u, v, p and the diffused scalar, plus
// the corrected velocity divergence (slip velocity).
void sweep_inner(SimState& st, const SchemeConfig& cfg) {
    PipelineData& pp = *st.pipe;
    ParticleSet& ps = st.ps;
    const Index nd = pp.n_dest;
    const bool scalar_is_p = cfg.evolved_scalar() == EvolvedScalar::Pressure;
    const ArrayX& scal = scalar_is_p ? ps.pressure : ps.varrho;
    const bool need_scalar = cfg.diffusion_enabled();
    // outside wall cases the slip velocity is the plain one
    const Mat2X& uslip = cfg.wall_channel ? ps.vel_slip : ps.vel;

    pp.grad_u.assign(static_cast<std::size_t>(nd), Mat2::Zero());
    pp.grad_scalar = Mat2X::Zero(2, nd);
    Mat2X grad_p = Mat2X::Zero(2, nd);
    pp.div_u = ArrayX::Zero(nd);

    const auto& ei = pp.nbrs.edge_i;
    const auto& ej = pp.nbrs.edge_j;
    const Index ne = pp.nbrs.n_edges();
    for (Index e = 0; e < ne; ++e) {
        const Vec2 g(pp.edge_gx[static_cast<std::size_t>(e)],
                     pp.edge_gy[static_cast<std::size_t>(e)]);
        if (g.x() == 0.0 && g.y() == 0.0) continue;
        const Index i = ei[static_cast<std::size_t>(e)];
        const Index j = ej[static_cast<std::size_t>(e)];
        const Vec2 bg_i = pp.corr.bonet[static_cast<std::size_t>(i)] * g;
        const Vec2 du(ps.vel(0, j) - ps.vel(0, i), ps.vel(1, j) - ps.vel(1, i));
        const Vec2 dus(uslip(0, j) - uslip(0, i), uslip(1, j) - uslip(1, i));
        const Scalar dscal = need_scalar ? scal[j] - scal[i] : 0.0;
        const Scalar dp = ps.pressure[j] - ps.pressure[i];

        pp.grad_u[static_cast<std::size_t>(i)] += ps.omega[j] * (du * bg_i.transpose());
        if (need_scalar) pp.grad_scalar.col(i) += (dscal * ps.omega[j]) * bg_i;
        grad_p.col(i) += (dp * ps.omega[j]) * bg_i;
        pp.div_u[i] += ps.omega[j] * dus.dot(bg_i);
        if (j < nd) {
            const Vec2 bg_j = pp.corr.bonet[static_cast<std::size_t>(j)] * g;
            pp.grad_u[static_cast<std::size_t>(j)] += ps.omega[i] * (du * bg_j.transpose());
            if (need_scalar) pp.grad_scalar.col(j) += (dscal * ps.omega[i]) * bg_j;
            grad_p.col(j) += (dp * ps.omega[i]) * bg_j;
            pp.div_u[j] += ps.omega[i] * dus.dot(bg_j);
        }
    }

    // momentum pressure-gradient term
    pp.grad_p_raw = grad_p;
    if (cfg.ops.gradient == GradientForm::AsymBC) {
        pp.grad_p_over_rho.resize(2, ps.n_fluid);
        for (Index i = 0; i < ps.n_fluid; ++i)
            pp.grad_p_over_rho.col(i) = grad_p.col(i) / ps.varrho[i];
    } else {
        if (gradient_needs_liu(cfg.ops.gradient)) {
            compute_liu(ps, pp.nbrs, st.kernel, pp.corr);
            st.diag.liu_singular += pp.corr.liu_singular;
            pp.corr.liu_singular = 0;
            mirror_to_images(ps, pp.corr.liu_inv);
        }
        pp.grad_p_over_rho =
            gradient(ps, pp.nbrs, pp.corr, cfg.ops.gradient, ps.pressure, ps.varrho, st.kernel)
                .leftCols(ps.n_fluid);
    }

    mirror_to_images(ps, pp.grad_u);
    mirror_to_images(ps, pp.grad_scalar);
}

// Outer sweep: coupled-form Laplacians of the velocity and of the diffused
// scalar from the mirrored inner gradients.
void sweep_outer_coupled(SimState& st, const SchemeConfig& cfg) {
    PipelineData& pp = *st.pipe;
    ParticleSet& ps = st.ps;
    const Index nd = pp.n_dest;
    const bool need_scalar = cfg.diffusion_enabled();

    pp.lap_u = Mat2X::Zero(2, nd);
    pp.lap_scalar = ArrayX::Zero(nd);

    const auto& ei = pp.nbrs.edge_i;
    const auto& ej = pp.nbrs.edge_j;
    const Index ne = pp.nbrs.n_edges();
    for (Index e = 0; e < ne; ++e) {
        const Vec2 g(pp.edge_gx[static_cast<std::size_t>(e)],
                     pp.edge_gy[static_cast<std::size_t>(e)]);
        if (g.x() == 0.0 && g.y() == 0.0) continue;
        const Index i = ei[static_cast<std::size_t>(e)];
        const Index j = ej[static_cast<std::size_t>(e)];
        const Mat2 dgu = pp.grad_u[static_cast<std::size_t>(j)] - pp.grad_u[static_cast<std::size_t>(i)];
        const Vec2 dgs = pp.grad_scalar.col(j) - pp.grad_scalar.col(i);
        const Vec2 bg_i = pp.corr.bonet[static_cast<std::size_t>(i)] * g;
        pp.lap_u.col(i) += ps.omega[j] * (dgu * bg_i);
        if (need_scalar) pp.lap_scalar[i] += ps.omega[j] * dgs.dot(bg_i);
        if (j < nd) {
            const Vec2 bg_j = pp.corr.bonet[static_cast<std::size_t>(j)] * g;
            pp.lap_u.col(j) += ps.omega[i] * (dgu * bg_j);
            if (need_scalar) pp.lap_scalar[j] += ps.omega[i] * dgs.dot(bg_j);
        }
    }
}

// Non-fused path for the Fatehi and Korzilius viscous operators.
void outer_special(SimState& st, const SchemeConfig& cfg) {
    PipelineData& pp = *st.pipe;
    ParticleSet& ps = st.ps;
    if (cfg.ops.laplacian == LaplacianForm::FatehiC) {
        compute_fatehi(ps, pp.nbrs, st.kernel, pp.corr);
        st.diag.fatehi_singular += pp.corr.fatehi_singular;
        pp.corr.fatehi_singular = 0;
    } else if (cfg.ops.laplacian == LaplacianForm::Korzilius) {
        compute_korzilius(ps, pp.nbrs, st.kernel, pp.corr);
        st.diag.korzilius_singular += pp.corr.korzilius_singular;
        pp.corr.korzilius_singular = 0;
    }
    const Mat2X vel_view = ps.vel.leftCols(ps.n_total());
    pp.lap_u = laplacian(ps, pp.nbrs, pp.corr, cfg.ops.laplacian, vel_view, st.kernel, &pp.grad_u);
}

} // namespace

void prepare_stage(SimState& st, const SchemeConfig& cfg) {
    if (!st.pipe) st.pipe = std::make_unique<PipelineData>();
    PipelineData& pp = *st.pipe;
    if (pp.fields_fresh) return;
    maintain_lists(st, cfg);
    sweep_geometry(st, cfg);
    refresh_eos_and_ghosts(st, cfg);
    sweep_inner(st, cfg);
    if (cfg.ops.laplacian == LaplacianForm::CoupledBC) {
        sweep_outer_coupled(st, cfg);
    } else {
        // corrected-coupled diffusion term still runs fused
        sweep_outer_coupled(st, cfg);
        outer_special(st, cfg);
    }
    pp.fields_fresh = true;
}

void invalidate_pipeline(SimState& st) {
    if (!st.pipe) return;
    st.pipe->lists_valid = false;
    st.pipe->fields_fresh = false;
    st.pipe->geometry_cached = false;
}

const NeighborTable& pipeline_neighbors(const SimState& st) { return st.pipe->nbrs; }
const CorrectionSet& pipeline_corrections(const SimState& st) { return st.pipe->corr; }

SimState make_sim_state(const SchemeConfig& cfg, const KernelSpec& k, ParticleSet initial) {
    SimState st;
    st.ps = std::move(initial);
    st.kernel = k;
    st.lattice0 = st.ps.pos.leftCols(st.ps.n_fluid);
    const Scalar h_ratio = st.ps.h / st.ps.spacing;
    st.chi0 = chi_uniform(16, 16.0 * st.ps.spacing, h_ratio, k);
    st.pipe = std::make_unique<PipelineData>();
    (void)cfg;
    return st;
}

Scalar compute_dt(const SimState& st, const SchemeConfig& cfg) {
    Scalar umax = cfg.u_ref;
    for (Index i = 0; i < st.ps.n_fluid; ++i) umax = std::max(umax, st.ps.vel.col(i).norm());
    Scalar dt = cfg.cfl * st.ps.h / (umax + cfg.c0);
    if (cfg.nu > 0.0) dt = std::min(dt, 0.125 * st.ps.h * st.ps.h / cfg.nu);
    return dt;
}

namespace {

Scalar diffusion_coefficient(const SimState& st, const SchemeConfig& cfg) {
    return cfg.delta * st.ps.h * cfg.c0;
}

Rates assemble_momentum(SimState& st, const SchemeConfig& cfg) {
    const ParticleSet& ps = st.ps;
    const PipelineData& pp = *st.pipe;
    Rates r;
    r.acc.resize(2, ps.n_fluid);
    r.dscalar.resize(ps.n_fluid);
    for (Index i = 0; i < ps.n_fluid; ++i) {
        Vec2 a = -pp.grad_p_over_rho.col(i) + cfg.nu * pp.lap_u.col(i);
        a.x() += cfg.body_force_x;
        r.acc.col(i) = a;
    }
    return r;
}

} // namespace

Rates rhs_lagrangian(SimState& st, const SchemeConfig& cfg) {
    prepare_stage(st, cfg);
    const ParticleSet& ps = st.ps;
    const PipelineData& pp = *st.pipe;
    Rates r = assemble_momentum(st, cfg);
    const bool diffuse = cfg.diffusion_enabled();
    const Scalar d = diffusion_coefficient(st, cfg);
    for (Index i = 0; i < ps.n_fluid; ++i) {
        Scalar ds = -ps.varrho[i] * pp.div_u[i];
        if (diffuse) ds += d * pp.lap_scalar[i];
        r.dscalar[i] = ds;
    }
    return r;
}

Rates rhs_pressure_evolution(SimState& st, const SchemeConfig& cfg) {
    prepare_stage(st, cfg);
    const ParticleSet& ps = st.ps;
    const PipelineData& pp = *st.pipe;
    Rates r = assemble_momentum(st, cfg);
    const Scalar d = diffusion_coefficient(st, cfg);
    const Scalar c2 = cfg.c0 * cfg.c0;
    for (Index i = 0; i < ps.n_fluid; ++i)
        r.dscalar[i] = -ps.varrho[i] * c2 * pp.div_u[i] + d * pp.lap_scalar[i];
    return r;
}

Rates rhs_transport_velocity(SimState& st, const SchemeConfig& cfg, const Mat2X& delta_u) {
    prepare_stage(st, cfg);
    const ParticleSet& ps = st.ps;
    const PipelineData& pp = *st.pipe;
    Rates r = assemble_momentum(st, cfg);
    const Scalar d = diffusion_coefficient(st, cfg);
    for (Index i = 0; i < ps.n_fluid; ++i) {
        const Vec2 dui = delta_u.col(i);
        r.dscalar[i] = -ps.varrho[i] * pp.div_u[i] + d * pp.lap_scalar[i] +
                       dui.dot(pp.grad_scalar.col(i));
        r.acc.col(i) += pp.grad_u[static_cast<std::size_t>(i)] * dui;
    }
    return r;
}

Rates rhs_eulerian(SimState& st, const SchemeConfig& cfg) {
    prepare_stage(st, cfg);
    const ParticleSet& ps = st.ps;
    const PipelineData& pp = *st.pipe;
    Rates r = assemble_momentum(st, cfg);
    const Scalar d = diffusion_coefficient(st, cfg);
    for (Index i = 0; i < ps.n_fluid; ++i) {
        const Vec2 ui = ps.vel.col(i);
        r.dscalar[i] = -ps.varrho[i] * pp.div_u[i] + d * pp.lap_scalar[i] -
                       ui.dot(pp.grad_scalar.col(i));
        r.acc.col(i) -= pp.grad_u[static_cast<std::size_t>(i)] * ui;
    }
    return r;
}

namespace {

void check_finite(const SimState& st, const SchemeConfig& cfg) {
    const ParticleSet& ps = st.ps;
    const Scalar cap = cfg.blowup_factor * std::max(cfg.u_ref, 1e-12);
    for (Index i = 0; i < ps.n_fluid; ++i) {
        const Scalar sx = ps.vel(0, i), sy = ps.vel(1, i);
        if (!std::isfinite(sx) || !std::isfinite(sy))
            throw DivergenceError(st.step, i, "non-finite velocity at particle " +
                                                  std::to_string(i));
        if (sx * sx + sy * sy > cap * cap)
            throw DivergenceError(st.step, i, "velocity blow-up at particle " + std::to_string(i));
        if (!std::isfinite(ps.varrho[i]) || !std::isfinite(ps.pressure[i]))
            throw DivergenceError(st.step, i, "non-finite thermodynamic state at particle " +
                                                  std::to_string(i));
    }
}

} // namespace

void rk2_step_with(SimState& st, const SchemeConfig& cfg, Scalar dt,
                   const std::function<Rates(SimState&)>& rhs, const Mat2X* delta_u) {
    ParticleSet& ps = st.ps;
    const Index n = ps.n_fluid;
    const Mat2X x0 = ps.pos.leftCols(n);
    const Mat2X u0 = ps.vel.leftCols(n);
    ArrayX& scal = evolved_scalar_array(ps, cfg);
    const ArrayX s0 = scal.head(n);

    try {
        const Rates r1 = rhs(st);
        ps.vel.leftCols(n) = u0 + (0.5 * dt) * r1.acc;
        scal.head(n) = s0 + (0.5 * dt) * r1.dscalar;
        if (cfg.moves_particles()) {
            Mat2X xdot = u0;
            if (delta_u) xdot += *delta_u;
            ps.pos.leftCols(n) = x0 + (0.5 * dt) * xdot;
        }
        st.pipe->fields_fresh = false;

        const Rates r2 = rhs(st);
        const Mat2X u_half = ps.vel.leftCols(n);
        ps.vel.leftCols(n) = u0 + dt * r2.acc;
        scal.head(n) = s0 + dt * r2.dscalar;
        if (cfg.moves_particles()) {
            Mat2X xdot = u_half;
            if (delta_u) xdot += *delta_u;
            ps.pos.leftCols(n) = x0 + dt * xdot;
        }
        st.pipe->fields_fresh = false;
    } catch (const DivergenceError& e) {
        // report the step being computed, matching the post-step check
        throw DivergenceError(st.step + 1, e.particle, e.what());
    }

    st.time += dt;
    ++st.step;
    check_finite(st, cfg);
}

void rk2_step(SimState& st, const SchemeConfig& cfg, Scalar dt) {
    switch (cfg.id) {
    case SchemeId::PeIpstC:
        rk2_step_with(st, cfg, dt, [&cfg](SimState& s) { return rhs_pressure_evolution(s, cfg); });
        break;
    case SchemeId::TvC:
        rk2_step_with(
            st, cfg, dt,
            [&cfg, &st](SimState& s) { return rhs_transport_velocity(s, cfg, st.delta_u); },
            &st.delta_u);
        break;
    case SchemeId::EC:
        rk2_step_with(st, cfg, dt, [&cfg](SimState& s) { return rhs_eulerian(s, cfg); });
        break;
    default:
        rk2_step_with(st, cfg, dt, [&cfg](SimState& s) { return rhs_lagrangian(s, cfg); });
        break;
    }
}

namespace {

void do_shift(SimState& st, const SchemeConfig& cfg) {
    prepare_stage(st, cfg);
    // the pipeline already holds every corrected gradient the transfer needs
    const PipelineData& pp = *st.pipe;
    const Index n = st.ps.n_fluid;
    TaylorGradients tg;
    tg.du.resize(2, n);
    tg.dv.resize(2, n);
    tg.dp.resize(2, n);
    tg.dvarrho.resize(2, n);
    const bool scalar_is_p = cfg.evolved_scalar() == EvolvedScalar::Pressure;
    const Scalar inv_c2 = 1.0 / (cfg.c0 * cfg.c0);
    for (Index i = 0; i < n; ++i) {
        tg.du.col(i) = pp.grad_u[static_cast<std::size_t>(i)].row(0).transpose();
        tg.dv.col(i) = pp.grad_u[static_cast<std::size_t>(i)].row(1).transpose();
        tg.dp.col(i) = pp.grad_p_raw.col(i);
        // for the pressure-evolution scheme the density gradient follows the
        // pressure gradient exactly through the linear equation of state
        if (scalar_is_p) tg.dvarrho.col(i) = inv_c2 * pp.grad_p_raw.col(i);
    }
    if (!scalar_is_p) {
        if (cfg.diffusion_enabled()) {
            tg.dvarrho = pp.grad_scalar.leftCols(n);
        } else {
            // the pipeline skipped the density gradient; one direct pass
            const ArrayX ones = ArrayX::Ones(st.ps.n_total());
            tg.dvarrho = gradient(st.ps, pp.nbrs, pp.corr, GradientForm::AsymBC, st.ps.varrho,
                                  ones, st.kernel)
                             .leftCols(n);
        }
    }
    ShiftResult res;
    if (cfg.shift.mode == ShiftMode::SinglePass) {
        res = single_pass_shift(st.ps, st.kernel, st.chi0);
    } else {
        res = ipst_shift(st.ps, st.kernel, cfg.shift, st.chi0);
    }
    taylor_update(st.ps, tg, res.displacement);
    ++st.diag.ipst_applications;
    st.diag.ipst_iterations += res.iterations;
    st.diag.ipst_monotonicity_violations += res.monotonicity_violations;
    st.diag.shift_clamped += res.clamped;
    invalidate_pipeline(st);
}

} // namespace

void step_scheme(SimState& st, const SchemeConfig& cfg, Scalar dt) {
    if (cfg.id == SchemeId::TvC) {
        prepare_stage(st, cfg);
        Mat2X dx = shift_vector(st.ps, st.pipe->nbrs, st.kernel);
        const Scalar cap = 0.25 * st.ps.spacing;
        for (Index i = 0; i < st.ps.n_fluid; ++i) {
            const Scalar nrm = dx.col(i).norm();
            if (nrm > cap) {
                dx.col(i) *= cap / nrm;
                ++st.diag.shift_clamped;
            }
        }
        st.delta_u = dx / dt;
    }
    rk2_step(st, cfg, dt);

    if (cfg.shift.mode != ShiftMode::Off && cfg.shift.cadence > 0 &&
        st.step % cfg.shift.cadence == 0)
        do_shift(st, cfg);

    if (cfg.id == SchemeId::LRrC && cfg.remesh_every > 0 && st.step % cfg.remesh_every == 0) {
        st.ps = remesh_m4(st.ps, st.lattice0);
        invalidate_pipeline(st);
    }

    if (cfg.wall_channel) {
        prepare_stage(st, cfg);
        smooth_near_wall(st.ps, st.pipe->nbrs, st.kernel);
        st.pipe->fields_fresh = false;
    }
}

} // namespace sphlab
