#include "sphlab/cases.hpp"

#include <cmath>

namespace sphlab {

CaseId case_from_name(const std::string& name) {
    if (name == "taylor-green") return CaseId::TaylorGreen;
    if (name == "gresho") return CaseId::Gresho;
    if (name == "shear-layer") return CaseId::ShearLayer;
    if (name == "poiseuille") return CaseId::Poiseuille;
    throw SphError("unknown case '" + name + "'");
}

std::string case_name(CaseId id) {
    switch (id) {
    case CaseId::TaylorGreen: return "taylor-green";
    case CaseId::Gresho: return "gresho";
    case CaseId::ShearLayer: return "shear-layer";
    case CaseId::Poiseuille: return "poiseuille";
    }
    return "?";
}

CaseSpec make_case(CaseId id, Scalar reynolds) {
    CaseSpec cs;
    cs.id = id;
    switch (id) {
    case CaseId::TaylorGreen:
        cs.reynolds = reynolds;
        cs.nu = cs.u_ref * cs.length / reynolds;
        cs.t_final = 0.5;
        break;
    case CaseId::Gresho:
        cs.reynolds = 0.0;
        cs.nu = 0.0;
        cs.t_final = 3.0;
        cs.density_diffusion = true; // damps the pressure oscillations
        break;
    case CaseId::ShearLayer:
        cs.nu = 1e-4;
        cs.reynolds = cs.u_ref * cs.length / cs.nu;
        cs.t_final = 1.0;
        cs.has_exact = false;
        cs.density_diffusion = true;
        break;
    case CaseId::Poiseuille:
        cs.nu = 0.1;
        cs.reynolds = 10.0;
        cs.body_force_x = 0.8;
        cs.t_final = 10.0;
        break;
    }
    return cs;
}

void exact_taylor_green(const Vec2& x, Scalar t, Scalar reynolds, Scalar u_ref, Scalar& u,
                        Scalar& v, Scalar& p) {
    const Scalar b = -8.0 * pi_v * pi_v / reynolds;
    const Scalar decay = std::exp(b * t);
    u = -u_ref * decay * std::cos(2.0 * pi_v * x.x()) * std::sin(2.0 * pi_v * x.y());
    v = u_ref * decay * std::sin(2.0 * pi_v * x.x()) * std::cos(2.0 * pi_v * x.y());
    p = -0.25 * u_ref * u_ref * decay * decay *
        (std::cos(4.0 * pi_v * x.x()) + std::cos(4.0 * pi_v * x.y()));
}

void exact_gresho(const Vec2& x, Scalar& u, Scalar& v, Scalar& p) {
    const Scalar r = x.norm();
    Scalar uphi;
    if (r < 0.2) {
        p = 12.5 * r * r + 5.0;
        uphi = 5.0 * r;
    } else if (r < 0.4) {
        p = 12.5 * r * r - 20.0 * r + 4.0 * std::log(5.0 * r) + 9.0;
        uphi = 2.0 - 5.0 * r;
    } else {
        p = 3.0 + 4.0 * std::log(2.0);
        uphi = 0.0;
    }
    if (r < 1e-14) {
        u = v = 0.0;
        return;
    }
    // azimuthal direction (-sin, cos)
    u = uphi * (-x.y() / r);
    v = uphi * (x.x() / r);
}

Scalar exact_poiseuille_u(Scalar y, Scalar force, Scalar nu, Scalar length) {
    return 0.5 * (force / nu) * y * (length - y);
}

void init_taylor_green(ParticleSet& ps, const CaseSpec& cs, const Eos& eos) {
    for (Index i = 0; i < ps.n_local; ++i) {
        Scalar u, v, p;
        exact_taylor_green(ps.pos.col(i), 0.0, cs.reynolds, cs.u_ref, u, v, p);
        ps.vel(0, i) = u;
        ps.vel(1, i) = v;
        ps.pressure[i] = p;
        ps.varrho[i] = eos.density(p);
    }
    ps.vel_slip = ps.vel;
    sync_ghost_fields(ps);
}

void init_gresho(ParticleSet& ps, const Eos& eos) {
    for (Index i = 0; i < ps.n_local; ++i) {
        Scalar u, v, p;
        exact_gresho(ps.pos.col(i), u, v, p);
        ps.vel(0, i) = u;
        ps.vel(1, i) = v;
        ps.pressure[i] = p;
        ps.varrho[i] = eos.density(p);
    }
    ps.vel_slip = ps.vel;
    sync_ghost_fields(ps);
}

void init_shear_layer(ParticleSet& ps) {
    const Scalar steepness = 30.0; // slope parameter of the tanh profile
    const Scalar amp = 0.05;
    for (Index i = 0; i < ps.n_local; ++i) {
        const Scalar x = ps.pos(0, i), y = ps.pos(1, i);
        ps.vel(0, i) = (y <= 0.5) ? std::tanh(steepness * (y - 0.25))
                                  : std::tanh(steepness * (0.75 - y));
        ps.vel(1, i) = amp * std::sin(2.0 * pi_v * x);
        ps.pressure[i] = 0.0;
        ps.varrho[i] = ps.ref_density;
    }
    ps.vel_slip = ps.vel;
    sync_ghost_fields(ps);
}

void init_poiseuille(ParticleSet& ps) {
    // start from rest; the body force does the driving
    ps.vel.setZero();
    ps.vel_slip.setZero();
    ps.pressure.setZero();
    ps.varrho.setConstant(ps.ref_density);
    sync_ghost_fields(ps);
}

} // namespace sphlab
