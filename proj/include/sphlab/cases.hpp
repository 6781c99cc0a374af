#pragma once

/// Benchmark initializers and their reference solutions.

#include "sphlab/domain.hpp"
#include "sphlab/eos.hpp"

#include <optional>
#include <string>

namespace sphlab {

enum class CaseId { TaylorGreen, Gresho, ShearLayer, Poiseuille };

CaseId case_from_name(const std::string& name);
std::string case_name(CaseId id);

struct CaseSpec {
    CaseId id = CaseId::TaylorGreen;
    Scalar length = 1.0;   ///< domain edge (channel height for Poiseuille)
    Scalar reynolds = 100.0;
    Scalar nu = 0.01;
    Scalar u_ref = 1.0;
    Scalar t_final = 0.5;
    Scalar rho0 = 1.0;
    Scalar body_force_x = 0.0; ///< Poiseuille driving acceleration
    bool has_exact = true;
    bool density_diffusion = false; ///< used by schemes that make it optional
};

CaseSpec make_case(CaseId id, Scalar reynolds = 100.0);

/// Closed-form fields. For Gresho and Poiseuille these are the steady
/// solutions; the shear layer has none (has_exact is false there).
void exact_taylor_green(const Vec2& x, Scalar t, Scalar reynolds, Scalar u_ref, Scalar& u,
                        Scalar& v, Scalar& p);
void exact_gresho(const Vec2& x, Scalar& u, Scalar& v, Scalar& p);
Scalar exact_poiseuille_u(Scalar y, Scalar force, Scalar nu, Scalar length);

/// Field initializers; positions must already be set. Density is obtained by
/// inverting the EOS at the initial pressure.
void init_taylor_green(ParticleSet& ps, const CaseSpec& cs, const Eos& eos);
void init_gresho(ParticleSet& ps, const Eos& eos);
void init_shear_layer(ParticleSet& ps);
void init_poiseuille(ParticleSet& ps);

} // namespace sphlab
