#pragma once

/// Scheme definitions, right-hand-side assembly, RK2 time integration and
/// the per-step regularization dispatch.

#include "sphlab/domain.hpp"
#include "sphlab/eos.hpp"
#include "sphlab/kernels.hpp"
#include "sphlab/operators.hpp"
#include "sphlab/shifting.hpp"

#include <functional>
#include <memory>
#include <string>

namespace sphlab {

enum class SchemeId { LIpstC, LIpstF, LIpstK, LPstC, PeIpstC, LRrC, TvC, EC };

SchemeId scheme_from_name(const std::string& name);
std::string scheme_name(SchemeId id);

/// Which scalar the continuity-like equation evolves.
enum class EvolvedScalar { FluidDensity, Pressure };

struct SchemeConfig {
    SchemeId id = SchemeId::LIpstC;
    OperatorChoice ops{};
    EosKind eos_kind = EosKind::Tait;
    Scalar c0 = 10.0;
    Scalar delta = 0.1; ///< density/pressure diffusion coefficient scale
    bool density_diffusion = false; ///< L-family toggle; PE/TV/E always diffuse
    Scalar nu = 0.01;
    Scalar cfl = 0.3;
    Scalar u_ref = 1.0; ///< timestep floor for decaying flows
    ShiftConfig shift{};
    int remesh_every = 1;
    Scalar body_force_x = 0.0;
    bool wall_channel = false;
    Scalar wall_velocity_x = 0.0;
    Scalar blowup_factor = 100.0; ///< |u| > factor * u_ref counts as divergence

    EvolvedScalar evolved_scalar() const {
        return id == SchemeId::PeIpstC ? EvolvedScalar::Pressure : EvolvedScalar::FluidDensity;
    }
    bool diffusion_enabled() const {
        if (id == SchemeId::PeIpstC || id == SchemeId::TvC || id == SchemeId::EC) return true;
        return density_diffusion;
    }
    bool moves_particles() const { return id != SchemeId::EC; }
    Eos eos(Scalar rho0) const {
        return eos_kind == EosKind::Tait ? make_tait(rho0, c0) : make_linear(rho0, c0);
    }
};

/// Scheme presets: ids fix the viscous operator family, the regularization
/// mode and the equation of state.
SchemeConfig make_scheme(SchemeId id, Scalar c0, Scalar nu);

struct Diagnostics {
    long ipst_applications = 0;
    long ipst_iterations = 0;
    long ipst_monotonicity_violations = 0;
    long shift_clamped = 0;
    long bonet_singular = 0;
    long liu_singular = 0;
    long fatehi_singular = 0;
    long korzilius_singular = 0;
    long wall_unsupported = 0;
};

struct Rates {
    Mat2X acc;      ///< du/dt per fluid particle
    ArrayX dscalar; ///< d(varrho)/dt, or dp/dt for the pressure-evolution scheme
};

struct PipelineData;

struct SimState {
    ParticleSet ps;
    KernelSpec kernel;
    Scalar time = 0.0;
    long step = 0;
    Scalar chi0 = 0.0;   ///< uniform-lattice kernel-sum reference
    Mat2X lattice0;      ///< remeshing target
    Mat2X delta_u;       ///< transport-velocity shift, held over a step
    Diagnostics diag;
    std::unique_ptr<PipelineData> pipe;

    SimState();
    SimState(SimState&&) noexcept;
    SimState& operator=(SimState&&) noexcept;
    ~SimState();
};

SimState make_sim_state(const SchemeConfig& cfg, const KernelSpec& k, ParticleSet initial);

/// Timestep rule: cfl * h / (max(U_max, u_ref) + c0), additionally bounded
/// by the viscous limit 0.125 h^2 / nu when nu > 0.
Scalar compute_dt(const SimState& st, const SchemeConfig& cfg);

/// Refreshes neighbor lists, volumes, corrections, inner gradients and the
/// outer sums for the current particle state. Idempotent per stage.
void prepare_stage(SimState& st, const SchemeConfig& cfg);

Rates rhs_lagrangian(SimState& st, const SchemeConfig& cfg);
Rates rhs_pressure_evolution(SimState& st, const SchemeConfig& cfg);
Rates rhs_transport_velocity(SimState& st, const SchemeConfig& cfg, const Mat2X& delta_u);
Rates rhs_eulerian(SimState& st, const SchemeConfig& cfg);

/// Midpoint RK2 over an arbitrary rate function (the schemes pass their
/// assemblers; tests may inject degenerate fields).
void rk2_step_with(SimState& st, const SchemeConfig& cfg, Scalar dt,
                   const std::function<Rates(SimState&)>& rhs, const Mat2X* delta_u = nullptr);

/// One RK2 step with the scheme's own right-hand side.
void rk2_step(SimState& st, const SchemeConfig& cfg, Scalar dt);

/// One full step: RK2 plus the scheme's regularization cadence (shifting,
/// remeshing, transport velocity, near-wall smoothing).
void step_scheme(SimState& st, const SchemeConfig& cfg, Scalar dt);

/// Invalidate cached neighbor lists and stage data after external mutation.
void invalidate_pipeline(SimState& st);

/// Read-only view of the pipeline's neighbor table / corrections for
/// diagnostics (valid after prepare_stage).
const NeighborTable& pipeline_neighbors(const SimState& st);
const CorrectionSet& pipeline_corrections(const SimState& st);

} // namespace sphlab
