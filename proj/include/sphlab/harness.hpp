#pragma once

/// Run orchestration: single simulations, convergence ladders, operator
/// studies, cost tables and their CSV/JSON reports.

#include "sphlab/cases.hpp"
#include "sphlab/diagnostics.hpp"
#include "sphlab/packing.hpp"
#include "sphlab/schemes.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sphlab {

enum class Arrangement { Auto, Unperturbed, Packed };
enum class DtMode { PerNx, Shared };

struct RunConfig {
    SchemeId scheme = SchemeId::LIpstC;
    CaseId case_id = CaseId::TaylorGreen;
    Index nx = 50;
    Scalar c0 = 10.0;
    Scalar t_final = -1.0; ///< < 0: case default
    Scalar reynolds = 100.0;
    Scalar cfl = 0.3;
    std::string kernel = "quintic";
    Scalar h_ratio = 1.2;
    std::uint64_t seed = 42;
    Arrangement arrangement = Arrangement::Auto;
    Scalar perturb_scale = 0.2;
    Scalar dt_override = -1.0;
    long max_steps = -1;
    std::string out_dir;
    int dump_every = 0;
    int sample_every = 0;
    std::string order_context = "single-run";
    // overrides (< 0 / Auto: keep the scheme preset)
    std::optional<ShiftMode> pst_mode;
    Scalar pst_eps = -1.0;
    int pst_every = -1;
    int remesh_every = -1;
    std::optional<bool> density_diffusion;
};

struct RunResult {
    Scalar l1_u = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar l1_p = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar l1_u_final = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar total_force_ratio = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar wall_seconds = 0.0;
    Scalar first_step_seconds = 0.0;
    long steps = 0;
    Scalar end_time = 0.0;
    bool failed = false;
    long failed_at_step = -1;
    std::string failure;
    Scalar max_speed_final = 0.0;
    Diagnostics diag;
    DiagnosticsSeries series;
    std::shared_ptr<SimState> final_state; ///< populated when keep_state
};

RunResult run_simulation(const RunConfig& rc, bool keep_state = false);

struct LadderRow {
    Index nx = 0;
    Scalar ds = 0, h = 0;
    Scalar l1_u = 0, l1_p = 0, total_force_ratio = 0, wall_seconds = 0;
    bool failed = false;
    long failed_at_step = -1;
};

struct ConvergenceReport {
    std::vector<LadderRow> rows;
    Scalar order_u = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar order_p = std::numeric_limits<Scalar>::quiet_NaN();
    bool orders_valid = false;
    std::string scheme, case_name, kernel, git_rev;
    Scalar c0 = 0;
    std::uint64_t seed = 0;
};

struct LadderConfig {
    RunConfig base;
    std::vector<Index> nx_list;
    DtMode dt_mode = DtMode::PerNx;
};

ConvergenceReport run_convergence_ladder(const LadderConfig& lc);

enum class StudyKind { Grad, Div, Lap, Func };
StudyKind study_kind_from_name(const std::string& name);

struct StudyConfig {
    StudyKind kind = StudyKind::Grad;
    std::string form = "asym_bc";
    bool packed = true;
    std::vector<Index> nx_list = {50, 100, 200};
    std::string kernel = "quintic";
    Scalar h_ratio = 1.2;
    std::uint64_t seed = 42;
    bool divergence_free_field = false; ///< div study on the vortex field
    std::string out_csv;
};

struct StudyRow {
    Index nx = 0;
    Scalar l1 = 0;
    Scalar total_force_ratio = 0;
    Scalar seconds = 0;
    bool absolute_fallback = false;
};

struct StudyReport {
    std::vector<StudyRow> rows;
    Scalar order = std::numeric_limits<Scalar>::quiet_NaN();
    bool order_valid = false;
};

StudyReport operator_study(const StudyConfig& sc);

struct CostRow {
    std::string scheme;
    Index nx = 0;
    Scalar wall_seconds = 0;
    Scalar l1_u = 0;
};

std::vector<CostRow> cost_report(const std::vector<SchemeId>& schemes,
                                 const std::vector<Index>& nx_list, long n_steps,
                                 const RunConfig& base);

// report writers
void write_particle_csv(const ParticleSet& ps, const std::string& path);
void write_run_json(const RunConfig& rc, const RunResult& rr, const std::string& path);
void write_ladder_csv(const ConvergenceReport& rep, const std::string& path);
void write_ladder_json(const ConvergenceReport& rep, const std::string& path);
void write_study_csv(const StudyReport& rep, const std::string& path);
void write_series_csv(const DiagnosticsSeries& series, const std::string& path);
void write_cost_csv(const std::vector<CostRow>& rows, const std::string& path);

std::string git_revision();

} // namespace sphlab
