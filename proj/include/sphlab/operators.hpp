#pragma once

/// Spatial discretizations: the gradient family, divergence, and the
/// Laplacian family, each with their kernel corrections.

#include "sphlab/corrections.hpp"
#include "sphlab/domain.hpp"
#include "sphlab/neighbors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sphlab {

enum class GradientForm { Asym, AsymBC, Sym1, Sym1BC, Sym1LC, Sym2, Sym2BC, Sym2LC, SymSL, Tvf };
enum class DivergenceForm { Div, DivBC };
enum class LaplacianForm {
    Cleary,
    ClearyBC,
    ClearyLC,
    Tvf,
    TvfBC,
    TvfLC,
    Coupled,
    CoupledBC,
    Fatehi,
    FatehiC,
    Korzilius
};

GradientForm gradient_form_from_name(const std::string& name);
DivergenceForm divergence_form_from_name(const std::string& name);
LaplacianForm laplacian_form_from_name(const std::string& name);

struct OperatorChoice {
    GradientForm gradient = GradientForm::AsymBC;
    DivergenceForm divergence = DivergenceForm::DivBC;
    LaplacianForm laplacian = LaplacianForm::CoupledBC;
};

/// Second-order-convergent combinations only: {asym_bc, sym1_lc} gradients,
/// corrected divergence, {coupled_bc, fatehi_c, korzilius} Laplacians.
OperatorChoice soc_choice(GradientForm grad, LaplacianForm lap);

bool gradient_needs_bonet(GradientForm f);
bool gradient_needs_liu(GradientForm f);
bool laplacian_needs_bonet(LaplacianForm f);
bool laplacian_needs_liu(LaplacianForm f);
bool laplacian_needs_inner_gradient(LaplacianForm f);

/// Pressure-gradient-over-density approximation (one of the tabulated
/// forms). `varrho` is the density entering the asymmetric form; symmetric
/// forms use the summation density stored on the particle set.
Mat2X gradient(const ParticleSet& ps, const NeighborTable& nbrs, const CorrectionSet& corr,
               GradientForm form, const ArrayX& p, const ArrayX& varrho, const KernelSpec& k);

ArrayX divergence(const ParticleSet& ps, const NeighborTable& nbrs, const CorrectionSet& corr,
                  DivergenceForm form, const Mat2X& u, const KernelSpec& k);

/// Velocity gradient tensors via the corrected asymmetric form, mirrored to
/// periodic images. Entry (a, b) of the result is d u_a / d x_b.
std::vector<Mat2> velocity_gradient_asym_bc(const ParticleSet& ps, const NeighborTable& nbrs,
                                            const CorrectionSet& corr, const Mat2X& u,
                                            const KernelSpec& k);

/// Laplacian of a vector field, componentwise. The two-pass forms take the
/// inner velocity gradient (computed with the corrected asymmetric form);
/// it is computed on the fly when absent.
Mat2X laplacian(const ParticleSet& ps, const NeighborTable& nbrs, const CorrectionSet& corr,
                LaplacianForm form, const Mat2X& u, const KernelSpec& k,
                const std::vector<Mat2>* inner_grad = nullptr);

/// |sum_i F_i| / max_i |F_i| over the first n columns.
Scalar total_force_ratio(const Mat2X& force, Index n);

} // namespace sphlab
