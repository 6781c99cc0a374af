#include "sphlab/operators.hpp"

#include <cmath>
#include <map>

namespace sphlab {

GradientForm gradient_form_from_name(const std::string& name) {
    static const std::map<std::string, GradientForm> m = {
        {"asym", GradientForm::Asym},       {"asym_bc", GradientForm::AsymBC},
        {"sym1", GradientForm::Sym1},       {"sym1_bc", GradientForm::Sym1BC},
        {"sym1_lc", GradientForm::Sym1LC},  {"sym2", GradientForm::Sym2},
        {"sym2_bc", GradientForm::Sym2BC},  {"sym2_lc", GradientForm::Sym2LC},
        {"sym_sl", GradientForm::SymSL},    {"tvf", GradientForm::Tvf}};
    auto it = m.find(name);
    if (it == m.end()) throw SphError("unknown gradient form '" + name + "'");
    return it->second;
}

DivergenceForm divergence_form_from_name(const std::string& name) {
    if (name == "div") return DivergenceForm::Div;
    if (name == "div_bc") return DivergenceForm::DivBC;
    throw SphError("unknown divergence form '" + name + "'");
}

LaplacianForm laplacian_form_from_name(const std::string& name) {
    static const std::map<std::string, LaplacianForm> m = {
        {"cleary", LaplacianForm::Cleary},     {"cleary_bc", LaplacianForm::ClearyBC},
        {"cleary_lc", LaplacianForm::ClearyLC},{"tvf", LaplacianForm::Tvf},
        {"tvf_bc", LaplacianForm::TvfBC},      {"tvf_lc", LaplacianForm::TvfLC},
        {"coupled", LaplacianForm::Coupled},   {"coupled_bc", LaplacianForm::CoupledBC},
        {"fatehi", LaplacianForm::Fatehi},     {"fatehi_c", LaplacianForm::FatehiC},
        {"korzilius", LaplacianForm::Korzilius}};
    auto it = m.find(name);
    if (it == m.end()) throw SphError("unknown laplacian form '" + name + "'");
    return it->second;
}

OperatorChoice soc_choice(GradientForm grad, LaplacianForm lap) {
    const bool grad_ok = grad == GradientForm::AsymBC || grad == GradientForm::Sym1LC;
    const bool lap_ok = lap == LaplacianForm::CoupledBC || lap == LaplacianForm::FatehiC ||
                        lap == LaplacianForm::Korzilius;
    if (!grad_ok || !lap_ok) throw SphError("soc_choice: not a second-order combination");
    return {grad, DivergenceForm::DivBC, lap};
}

bool gradient_needs_bonet(GradientForm f) {
    return f == GradientForm::AsymBC || f == GradientForm::Sym1BC || f == GradientForm::Sym2BC;
}
bool gradient_needs_liu(GradientForm f) {
    return f == GradientForm::Sym1LC || f == GradientForm::Sym2LC || f == GradientForm::SymSL;
}
bool laplacian_needs_bonet(LaplacianForm f) {
    return f == LaplacianForm::ClearyBC || f == LaplacianForm::TvfBC ||
           f == LaplacianForm::CoupledBC || f == LaplacianForm::Fatehi ||
           f == LaplacianForm::FatehiC || f == LaplacianForm::Korzilius ||
           f == LaplacianForm::Coupled; // inner pass
}
bool laplacian_needs_liu(LaplacianForm f) {
    return f == LaplacianForm::ClearyLC || f == LaplacianForm::TvfLC;
}
bool laplacian_needs_inner_gradient(LaplacianForm f) {
    return f == LaplacianForm::Coupled || f == LaplacianForm::CoupledBC ||
           f == LaplacianForm::Fatehi || f == LaplacianForm::FatehiC ||
           f == LaplacianForm::Korzilius;
}

namespace {

inline Scalar pair_guard(const ParticleSet& ps) { return 1e-12 * ps.h; }

} // namespace

Mat2X gradient(const ParticleSet& ps, const NeighborTable& nbrs, const CorrectionSet& corr,
               GradientForm form, const ArrayX& p, const ArrayX& varrho, const KernelSpec& k) {
    Mat2X out = Mat2X::Zero(2, nbrs.n_dest);
    const Scalar guard = pair_guard(ps);
    const ArrayX& rho = ps.rho_sum;

    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        Vec2 acc = Vec2::Zero();
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            if (r < guard) continue;
            Scalar w, gmag;
            kernel_value_gradient(k, r, ps.h, w, gmag);
            if (w == 0.0 && gmag == 0.0) continue;
            const Vec2 gw = gmag * x_ij;
            switch (form) {
            case GradientForm::Asym:
                acc += (p[j] - p[i]) * ps.omega[j] * gw;
                break;
            case GradientForm::AsymBC:
                acc += (p[j] - p[i]) * ps.omega[j] *
                       (corr.bonet[static_cast<std::size_t>(i)] * gw);
                break;
            case GradientForm::Sym1:
                acc += ps.mass[j] * (p[j] + p[i]) / (rho[i] * rho[j]) * gw;
                break;
            case GradientForm::Sym1BC:
                acc += ps.mass[j] * (p[j] + p[i]) / (rho[i] * rho[j]) *
                       (corr.bonet[static_cast<std::size_t>(i)] * gw);
                break;
            case GradientForm::Sym1LC: {
                Scalar wt;
                Vec2 gt;
                liu_pair(corr, k, i, x_ij, ps.h, wt, gt);
                acc += ps.mass[j] * (p[j] + p[i]) / (rho[i] * rho[j]) * gt;
                break;
            }
            case GradientForm::Sym2:
                acc += ps.mass[j] * (p[j] / (rho[j] * rho[j]) + p[i] / (rho[i] * rho[i])) * gw;
                break;
            case GradientForm::Sym2BC:
                acc += ps.mass[j] * (p[j] / (rho[j] * rho[j]) + p[i] / (rho[i] * rho[i])) *
                       (corr.bonet[static_cast<std::size_t>(i)] * gw);
                break;
            case GradientForm::Sym2LC: {
                Scalar wt;
                Vec2 gt;
                liu_pair(corr, k, i, x_ij, ps.h, wt, gt);
                acc += ps.mass[j] * (p[j] / (rho[j] * rho[j]) + p[i] / (rho[i] * rho[i])) * gt;
                break;
            }
            case GradientForm::SymSL: {
                Scalar wti, wtj;
                Vec2 gti, gtj;
                liu_pair(corr, k, i, x_ij, ps.h, wti, gti);
                liu_pair(corr, k, j, Vec2(-x_ij), ps.h, wtj, gtj);
                acc += ps.mass[j] * (p[j] + p[i]) / (2.0 * rho[i] * rho[j]) * (gti - gtj);
                break;
            }
            case GradientForm::Tvf: {
                const Scalar ptil = (p[i] * rho[i] + p[j] * rho[j]) / (rho[i] + rho[j]);
                acc += (ps.omega[i] * ps.omega[i] + ps.omega[j] * ps.omega[j]) / ps.mass[i] *
                       ptil * gw;
                break;
            }
            }
        }
        // Liu-corrected forms carry a nonzero self weight
        if (form == GradientForm::Sym1LC || form == GradientForm::Sym2LC) {
            Scalar wt;
            Vec2 gt;
            liu_pair(corr, k, i, Vec2::Zero(), ps.h, wt, gt);
            if (form == GradientForm::Sym1LC)
                acc += ps.mass[i] * (2.0 * p[i]) / (rho[i] * rho[i]) * gt;
            else
                acc += ps.mass[i] * (2.0 * p[i] / (rho[i] * rho[i])) * gt;
        }
        if (form == GradientForm::Asym || form == GradientForm::AsymBC) acc /= varrho[i];
        out.col(i) = acc;
    }
    return out;
}

ArrayX divergence(const ParticleSet& ps, const NeighborTable& nbrs, const CorrectionSet& corr,
                  DivergenceForm form, const Mat2X& u, const KernelSpec& k) {
    ArrayX out = ArrayX::Zero(nbrs.n_dest);
    const Scalar guard = pair_guard(ps);
    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        const Vec2 ui = u.col(i);
        Scalar acc = 0.0;
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            if (r < guard) continue;
            Scalar w, gmag;
            kernel_value_gradient(k, r, ps.h, w, gmag);
            if (gmag == 0.0) continue;
            Vec2 gw = gmag * x_ij;
            if (form == DivergenceForm::DivBC) gw = corr.bonet[static_cast<std::size_t>(i)] * gw;
            acc += (u.col(j) - ui).dot(gw) * ps.omega[j];
        }
        out[i] = acc;
    }
    return out;
}

std::vector<Mat2> velocity_gradient_asym_bc(const ParticleSet& ps, const NeighborTable& nbrs,
                                            const CorrectionSet& corr, const Mat2X& u,
                                            const KernelSpec& k) {
    std::vector<Mat2> grad(static_cast<std::size_t>(nbrs.n_dest), Mat2::Zero());
    const Scalar guard = pair_guard(ps);
    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        const Vec2 ui = u.col(i);
        Mat2 acc = Mat2::Zero();
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            if (r < guard) continue;
            Scalar w, gmag;
            kernel_value_gradient(k, r, ps.h, w, gmag);
            if (gmag == 0.0) continue;
            const Vec2 gw = corr.bonet[static_cast<std::size_t>(i)] * (gmag * x_ij);
            acc += ps.omega[j] * ((u.col(j) - ui) * gw.transpose());
        }
        grad[static_cast<std::size_t>(i)] = acc;
    }
    mirror_to_images(ps, grad);
    return grad;
}

Mat2X laplacian(const ParticleSet& ps, const NeighborTable& nbrs, const CorrectionSet& corr,
                LaplacianForm form, const Mat2X& u, const KernelSpec& k,
                const std::vector<Mat2>* inner_grad) {
    std::vector<Mat2> computed;
    if (laplacian_needs_inner_gradient(form) && inner_grad == nullptr) {
        computed = velocity_gradient_asym_bc(ps, nbrs, corr, u, k);
        inner_grad = &computed;
    }

    Mat2X out = Mat2X::Zero(2, nbrs.n_dest);
    const Scalar guard = pair_guard(ps);
    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        const Vec2 ui = u.col(i);
        Vec2 acc = Vec2::Zero();
        Vec3 kor_rhs = Vec3::Zero();
        Vec3 kor_rhs_y = Vec3::Zero();
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            if (r < guard) continue;
            Scalar w, gmag;
            kernel_value_gradient(k, r, ps.h, w, gmag);
            const Vec2 gw = gmag * x_ij;
            const Vec2 du = ui - u.col(j);
            switch (form) {
            case LaplacianForm::Cleary:
                if (gmag != 0.0) acc += 2.0 * ps.omega[j] * gw.dot(x_ij) / (r * r) * du;
                break;
            case LaplacianForm::ClearyBC:
                if (gmag != 0.0)
                    acc += 2.0 * ps.omega[j] *
                           (corr.bonet[static_cast<std::size_t>(i)] * gw).dot(x_ij) / (r * r) * du;
                break;
            case LaplacianForm::ClearyLC: {
                Scalar wt;
                Vec2 gt;
                liu_pair(corr, k, i, x_ij, ps.h, wt, gt);
                acc += 2.0 * ps.omega[j] * gt.dot(x_ij) / (r * r) * du;
                break;
            }
            case LaplacianForm::Tvf:
                if (gmag != 0.0)
                    acc += (ps.omega[i] * ps.omega[i] + ps.omega[j] * ps.omega[j]) / ps.mass[i] *
                           gw.dot(x_ij) / (r * r) * du;
                break;
            case LaplacianForm::TvfBC:
                if (gmag != 0.0)
                    acc += (ps.omega[i] * ps.omega[i] + ps.omega[j] * ps.omega[j]) / ps.mass[i] *
                           (corr.bonet[static_cast<std::size_t>(i)] * gw).dot(x_ij) / (r * r) * du;
                break;
            case LaplacianForm::TvfLC: {
                Scalar wt;
                Vec2 gt;
                liu_pair(corr, k, i, x_ij, ps.h, wt, gt);
                acc += (ps.omega[i] * ps.omega[i] + ps.omega[j] * ps.omega[j]) / ps.mass[i] *
                       gt.dot(x_ij) / (r * r) * du;
                break;
            }
            case LaplacianForm::Coupled:
                if (gmag != 0.0)
                    acc += ps.omega[j] *
                           (((*inner_grad)[static_cast<std::size_t>(j)] -
                             (*inner_grad)[static_cast<std::size_t>(i)]) *
                            gw);
                break;
            case LaplacianForm::CoupledBC:
                if (gmag != 0.0)
                    acc += ps.omega[j] *
                           (((*inner_grad)[static_cast<std::size_t>(j)] -
                             (*inner_grad)[static_cast<std::size_t>(i)]) *
                            (corr.bonet[static_cast<std::size_t>(i)] * gw));
                break;
            case LaplacianForm::Fatehi:
                if (gmag != 0.0) {
                    const Vec2 bracket = du - (*inner_grad)[static_cast<std::size_t>(i)] * x_ij;
                    acc += 2.0 * ps.omega[j] * gw.dot(x_ij) / (r * r) * bracket;
                }
                break;
            case LaplacianForm::FatehiC:
                if (gmag != 0.0) {
                    const Vec2 bracket = du - (*inner_grad)[static_cast<std::size_t>(i)] * x_ij;
                    const Vec2 gwc = corr.fatehi_bhat[static_cast<std::size_t>(i)] * gw;
                    acc += 2.0 * ps.omega[j] * gwc.dot(x_ij) / (r * r) * bracket;
                }
                break;
            case LaplacianForm::Korzilius: {
                const Vec3 d2w = kernel_second_derivatives(k, x_ij, ps.h);
                if (d2w.isZero()) break;
                const Vec2 x_ji = -x_ij;
                const Mat2& gi = (*inner_grad)[static_cast<std::size_t>(i)];
                const Vec2 uj = u.col(j);
                kor_rhs += ps.omega[j] * ((uj.x() - ui.x()) - x_ji.dot(gi.row(0))) * d2w;
                kor_rhs_y += ps.omega[j] * ((uj.y() - ui.y()) - x_ji.dot(gi.row(1))) * d2w;
                break;
            }
            }
        }
        if (form == LaplacianForm::Korzilius) {
            const Mat3& ginv = corr.korzilius_gamma_inv[static_cast<std::size_t>(i)];
            const Vec3 dx = ginv * kor_rhs;
            const Vec3 dy = ginv * kor_rhs_y;
            acc = Vec2(dx[0] + dx[2], dy[0] + dy[2]);
        }
        out.col(i) = acc;
    }
    return out;
}

Scalar total_force_ratio(const Mat2X& force, Index n) {
    Vec2 total = Vec2::Zero();
    Scalar fmax = 0.0;
    for (Index i = 0; i < n; ++i) {
        total += force.col(i);
        fmax = std::max(fmax, force.col(i).norm());
    }
    if (fmax == 0.0) return 0.0;
    return total.norm() / fmax;
}

} // namespace sphlab
