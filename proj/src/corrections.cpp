#include "sphlab/corrections.hpp"

#include <cmath>

namespace sphlab {

namespace {

// Condition number of a 2x2 matrix from its singular values.
Scalar cond2(const Mat2& m) {
    const Scalar a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
    const Scalar s1 = a * a + b * b + c * c + d * d;
    const Scalar det = a * d - b * c;
    const Scalar s2 = std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det));
    const Scalar smax2 = 0.5 * (s1 + s2), smin2 = 0.5 * (s1 - s2);
    if (smin2 <= 0.0) return std::numeric_limits<Scalar>::infinity();
    return std::sqrt(smax2 / smin2);
}

bool invert2_guarded(const Mat2& m, Scalar threshold, Mat2& out) {
    if (!(cond2(m) < threshold)) {
        out = Mat2::Identity();
        return false;
    }
    out = m.inverse();
    return true;
}

bool invert3_guarded(const Mat3& m, Scalar threshold, Mat3& out) {
    Eigen::PartialPivLU<Mat3> lu(m);
    const Scalar rc = lu.rcond();
    if (!(rc > 1.0 / threshold)) {
        out = Mat3::Identity();
        return false;
    }
    out = lu.inverse();
    return true;
}

} // namespace

void compute_bonet(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                   CorrectionSet& corr) {
    corr.bonet.assign(static_cast<std::size_t>(nbrs.n_dest), Mat2::Identity());
    const Scalar guard = 1e-12 * ps.h;
    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        Mat2 moment = Mat2::Zero();
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            if (r < guard) continue;
            Scalar w, gmag;
            kernel_value_gradient(k, r, ps.h, w, gmag);
            // grad W_ij (x) (x_j - x_i) = -gmag * x_ij (x) x_ij
            moment -= gmag * ps.omega[j] * (x_ij * x_ij.transpose());
        }
        if (!invert2_guarded(moment, corr.condition_threshold, corr.bonet[static_cast<std::size_t>(i)]))
            ++corr.bonet_singular;
    }
}

void compute_liu(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                 CorrectionSet& corr) {
    corr.liu_inv.assign(static_cast<std::size_t>(nbrs.n_dest), Mat3::Identity());
    const Scalar w0 = kernel_value(k, 0.0, ps.h);
    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        Mat3 a = Mat3::Zero();
        a(0, 0) = w0 * ps.omega[i]; // self term
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            Scalar w, gmag;
            kernel_value_gradient(k, r, ps.h, w, gmag);
            if (w == 0.0 && gmag == 0.0) continue;
            const Vec3 wv(w, gmag * x_ij.x(), gmag * x_ij.y());
            const Vec3 row(1.0, -x_ij.x(), -x_ij.y()); // x_j - x_i
            a += ps.omega[j] * (wv * row.transpose());
        }
        if (!invert3_guarded(a, corr.condition_threshold, corr.liu_inv[static_cast<std::size_t>(i)]))
            ++corr.liu_singular;
    }
}

void compute_fatehi(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                    CorrectionSet& corr) {
    if (corr.bonet.size() < static_cast<std::size_t>(nbrs.n_dest))
        throw SphError("compute_fatehi: Bonet matrices required");
    corr.fatehi_bhat.assign(static_cast<std::size_t>(nbrs.n_dest), Mat2::Identity());
    const Scalar guard = 1e-12 * ps.h;
    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        const Mat2& bi = corr.bonet[static_cast<std::size_t>(i)];
        Mat2 t1 = Mat2::Zero();
        Vec2 v = Vec2::Zero();
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            if (r < guard) continue;
            Scalar w, gmag;
            kernel_value_gradient(k, r, ps.h, w, gmag);
            if (gmag == 0.0) continue;
            const Vec2 gw = gmag * x_ij;
            t1 += ps.omega[j] * (x_ij * gw.transpose());
            v += ps.omega[j] * r * r * (bi * gw);
        }
        Mat2 t2 = Mat2::Zero();
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            if (r < guard) continue;
            Scalar w, gmag;
            kernel_value_gradient(k, r, ps.h, w, gmag);
            if (gmag == 0.0) continue;
            const Vec2 e = x_ij / r;
            t2 += (ps.omega[j] * v.dot(e)) * (e * (gmag * x_ij).transpose());
        }
        Mat2 inv;
        if (!invert2_guarded(t1 + t2, corr.condition_threshold, inv)) {
            ++corr.fatehi_singular;
            corr.fatehi_bhat[static_cast<std::size_t>(i)] = Mat2::Identity();
        } else {
            corr.fatehi_bhat[static_cast<std::size_t>(i)] = -inv;
        }
    }
}

void compute_korzilius(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
                       CorrectionSet& corr) {
    if (corr.bonet.size() < static_cast<std::size_t>(nbrs.n_dest))
        throw SphError("compute_korzilius: Bonet matrices required");
    corr.korzilius_gamma_inv.assign(static_cast<std::size_t>(nbrs.n_dest), Mat3::Identity());
    const Scalar guard = 1e-12 * ps.h;
    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        const Mat2& bi = corr.bonet[static_cast<std::size_t>(i)];
        Mat3 s1 = Mat3::Zero();                  // 1/2 sum d2W zeta^T omega
        Eigen::Matrix<Scalar, 3, 2> s2 = Eigen::Matrix<Scalar, 3, 2>::Zero(); // sum d2W x_ji^T omega
        Eigen::Matrix<Scalar, 2, 3> s3 = Eigen::Matrix<Scalar, 2, 3>::Zero(); // 1/2 sum gradW zeta^T omega
        for (Index sl = nbrs.begin(i); sl < nbrs.end(i); ++sl) {
            const Index j = nbrs.neighbor(sl);
            const Vec2 x_ij = pi - ps.pos.col(j);
            const Scalar r = x_ij.norm();
            if (r < guard || r >= nbrs.cutoff) continue;
            const Vec3 d2w = kernel_second_derivatives(k, x_ij, ps.h);
            Scalar w, gmag;
            kernel_value_gradient(k, r, ps.h, w, gmag);
            const Vec2 gw = gmag * x_ij;
            const Vec2 x_ji = -x_ij;
            // quadratic monomial weights of the Taylor remainder
            const Vec3 zeta(x_ij.x() * x_ij.x(), 2.0 * x_ij.x() * x_ij.y(), x_ij.y() * x_ij.y());
            const Scalar wj = ps.omega[j];
            s1 += (0.5 * wj) * (d2w * zeta.transpose());
            s2 += wj * (d2w * x_ji.transpose());
            s3 += (0.5 * wj) * (gw * zeta.transpose());
        }
        const Mat3 gamma = s1 - s2 * bi * s3;
        Mat3 inv;
        if (!invert3_guarded(gamma, corr.condition_threshold, inv)) ++corr.korzilius_singular;
        corr.korzilius_gamma_inv[static_cast<std::size_t>(i)] = inv;
    }
}

void liu_solve(const ParticleSet& ps, const NeighborTable& nbrs, const KernelSpec& k,
               const CorrectionSet& corr, const ArrayX& f, ArrayX& value, Mat2X& grad) {
    value.resize(nbrs.n_dest);
    grad.resize(2, nbrs.n_dest);
    const Scalar w0 = kernel_value(k, 0.0, ps.h);
    for (Index i = 0; i < nbrs.n_dest; ++i) {
        const Vec2 pi = ps.pos.col(i);
        Vec3 b(f[i] * w0 * ps.omega[i], 0.0, 0.0); // self term
        for (Index s = nbrs.begin(i); s < nbrs.end(i); ++s) {
            const Index j = nbrs.neighbor(s);
            const Vec2 x_ij = pi - ps.pos.col(j);
            Scalar w, gmag;
            kernel_value_gradient(k, x_ij.norm(), ps.h, w, gmag);
            if (w == 0.0 && gmag == 0.0) continue;
            b += (f[j] * ps.omega[j]) * Vec3(w, gmag * x_ij.x(), gmag * x_ij.y());
        }
        const Vec3 sol = corr.liu_inv[static_cast<std::size_t>(i)] * b;
        value[i] = sol[0];
        grad.col(i) = Vec2(sol[1], sol[2]);
    }
}

} // namespace sphlab
