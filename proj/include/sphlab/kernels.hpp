#pragma once

/// Smoothing kernels used by the solver, all in their 2D-normalized form
/// with q = r/h. The shape functions are kept separate from the metadata so
/// that support radius, edge-smoothness index and normalization stay data.

#include "sphlab/types.hpp"

#include <cmath>
#include <string>

namespace sphlab {

enum class KernelKind { Gaussian, CubicSpline, QuinticSpline, WendlandQ2, WendlandQ4, WendlandQ6, M4 };

namespace kernel_detail {

// Truncated Gaussian. Renormalized over the compact support so the 2D
// integral is exactly one; the value stays discontinuous at the edge
// (beta = 0), which is what drives its discretization-error plateau.
template <class T>
inline T gaussian_f(T q) {
    return q < T(3) ? std::exp(-q * q) : T(0);
}
template <class T>
inline T gaussian_df(T q) {
    return q < T(3) ? T(-2) * q * std::exp(-q * q) : T(0);
}

template <class T>
inline T cubic_f(T q) {
    if (q < T(1)) return T(1) - T(1.5) * q * q + T(0.75) * q * q * q;
    if (q < T(2)) {
        const T t = T(2) - q;
        return T(0.25) * t * t * t;
    }
    return T(0);
}
template <class T>
inline T cubic_df(T q) {
    if (q < T(1)) return q * (T(-3) + T(2.25) * q);
    if (q < T(2)) {
        const T t = T(2) - q;
        return T(-0.75) * t * t;
    }
    return T(0);
}

template <class T>
inline T quintic_f(T q) {
    T acc = T(0);
    if (q < T(3)) {
        const T t = T(3) - q;
        acc += t * t * t * t * t;
    }
    if (q < T(2)) {
        const T t = T(2) - q;
        acc -= T(6) * t * t * t * t * t;
    }
    if (q < T(1)) {
        const T t = T(1) - q;
        acc += T(15) * t * t * t * t * t;
    }
    return acc;
}
template <class T>
inline T quintic_df(T q) {
    T acc = T(0);
    if (q < T(3)) {
        const T t = T(3) - q;
        acc -= T(5) * t * t * t * t;
    }
    if (q < T(2)) {
        const T t = T(2) - q;
        acc += T(30) * t * t * t * t;
    }
    if (q < T(1)) {
        const T t = T(1) - q;
        acc -= T(75) * t * t * t * t;
    }
    return acc;
}
template <class T>
inline T quintic_d2f(T q) {
    T acc = T(0);
    if (q < T(3)) {
        const T t = T(3) - q;
        acc += T(20) * t * t * t;
    }
    if (q < T(2)) {
        const T t = T(2) - q;
        acc -= T(120) * t * t * t;
    }
    if (q < T(1)) {
        const T t = T(1) - q;
        acc += T(300) * t * t * t;
    }
    return acc;
}

template <class T>
inline T wq2_f(T q) {
    if (q >= T(2)) return T(0);
    const T t = T(1) - T(0.5) * q;
    const T t2 = t * t;
    return t2 * t2 * (T(1) + T(2) * q);
}
template <class T>
inline T wq2_df(T q) {
    if (q >= T(2)) return T(0);
    const T t = T(1) - T(0.5) * q;
    return T(-5) * q * t * t * t;
}

template <class T>
inline T wq4_f(T q) {
    if (q >= T(2)) return T(0);
    const T t = T(1) - T(0.5) * q;
    const T t2 = t * t;
    return t2 * t2 * t2 * (T(1) + T(3) * q + T(35.0 / 12.0) * q * q);
}
template <class T>
inline T wq4_df(T q) {
    if (q >= T(2)) return T(0);
    const T t = T(1) - T(0.5) * q;
    const T t2 = t * t;
    return -T(7.0 / 3.0) * q * (T(2) + T(5) * q) * t2 * t2 * t;
}

template <class T>
inline T wq6_f(T q) {
    if (q >= T(2)) return T(0);
    const T t = T(1) - T(0.5) * q;
    const T t2 = t * t;
    const T t4 = t2 * t2;
    return t4 * t4 * (T(1) + T(4) * q + T(6.25) * q * q + T(4) * q * q * q);
}
template <class T>
inline T wq6_df(T q) {
    if (q >= T(2)) return T(0);
    const T t = T(1) - T(0.5) * q;
    const T t2 = t * t;
    const T t4 = t2 * t2;
    return -T(2.75) * q * (T(2) + T(7) * q + T(8) * q * q) * t4 * t2 * t;
}

// fused value + derivative for the pair loops, sharing the power ladder
template <class T>
inline void quintic_fdf(T q, T& f, T& df) {
    f = T(0);
    df = T(0);
    if (q < T(3)) {
        const T t = T(3) - q;
        const T t2 = t * t;
        const T t4 = t2 * t2;
        f += t4 * t;
        df -= T(5) * t4;
    }
    if (q < T(2)) {
        const T t = T(2) - q;
        const T t2 = t * t;
        const T t4 = t2 * t2;
        f -= T(6) * t4 * t;
        df += T(30) * t4;
    }
    if (q < T(1)) {
        const T t = T(1) - q;
        const T t2 = t * t;
        const T t4 = t2 * t2;
        f += T(15) * t4 * t;
        df -= T(75) * t4;
    }
}

} // namespace kernel_detail

/// Remeshing interpolation kernel, piecewise cubic on [0, 2).
template <class T>
inline T m4_value(T q) {
    if (q < T(0)) throw SphError("m4_value: negative q");
    if (q < T(1)) return T(1) - T(2.5) * q * q + T(1.5) * q * q * q;
    if (q < T(2)) {
        const T t = T(2) - q;
        return T(0.5) * (T(1) - q) * t * t;
    }
    return T(0);
}

struct KernelSpec {
    KernelKind kind = KernelKind::QuinticSpline;
    Scalar support_radius = 3.0; ///< compact support in multiples of h
    int beta = 3;                ///< smoothness index at the support edge
    Scalar norm_2d = 7.0 / (478.0 * pi_v);
    std::string name = "quintic";
};

/// Builds the spec for one of the tabulated kernels.
///
/// Note the beta values follow the reference tabulation used throughout this
/// project (G:0, QS:3, CS:5, WQ2:5, WQ4:8, WQ6:11); the cubic/quintic entries
/// are swapped relative to the usual B-spline smoothness orders. beta is
/// metadata only and enters no computation.
inline KernelSpec make_kernel(KernelKind kind) {
    switch (kind) {
    case KernelKind::Gaussian:
        return {kind, 3.0, 0, 1.0 / (pi_v * (1.0 - std::exp(-9.0))), "gaussian"};
    case KernelKind::CubicSpline:
        return {kind, 2.0, 5, 10.0 / (7.0 * pi_v), "cubic"};
    case KernelKind::QuinticSpline:
        return {kind, 3.0, 3, 7.0 / (478.0 * pi_v), "quintic"};
    case KernelKind::WendlandQ2:
        return {kind, 2.0, 5, 7.0 / (4.0 * pi_v), "wendland2"};
    case KernelKind::WendlandQ4:
        return {kind, 2.0, 8, 9.0 / (4.0 * pi_v), "wendland4"};
    case KernelKind::WendlandQ6:
        return {kind, 2.0, 11, 39.0 / (14.0 * pi_v), "wendland6"};
    case KernelKind::M4:
        return {kind, 2.0, 0, 1.0, "m4"};
    }
    throw SphError("make_kernel: unknown kind");
}

inline KernelSpec make_kernel(const std::string& name) {
    for (auto kind : {KernelKind::Gaussian, KernelKind::CubicSpline, KernelKind::QuinticSpline,
                      KernelKind::WendlandQ2, KernelKind::WendlandQ4, KernelKind::WendlandQ6}) {
        if (make_kernel(kind).name == name) return make_kernel(kind);
    }
    throw SphError("make_kernel: unknown kernel name '" + name + "'");
}

inline Scalar kernel_shape(const KernelSpec& spec, Scalar q) {
    using namespace kernel_detail;
    switch (spec.kind) {
    case KernelKind::Gaussian: return gaussian_f(q);
    case KernelKind::CubicSpline: return cubic_f(q);
    case KernelKind::QuinticSpline: return quintic_f(q);
    case KernelKind::WendlandQ2: return wq2_f(q);
    case KernelKind::WendlandQ4: return wq4_f(q);
    case KernelKind::WendlandQ6: return wq6_f(q);
    case KernelKind::M4: return m4_value(q);
    }
    return 0.0;
}

inline Scalar kernel_shape_deriv(const KernelSpec& spec, Scalar q) {
    using namespace kernel_detail;
    switch (spec.kind) {
    case KernelKind::Gaussian: return gaussian_df(q);
    case KernelKind::CubicSpline: return cubic_df(q);
    case KernelKind::QuinticSpline: return quintic_df(q);
    case KernelKind::WendlandQ2: return wq2_df(q);
    case KernelKind::WendlandQ4: return wq4_df(q);
    case KernelKind::WendlandQ6: return wq6_df(q);
    case KernelKind::M4: throw SphError("kernel_shape_deriv: M4 is interpolation-only");
    }
    return 0.0;
}

/// W(r, h).
inline Scalar kernel_value(const KernelSpec& spec, Scalar r, Scalar h) {
    if (h <= 0.0) throw SphError("kernel_value: non-positive h");
    if (r < 0.0) throw SphError("kernel_value: negative r");
    if (r >= spec.support_radius * h) return 0.0;
    return spec.norm_2d / (h * h) * kernel_shape(spec, r / h);
}

/// grad W evaluated at x_ij = x_i - x_j; zero at the origin and outside
/// the support.
inline Vec2 kernel_gradient(const KernelSpec& spec, const Vec2& x_ij, Scalar h) {
    if (h <= 0.0) throw SphError("kernel_gradient: non-positive h");
    const Scalar r = x_ij.norm();
    if (r >= spec.support_radius * h || r < 1e-300) return Vec2::Zero();
    const Scalar mag = spec.norm_2d / (h * h * h) * kernel_shape_deriv(spec, r / h) / r;
    return mag * x_ij;
}

/// Fused W and grad-W magnitude for the pair loops: returns W and g where
/// grad W = g * x_ij.
inline void kernel_value_gradient(const KernelSpec& spec, Scalar r, Scalar h, Scalar& w,
                                  Scalar& grad_over_x) {
    if (r >= spec.support_radius * h) {
        w = 0.0;
        grad_over_x = 0.0;
        return;
    }
    const Scalar q = r / h;
    const Scalar sigma_h2 = spec.norm_2d / (h * h);
    Scalar f, df;
    if (spec.kind == KernelKind::QuinticSpline) {
        kernel_detail::quintic_fdf(q, f, df);
    } else {
        f = kernel_shape(spec, q);
        df = kernel_shape_deriv(spec, q);
    }
    w = sigma_h2 * f;
    grad_over_x = (r < 1e-300) ? 0.0 : sigma_h2 / (h * r) * df;
}

/// Analytic (d2W/dx2, d2W/dxdy, d2W/dy2) at x_ij. Only the quintic spline
/// needs these (Korzilius operator).
inline Vec3 kernel_second_derivatives(const KernelSpec& spec, const Vec2& x_ij, Scalar h) {
    if (h <= 0.0) throw SphError("kernel_second_derivatives: non-positive h");
    if (spec.kind != KernelKind::QuinticSpline)
        throw SphError("kernel_second_derivatives: unsupported kernel kind");
    using namespace kernel_detail;
    const Scalar r = x_ij.norm();
    if (r >= spec.support_radius * h) return Vec3::Zero();
    const Scalar q = r / h;
    const Scalar sigma_h4 = spec.norm_2d / (h * h * h * h);
    if (q < 1e-12) {
        const Scalar d2 = sigma_h4 * quintic_d2f(0.0);
        return Vec3(d2, 0.0, d2);
    }
    const Scalar f1 = quintic_df(q);
    const Scalar f2 = quintic_d2f(q);
    const Scalar cx = x_ij.x() / r, cy = x_ij.y() / r;
    const Scalar radial = f2, tangent = f1 / q;
    Vec3 out;
    out[0] = sigma_h4 * (radial * cx * cx + tangent * (1.0 - cx * cx));
    out[1] = sigma_h4 * (radial - tangent) * cx * cy;
    out[2] = sigma_h4 * (radial * cy * cy + tangent * (1.0 - cy * cy));
    return out;
}

} // namespace sphlab
