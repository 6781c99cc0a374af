#include "sphlab/diagnostics.hpp"

#include "sphlab/operators.hpp"

#include <cmath>

namespace sphlab {

L1Result l1_field_error(const ArrayX& approx, const ArrayX& exact) {
    if (approx.size() != exact.size()) throw SphError("l1_field_error: size mismatch");
    const Scalar num = (approx - exact).abs().sum();
    const Scalar den = exact.abs().sum();
    if (den == 0.0) return {num / static_cast<Scalar>(approx.size()), true};
    return {num / den, false};
}

void SpacetimeL1::accumulate(
    const ParticleSet& ps, Scalar t, Scalar dt,
    const std::function<void(const Vec2&, Scalar, Scalar&, Scalar&, Scalar&)>& exact) {
    const Index n = ps.n_fluid;
    Scalar su = 0.0, sp = 0.0;
    for (Index i = 0; i < n; ++i) {
        Scalar ue, ve, pe;
        exact(ps.pos.col(i), t, ue, ve, pe);
        // same arithmetic on both sides so an exact replay scores zero
        const Scalar speed =
            std::sqrt(ps.vel(0, i) * ps.vel(0, i) + ps.vel(1, i) * ps.vel(1, i));
        const Scalar speed_e = std::sqrt(ue * ue + ve * ve);
        su += std::abs(speed - speed_e);
        sp += std::abs(ps.pressure[i] - pe);
    }
    u += su / static_cast<Scalar>(n) * dt;
    p += sp / static_cast<Scalar>(n) * dt;
}

Scalar fit_order(const std::vector<Scalar>& h, const std::vector<Scalar>& l1) {
    if (h.size() != l1.size()) throw SphError("fit_order: size mismatch");
    if (h.size() < 3) throw SphError("fit_order: not enough data (need >= 3 resolutions)");
    const auto n = static_cast<Scalar>(h.size());
    Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (!(h[k] > 0.0) || !(l1[k] > 0.0)) throw SphError("fit_order: non-positive data");
        const Scalar x = std::log(h[k]);
        const Scalar y = std::log(l1[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConservationSample conservation_sample(const ParticleSet& ps, Scalar t) {
    ConservationSample s;
    s.t = t;
    for (Index i = 0; i < ps.n_fluid; ++i) {
        const Scalar m = ps.mass[i];
        const Vec2 u = ps.vel.col(i);
        const Vec2 x = ps.pos.col(i);
        s.linear_momentum += m * u;
        s.angular_momentum += m * (x.x() * u.y() - x.y() * u.x());
        s.kinetic_energy += 0.5 * m * u.squaredNorm();
        s.max_speed = std::max(s.max_speed, u.norm());
    }
    return s;
}

ArrayX vorticity_field(const ParticleSet& ps, const NeighborTable& nbrs,
                       const CorrectionSet& corr, const KernelSpec& k) {
    const ArrayX ones = ArrayX::Ones(ps.n_total());
    const ArrayX u = ps.vel.row(0).transpose().array();
    const ArrayX v = ps.vel.row(1).transpose().array();
    const Mat2X du = gradient(ps, nbrs, corr, GradientForm::AsymBC, u, ones, k);
    const Mat2X dv = gradient(ps, nbrs, corr, GradientForm::AsymBC, v, ones, k);
    ArrayX wz(nbrs.n_dest);
    for (Index i = 0; i < nbrs.n_dest; ++i) wz[i] = dv(0, i) - du(1, i);
    return wz;
}

} // namespace sphlab
