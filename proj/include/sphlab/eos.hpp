#pragma once

/// Equations of state linking the transported fluid density to pressure.

#include "sphlab/types.hpp"

#include <cmath>

namespace sphlab {

enum class EosKind { Tait, Linear };

struct Eos {
    EosKind kind = EosKind::Tait;
    Scalar rho0 = 1.0;
    Scalar c0 = 10.0;
    Scalar gamma = 7.0;

    Scalar pressure(Scalar varrho) const {
        if (varrho <= 0.0) throw SphError("eos: non-positive density");
        if (kind == EosKind::Linear) return c0 * c0 * (varrho - rho0);
        const Scalar b = rho0 * c0 * c0 / gamma;
        return b * (std::pow(varrho / rho0, gamma) - 1.0);
    }

    Scalar density(Scalar p) const {
        if (kind == EosKind::Linear) return p / (c0 * c0) + rho0;
        const Scalar b = rho0 * c0 * c0 / gamma;
        const Scalar arg = p / b + 1.0;
        if (arg <= 0.0) throw SphError("eos: pressure below the negative-density branch");
        return rho0 * std::pow(arg, 1.0 / gamma);
    }
};

inline Eos make_tait(Scalar rho0, Scalar c0) { return {EosKind::Tait, rho0, c0, 7.0}; }
inline Eos make_linear(Scalar rho0, Scalar c0) { return {EosKind::Linear, rho0, c0, 1.0}; }

} // namespace sphlab
