#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sphlab {

using Scalar = double;
using Index = Eigen::Index;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using ArrayX = Eigen::ArrayXd;
using Mat2X = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

inline constexpr Scalar pi_v = 3.14159265358979323846;

/// Base class for all errors raised by the library.
struct SphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A field went non-finite (or blew up) during time integration.
struct DivergenceError : SphError {
    DivergenceError(long step_, Index particle_, const std::string& what_)
        : SphError(what_), step(step_), particle(particle_) {}
    long step;
    Index particle;
};

/// Kernel sum vanished while computing a numerical volume.
struct DegenerateVolumeError : SphError {
    using SphError::SphError;
};

/// Packing failed to reach the density-uniformity tolerance.
struct PackingError : SphError {
    PackingError(Scalar residual_, const std::string& what_)
        : SphError(what_), residual(residual_) {}
    Scalar residual;
};

/// Deterministic uniform draw on [0, 1). The standard distributions are
/// implementation defined, so the mantissa mapping is done by hand to keep
/// seeded runs bitwise reproducible.
template <class Rng>
inline Scalar uniform01(Rng& rng) {
    return static_cast<Scalar>(rng() >> 11) * 0x1.0p-53;
}

} // namespace sphlab
