#pragma once

#include <vector>

#include "igs/image.hpp"
#include "igs/types.hpp"

namespace igs {

/// Parameter bounds enforced by constrain(). The scale floor keeps the inverse
/// covariance finite; the ceiling keeps float16 storage well conditioned.
inline constexpr double kScaleMin = 1e-4;
inline constexpr double kScaleMax = 2.0;

/// Anisotropic colored 2D Gaussian over the normalized [0,1]^2 image domain.
/// Eight trainable parameters: position, rotation angle, per-axis scale, RGB.
/// The covariance is never stored; it is built from (theta, scale) on the fly,
/// which keeps it positive definite for any in-bounds parameter values.
struct Gaussian2D {
    Vec2 mu;            // position, in [0,1]^2 after constrain()
    double theta = 0.0; // rotation, canonical range [0, pi)
    Vec2 scale;         // per-axis standard deviations, in [kScaleMin, kScaleMax]
    Color3 color;       // RGB in [0,1]
};

struct GaussianSet {
    std::vector<Gaussian2D> gaussians;

    size_t size() const { return gaussians.size(); }
    bool empty() const { return gaussians.empty(); }
    Gaussian2D& operator[](size_t i) { return gaussians[i]; }
    const Gaussian2D& operator[](size_t i) const { return gaussians[i]; }
};

/// Partial derivatives of the density G(x) with respect to the geometric
/// parameters. Color does not enter the density.
struct DensityGrad {
    Vec2 d_mu;
    double d_theta = 0.0;
    Vec2 d_scale;
};

/// Covariance R S S' R' for rotation angle theta and scale diagonal (s1, s2).
/// Throws invalid_parameter for non-finite or sub-floor scales.
SymMat2 covariance(double theta, Vec2 scale);

/// Inverse covariance in closed form: rotate, scale by 1/s^2, rotate back.
/// Exact for any in-bounds parameters; no general matrix inversion involved.
SymMat2 covariance_inverse(double theta, Vec2 scale);

/// Density exp(-0.5 (x-mu)' Sigma^-1 (x-mu)), in (0, 1].
double density(const Gaussian2D& g, Vec2 x);

/// Analytic partials of density() with respect to mu, theta and scale.
/// Derived through the factorized covariance; validated against central
/// finite differences in the test suite.
DensityGrad density_gradient(const Gaussian2D& g, Vec2 x);

/// Clamp parameters back into their allowed ranges: theta wrapped into
/// [0, pi), scale into [kScaleMin, kScaleMax], mu and color into [0,1].
/// Idempotent. Throws invalid_parameter on non-finite input.
Gaussian2D constrain(const Gaussian2D& g);

/// constrain() applied in place to every element.
void constrain_all(GaussianSet& set);

}  // namespace igs
