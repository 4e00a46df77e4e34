#include "igs/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "igs/error.hpp"

namespace igs {

namespace {

void check_scale(Vec2 scale) {
    if (!finite(scale) || scale.x <= 0.0 || scale.y <= 0.0)
        raise(ErrorKind::invalid_parameter, "scale must be finite and positive");
}

}  // namespace

SymMat2 covariance(double theta, Vec2 scale) {
    check_scale(scale);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double a = scale.x * scale.x;
    const double b = scale.y * scale.y;
    // R diag(a, b) R'
    return {a * c * c + b * s * s, (a - b) * c * s, a * s * s + b * c * c};
}

SymMat2 covariance_inverse(double theta, Vec2 scale) {
    check_scale(scale);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double ia = 1.0 / (scale.x * scale.x);
    const double ib = 1.0 / (scale.y * scale.y);
    return {ia * c * c + ib * s * s, (ia - ib) * c * s, ia * s * s + ib * c * c};
}

double density(const Gaussian2D& g, Vec2 x) {
    check_scale(g.scale);
    const double c = std::cos(g.theta);
    const double s = std::sin(g.theta);
    const Vec2 d = x - g.mu;
    // Rotate the offset into the Gaussian frame; the quadratic form is then diagonal.
    const double e1 = c * d.x + s * d.y;
    const double e2 = -s * d.x + c * d.y;
    const double q = e1 * e1 / (g.scale.x * g.scale.x) + e2 * e2 / (g.scale.y * g.scale.y);
    return std::exp(-0.5 * q);
}

DensityGrad density_gradient(const Gaussian2D& g, Vec2 x) {
    check_scale(g.scale);
    const double c = std::cos(g.theta);
    const double s = std::sin(g.theta);
    const double ia = 1.0 / (g.scale.x * g.scale.x);
    const double ib = 1.0 / (g.scale.y * g.scale.y);
    const Vec2 d = x - g.mu;
    const double e1 = c * d.x + s * d.y;
    const double e2 = -s * d.x + c * d.y;
    const double q = e1 * e1 * ia + e2 * e2 * ib;
    const double w = std::exp(-0.5 * q);

    DensityGrad out;
    // dG/dmu = G * Sigma^-1 (x - mu) = G * R (e1/s1^2, e2/s2^2)
    const double v1 = e1 * ia;
    const double v2 = e2 * ib;
    out.d_mu = {w * (c * v1 - s * v2), w * (s * v1 + c * v2)};
    // dq/dtheta = 2 e1 e2 (1/s1^2 - 1/s2^2)
    out.d_theta = -w * e1 * e2 * (ia - ib);
    // dq/ds_i = -2 e_i^2 / s_i^3
    out.d_scale = {w * e1 * e1 * ia / g.scale.x, w * e2 * e2 * ib / g.scale.y};
    return out;
}

Gaussian2D constrain(const Gaussian2D& g) {
    if (!finite(g.mu) || !std::isfinite(g.theta) || !finite(g.scale) || !finite(g.color))
        raise(ErrorKind::invalid_parameter, "non-finite Gaussian parameters");

    auto clamp01 = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
    auto clamp_scale = [](double v) { return v < kScaleMin ? kScaleMin : (v > kScaleMax ? kScaleMax : v); };

    Gaussian2D out = g;
    out.mu = {clamp01(g.mu.x), clamp01(g.mu.y)};
    out.theta = std::fmod(g.theta, std::numbers::pi);
    if (out.theta < 0.0) out.theta += std::numbers::pi;
    // fmod can land exactly on pi when theta is a hair below a multiple of pi
    if (out.theta >= std::numbers::pi) out.theta = 0.0;
    out.scale = {clamp_scale(g.scale.x), clamp_scale(g.scale.y)};
    out.color = {clamp01(g.color.r), clamp01(g.color.g), clamp01(g.color.b)};
    return out;
}

void constrain_all(GaussianSet& set) {
    for (auto& g : set.gaussians) g = constrain(g);
}

}  // namespace igs
