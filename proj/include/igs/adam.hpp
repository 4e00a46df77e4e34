#pragma once

#include <vector>

#include "igs/gaussian.hpp"
#include "igs/renderer.hpp"

namespace igs {

/// Per-group learning rates, matching the parameter grouping (mu, color, scale, theta).
struct LearningRates {
    double mu = 2e-4;
    double color = 2e-3;
    double scale = 1e-3;
    double theta = 1e-3;

    LearningRates scaled(double f) const { return {mu * f, color * f, scale * f, theta * f}; }
};

/// First/second moment estimates, 8 slots per Gaussian in record order
/// (mu_u, mu_v, theta, s1, s2, r, g, b). Appending Gaussians extends the
/// state with zeroed moments.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;

    void resize(size_t gaussian_count) {
        m.resize(gaussian_count * 8, 0.0);
        v.resize(gaussian_count * 8, 0.0);
    }
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One Adam update (bias-corrected) over every Gaussian, followed by
/// constrain() on each. t is the 1-based step index. Throws invalid_parameter
/// naming the offending Gaussian if a gradient is non-finite.
void adam_step(GaussianSet& set, const std::vector<GaussianGrad>& grads, AdamState& state,
               const LearningRates& lr, long long t);

}  // namespace igs
