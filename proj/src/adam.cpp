#include "igs/adam.hpp"

#include <cmath>
#include <string>

#include "igs/error.hpp"

namespace igs {

void adam_step(GaussianSet& set, const std::vector<GaussianGrad>& grads, AdamState& state,
               const LearningRates& lr, long long t) {
    if (grads.size() != set.size()) raise(ErrorKind::dimension_mismatch, "gradient count != Gaussian count");
    if (t < 1) raise(ErrorKind::invalid_parameter, "Adam step index must be >= 1");
    state.resize(set.size());

    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));

    static const char* kParamNames[8] = {"mu_u", "mu_v", "theta", "s1", "s2", "r", "g", "b"};

    for (size_t i = 0; i < set.size(); ++i) {
        const GaussianGrad& gg = grads[i];
        const double g8[8] = {gg.d_mu.x,    gg.d_mu.y,    gg.d_theta,   gg.d_scale.x,
                              gg.d_scale.y, gg.d_color.r, gg.d_color.g, gg.d_color.b};
        const double lr8[8] = {lr.mu, lr.mu, lr.theta, lr.scale, lr.scale, lr.color, lr.color, lr.color};

        double upd[8];
        for (int p = 0; p < 8; ++p) {
            if (!std::isfinite(g8[p]))
                raise(ErrorKind::invalid_parameter,
                      "non-finite gradient for Gaussian " + std::to_string(i) + " parameter " + kParamNames[p]);
            double& m = state.m[i * 8 + p];
            double& v = state.v[i * 8 + p];
            m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g8[p];
            v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g8[p] * g8[p];
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            upd[p] = lr8[p] * m_hat / (std::sqrt(v_hat) + kAdamEps);
        }

        Gaussian2D& g = set[i];
        g.mu.x -= upd[0];
        g.mu.y -= upd[1];
        g.theta -= upd[2];
        g.scale.x -= upd[3];
        g.scale.y -= upd[4];
        g.color.r -= upd[5];
        g.color.g -= upd[6];
        g.color.b -= upd[7];
        g = constrain(g);
    }
}

}  // namespace igs
