#pragma once

#include <cstdint>
#include <vector>

#include "igs/gaussian.hpp"
#include "igs/image.hpp"
#include "igs/rng.hpp"

namespace igs {

/// Discrete probability table over pixel locations. Sums to 1 within 1e-9.
struct SamplingDistribution {
    int width = 0;
    int height = 0;
    std::vector<double> p;  // row-major H x W

    double at(int h, int w) const { return p[static_cast<size_t>(h) * width + w]; }
};

/// Per-pixel L2 norm of the six Sobel responses (x and y per RGB channel),
/// replicate padding at the borders.
std::vector<double> image_gradient_magnitude(const ImageBuffer& img);

/// Mixture of normalized gradient magnitude and a uniform floor:
/// (1-lambda) * |grad| / sum|grad| + lambda / (H*W).
/// A zero gradient field degenerates to the uniform distribution.
SamplingDistribution init_distribution(const ImageBuffer& img, double lambda);

/// Same formula as init_distribution; kept separate because the two lambdas
/// play different roles in the fit schedule.
SamplingDistribution opt_distribution(const ImageBuffer& img, double lambda);

/// Per-pixel L1 reconstruction error normalized to a distribution; uniform
/// when the images match exactly.
SamplingDistribution add_distribution(const ImageBuffer& rendered, const ImageBuffer& target);

/// Walker alias table for O(1) categorical draws.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& weights);

    size_t sample(Rng& rng) const;
    size_t size() const { return prob_.size(); }

private:
    std::vector<double> prob_;
    std::vector<uint32_t> alias_;
};

/// n independent draws with replacement; returns flat pixel indices (h*W + w).
std::vector<uint32_t> sample_pixel_indices(const SamplingDistribution& dist, int n, Rng& rng);

/// n independent draws with replacement, as pixel-center coordinates.
std::vector<PixelCoord> sample_pixels(const SamplingDistribution& dist, int n, Rng& rng);

/// Content-adaptive initialization: positions from init_distribution(img,
/// lambda), color taken from the target pixel, scale 2/max(H,W), theta 0.
GaussianSet initialize_set(const ImageBuffer& img, int count, double lambda, Rng& rng);

}  // namespace igs
