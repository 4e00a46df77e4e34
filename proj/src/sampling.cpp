#include "igs/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "igs/error.hpp"

namespace igs {

namespace {

// Compensated summation; distribution normalizers add millions of terms and
// must land within the 1e-9 mass budget.
double kahan_sum(const std::vector<double>& v) {
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

SamplingDistribution gradient_mixture(const ImageBuffer& img, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) raise(ErrorKind::invalid_parameter, "lambda must lie in [0,1]");
    const size_t n = img.pixel_count();
    SamplingDistribution dist{img.width(), img.height(), {}};
    dist.p = image_gradient_magnitude(img);

    const double total = kahan_sum(dist.p);
    const double uniform = 1.0 / static_cast<double>(n);
    if (total > 0.0) {
        const double scale = (1.0 - lambda) / total;
        for (double& v : dist.p) v = v * scale + lambda * uniform;
    } else {
        std::fill(dist.p.begin(), dist.p.end(), uniform);
    }
    return dist;
}

}  // namespace

std::vector<double> image_gradient_magnitude(const ImageBuffer& img) {
    const int W = img.width(), H = img.height();
    std::vector<double> mag(static_cast<size_t>(W) * H);

    auto clamp = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

    for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w) {
            const int hm = clamp(h - 1, H - 1), hp = clamp(h + 1, H - 1);
            const int wm = clamp(w - 1, W - 1), wp = clamp(w + 1, W - 1);
            double acc = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double tl = img.at(hm, wm, c), tc = img.at(hm, w, c), tr = img.at(hm, wp, c);
                const double ml = img.at(h, wm, c), mr = img.at(h, wp, c);
                const double bl = img.at(hp, wm, c), bc = img.at(hp, w, c), br = img.at(hp, wp, c);
                const double gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
                const double gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
                acc += gx * gx + gy * gy;
            }
            mag[static_cast<size_t>(h) * W + w] = std::sqrt(acc);
        }
    }
    return mag;
}

SamplingDistribution init_distribution(const ImageBuffer& img, double lambda) {
    return gradient_mixture(img, lambda);
}

SamplingDistribution opt_distribution(const ImageBuffer& img, double lambda) {
    return gradient_mixture(img, lambda);
}

SamplingDistribution add_distribution(const ImageBuffer& rendered, const ImageBuffer& target) {
    if (!rendered.same_shape(target)) raise(ErrorKind::dimension_mismatch, "rendered/target dimensions differ");
    const int W = rendered.width(), H = rendered.height();
    SamplingDistribution dist{W, H, std::vector<double>(static_cast<size_t>(W) * H)};

    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w)
            dist.p[static_cast<size_t>(h) * W + w] = (rendered.pixel(h, w) - target.pixel(h, w)).abs_sum();

    const double total = kahan_sum(dist.p);
    if (total > 0.0) {
        const double inv = 1.0 / total;
        for (double& v : dist.p) v *= inv;
    } else {
        std::fill(dist.p.begin(), dist.p.end(), 1.0 / dist.p.size());
    }
    return dist;
}

AliasTable::AliasTable(const std::vector<double>& weights) {
    const size_t n = weights.size();
    if (n == 0) raise(ErrorKind::invalid_parameter, "alias table needs at least one entry");
    prob_.resize(n);
    alias_.assign(n, 0);

    // Walker/Vose construction over weights scaled to mean 1.
    const double total = kahan_sum(weights);
    if (!(total > 0.0)) raise(ErrorKind::invalid_parameter, "alias table weights must have positive sum");
    std::vector<double> scaled(n);
    for (size_t i = 0; i < n; ++i) {
        if (weights[i] < 0.0) raise(ErrorKind::invalid_parameter, "alias table weights must be non-negative");
        scaled[i] = weights[i] * n / total;
    }

    std::vector<uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(static_cast<uint32_t>(i));

    while (!small.empty() && !large.empty()) {
        const uint32_t s = small.back();
        const uint32_t l = large.back();
        small.pop_back();
        large.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (uint32_t i : large) prob_[i] = 1.0;
    for (uint32_t i : small) prob_[i] = 1.0;  // numerical leftovers
}

size_t AliasTable::sample(Rng& rng) const {
    const size_t i = rng.next_index(prob_.size());
    return rng.next_double() < prob_[i] ? i : alias_[i];
}

std::vector<uint32_t> sample_pixel_indices(const SamplingDistribution& dist, int n, Rng& rng) {
    if (n < 1) raise(ErrorKind::invalid_parameter, "sample count must be >= 1");
    AliasTable table(dist.p);
    std::vector<uint32_t> out(n);
    for (int i = 0; i < n; ++i) out[i] = static_cast<uint32_t>(table.sample(rng));
    return out;
}

std::vector<PixelCoord> sample_pixels(const SamplingDistribution& dist, int n, Rng& rng) {
    const auto idx = sample_pixel_indices(dist, n, rng);
    std::vector<PixelCoord> out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        const int h = static_cast<int>(idx[i]) / dist.width;
        const int w = static_cast<int>(idx[i]) % dist.width;
        out[i] = pixel_center(h, w, dist.height, dist.width);
    }
    return out;
}

GaussianSet initialize_set(const ImageBuffer& img, int count, double lambda, Rng& rng) {
    if (count < 1) raise(ErrorKind::invalid_parameter, "initialization count must be >= 1");
    const SamplingDistribution dist = init_distribution(img, lambda);
    const auto idx = sample_pixel_indices(dist, count, rng);

    const double s0 = 2.0 / std::max(img.width(), img.height());
    GaussianSet set;
    set.gaussians.reserve(count);
    for (uint32_t flat : idx) {
        const int h = static_cast<int>(flat) / img.width();
        const int w = static_cast<int>(flat) % img.width();
        Gaussian2D g;
        const PixelCoord pc = pixel_center(h, w, img.height(), img.width());
        g.mu = {pc.u, pc.v};
        g.theta = 0.0;
        g.scale = {s0, s0};
        g.color = img.pixel(h, w);
        set.gaussians.push_back(g);
    }
    return set;
}

}  // namespace igs
