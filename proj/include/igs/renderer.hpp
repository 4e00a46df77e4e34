#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "igs/gaussian.hpp"
#include "igs/image.hpp"

namespace igs {

/// Denominator epsilon of the normalized blend. Keeps decode total when a
/// pixel is far from every selected Gaussian.
inline constexpr double kNormEps = 1e-8;

inline constexpr int kDefaultTopK = 10;

/// Per-Gaussian values cached once per parameter state so that density
/// queries across many pixels avoid recomputing trig and reciprocals.
struct PreparedGaussian {
    double mu_x, mu_y;
    double cos_t, sin_t;
    double inv_a, inv_b;    // 1/s1^2, 1/s2^2
    double inv_s1, inv_s2;  // 1/s1, 1/s2
    Color3 color;
};

/// The 48-byte subset the selection scan touches; kept in its own dense
/// array so the top-k pass streams less memory per candidate.
struct ScanGaussian {
    double mu_x, mu_y;
    double cos_t, sin_t;
    double inv_a, inv_b;
};

class PreparedSet {
public:
    explicit PreparedSet(const GaussianSet& set);

    size_t size() const { return prepared_.size(); }
    const PreparedGaussian& operator[](size_t i) const { return prepared_[i]; }
    const ScanGaussian& scan(size_t i) const { return scan_[i]; }

    /// Identity candidate list {0..N-1}; the global renderer and a one-block
    /// partition walk the exact same code path through this span.
    std::span<const uint32_t> all_indices() const { return iota_; }

private:
    std::vector<PreparedGaussian> prepared_;
    std::vector<ScanGaussian> scan_;
    std::vector<uint32_t> iota_;
};

/// Selection entry: q is the squared Mahalanobis distance, so density
/// exp(-q/2) is strictly decreasing in q and selection can rank by q without
/// evaluating the exponential for rejected candidates.
struct TopKEntry {
    double q;
    uint32_t idx;
};

struct BlendResult {
    Color3 color;          // unclamped normalized blend
    double total_density;  // sum of selected densities, before the epsilon
};

/// Top-k of `candidates` by density at x, ties broken by ascending index.
/// Writes up to k entries sorted best-first into `out`, returns the count.
int select_top_k_entries(const PreparedSet& set, std::span<const uint32_t> candidates, Vec2 x, int k,
                         TopKEntry* out);

/// Normalized aggregation over a selection: sum(w_j c_j) / (eps + sum w_j).
BlendResult blend_entries(const PreparedSet& set, const TopKEntry* entries, int n);

/// One sample's contribution to the parameter gradients of one Gaussian.
/// Parameter order matches the serialized record: mu_u, mu_v, theta, s1, s2, r, g, b.
struct SampleContrib {
    uint32_t idx;
    double d[8];
};

/// Gradient of the blend at x w.r.t. the selected Gaussians' parameters,
/// chained from `upstream` = dL/d(blended color). The selection itself is
/// treated as constant. Writes n entries into `out`.
void sample_gradients(const PreparedSet& set, Vec2 x, const TopKEntry* entries, int n, Color3 upstream,
                      const BlendResult& blend, SampleContrib* out);

/// Selection result in the public (density-weighted) form.
struct TopKSelection {
    std::vector<uint32_t> indices;  // sorted by descending density, ties ascending index
    std::vector<double> weights;    // matching densities
};

/// Accumulated loss gradient per Gaussian. Same parameter grouping as Gaussian2D.
struct GaussianGrad {
    Vec2 d_mu;
    double d_theta = 0.0;
    Vec2 d_scale;
    Color3 d_color;
};

struct PixelSample {
    PixelCoord x;
    Color3 upstream;  // dL/d(rendered color) at x
};

/// Unnormalized sum over all Gaussians. Brute-force oracle; not used in decode.
Color3 render_naive(const GaussianSet& set, PixelCoord x);

TopKSelection select_top_k(const GaussianSet& set, PixelCoord x, int k);

/// Normalized top-k blend at one pixel, unclamped.
Color3 render_topk(const GaussianSet& set, PixelCoord x, int k);

/// Full raster at arbitrary resolution; values clamped to [0,1] at write-out.
/// Pixels are independent, evaluated in parallel (OpenMP).
ImageBuffer render_image(const GaussianSet& set, int width, int height, int k);

/// Single-threaded reference for render_image; identical per-pixel kernel.
ImageBuffer render_image_serial(const GaussianSet& set, int width, int height, int k);

/// Loss-gradient accumulation over pixel samples. Per-sample work runs in
/// parallel; contributions are reduced in sample order, so results are
/// bit-identical to backward_serial regardless of thread count.
std::vector<GaussianGrad> backward(const GaussianSet& set, std::span<const PixelSample> samples, int k);

std::vector<GaussianGrad> backward_serial(const GaussianSet& set, std::span<const PixelSample> samples, int k);

/// Reusable buffers for the hot training path.
struct BackwardScratch {
    std::vector<SampleContrib> contribs;
    std::vector<int> counts;
};

/// backward() with caller-owned scratch and output; `grads` is resized and
/// zeroed. Returns nothing extra; see fit.cpp for the fused training loop.
void backward_into(const PreparedSet& set, std::span<const PixelSample> samples, int k, BackwardScratch& scratch,
                   std::vector<GaussianGrad>& grads);

}  // namespace igs
