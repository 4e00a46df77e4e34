#include "igs/renderer.hpp"

#include <cmath>
#include <numeric>

#include "igs/error.hpp"

namespace igs {

namespace {

void require_nonempty(const GaussianSet& set) {
    if (set.empty()) raise(ErrorKind::empty_set, "operation requires a non-empty GaussianSet");
}

// Squared Mahalanobis distance from g's center to x.
inline double mahalanobis_sq(const ScanGaussian& g, Vec2 x) {
    const double dx = x.x - g.mu_x;
    const double dy = x.y - g.mu_y;
    const double e1 = g.cos_t * dx + g.sin_t * dy;
    const double e2 = -g.sin_t * dx + g.cos_t * dy;
    return e1 * e1 * g.inv_a + e2 * e2 * g.inv_b;
}

inline Color3 clamp01(Color3 c) {
    auto cl = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
    return {cl(c.r), cl(c.g), cl(c.b)};
}

}  // namespace

PreparedSet::PreparedSet(const GaussianSet& set) {
    prepared_.reserve(set.size());
    scan_.reserve(set.size());
    iota_.resize(set.size());
    std::iota(iota_.begin(), iota_.end(), 0u);
    for (const auto& g : set.gaussians) {
        PreparedGaussian p;
        p.mu_x = g.mu.x;
        p.mu_y = g.mu.y;
        p.cos_t = std::cos(g.theta);
        p.sin_t = std::sin(g.theta);
        p.inv_s1 = 1.0 / g.scale.x;
        p.inv_s2 = 1.0 / g.scale.y;
        p.inv_a = p.inv_s1 * p.inv_s1;
        p.inv_b = p.inv_s2 * p.inv_s2;
        p.color = g.color;
        prepared_.push_back(p);
        scan_.push_back({p.mu_x, p.mu_y, p.cos_t, p.sin_t, p.inv_a, p.inv_b});
    }
}

int select_top_k_entries(const PreparedSet& set, std::span<const uint32_t> candidates, Vec2 x, int k,
                         TopKEntry* out) {
    // Keep `out` sorted ascending by (q, idx): best candidate first, the
    // current worst at position n-1. k is small; linear insertion wins.
    int n = 0;
    for (uint32_t idx : candidates) {
        const double q = mahalanobis_sq(set.scan(idx), x);
        if (n == k) {
            const TopKEntry& worst = out[n - 1];
            if (q > worst.q || (q == worst.q && idx > worst.idx)) continue;
            --n;
        }
        int pos = n;
        while (pos > 0 && (q < out[pos - 1].q || (q == out[pos - 1].q && idx < out[pos - 1].idx))) {
            out[pos] = out[pos - 1];
            --pos;
        }
        out[pos] = {q, idx};
        ++n;
    }
    return n;
}

BlendResult blend_entries(const PreparedSet& set, const TopKEntry* entries, int n) {
    double total = 0.0;
    Color3 acc;
    for (int i = 0; i < n; ++i) {
        const double w = std::exp(-0.5 * entries[i].q);
        const Color3& c = set[entries[i].idx].color;
        total += w;
        acc.r += w * c.r;
        acc.g += w * c.g;
        acc.b += w * c.b;
    }
    const double inv = 1.0 / (kNormEps + total);
    return {acc * inv, total};
}

void sample_gradients(const PreparedSet& set, Vec2 x, const TopKEntry* entries, int n, Color3 upstream,
                      const BlendResult& blend, SampleContrib* out) {
    const double inv_denom = 1.0 / (kNormEps + blend.total_density);
    const Color3 blended = blend.color;  // dL/dw_j needs (c_j - out)

    for (int i = 0; i < n; ++i) {
        const PreparedGaussian& g = set[entries[i].idx];
        const double w = std::exp(-0.5 * entries[i].q);
        const double dL_dw =
            upstream.dot(Color3{g.color.r - blended.r, g.color.g - blended.g, g.color.b - blended.b}) * inv_denom;
        const double wc = w * inv_denom;  // dL/dc_j = upstream * w / denom

        // Density partials, same closed forms as density_gradient().
        const double dx = x.x - g.mu_x;
        const double dy = x.y - g.mu_y;
        const double e1 = g.cos_t * dx + g.sin_t * dy;
        const double e2 = -g.sin_t * dx + g.cos_t * dy;
        const double v1 = e1 * g.inv_a;
        const double v2 = e2 * g.inv_b;

        SampleContrib& sc = out[i];
        sc.idx = entries[i].idx;
        sc.d[0] = dL_dw * w * (g.cos_t * v1 - g.sin_t * v2);
        sc.d[1] = dL_dw * w * (g.sin_t * v1 + g.cos_t * v2);
        sc.d[2] = dL_dw * -w * e1 * e2 * (g.inv_a - g.inv_b);
        sc.d[3] = dL_dw * w * e1 * e1 * g.inv_a * g.inv_s1;
        sc.d[4] = dL_dw * w * e2 * e2 * g.inv_b * g.inv_s2;
        sc.d[5] = upstream.r * wc;
        sc.d[6] = upstream.g * wc;
        sc.d[7] = upstream.b * wc;
    }
}

Color3 render_naive(const GaussianSet& set, PixelCoord x) {
    require_nonempty(set);
    Color3 acc;
    for (const auto& g : set.gaussians) {
        const double w = density(g, {x.u, x.v});
        acc = acc + g.color * w;
    }
    return acc;
}

TopKSelection select_top_k(const GaussianSet& set, PixelCoord x, int k) {
    require_nonempty(set);
    if (k < 1) raise(ErrorKind::invalid_parameter, "k must be >= 1");
    PreparedSet ps(set);
    std::vector<TopKEntry> entries(std::min<size_t>(k, set.size()));
    const int n = select_top_k_entries(ps, ps.all_indices(), {x.u, x.v}, k, entries.data());
    TopKSelection sel;
    sel.indices.reserve(n);
    sel.weights.reserve(n);
    for (int i = 0; i < n; ++i) {
        sel.indices.push_back(entries[i].idx);
        sel.weights.push_back(std::exp(-0.5 * entries[i].q));
    }
    return sel;
}

Color3 render_topk(const GaussianSet& set, PixelCoord x, int k) {
    require_nonempty(set);
    if (k < 1) raise(ErrorKind::invalid_parameter, "k must be >= 1");
    PreparedSet ps(set);
    std::vector<TopKEntry> entries(std::min<size_t>(k, set.size()));
    const int n = select_top_k_entries(ps, ps.all_indices(), {x.u, x.v}, k, entries.data());
    return blend_entries(ps, entries.data(), n).color;
}

namespace {

ImageBuffer render_image_impl(const GaussianSet& set, int width, int height, int k, bool parallel) {
    require_nonempty(set);
    if (width < 1 || height < 1) raise(ErrorKind::invalid_parameter, "render target must be at least 1x1");
    if (k < 1) raise(ErrorKind::invalid_parameter, "k must be >= 1");

    PreparedSet ps(set);
    ImageBuffer img(width, height);
    const auto cands = ps.all_indices();
    const int kk = static_cast<int>(std::min<size_t>(k, ps.size()));

    auto render_row = [&](std::vector<TopKEntry>& entries, int h) {
        for (int w = 0; w < width; ++w) {
            const PixelCoord pc = pixel_center(h, w, height, width);
            const int n = select_top_k_entries(ps, cands, {pc.u, pc.v}, kk, entries.data());
            img.set_pixel(h, w, clamp01(blend_entries(ps, entries.data(), n).color));
        }
    };

    if (parallel) {
#pragma omp parallel
        {
            std::vector<TopKEntry> entries(kk);
#pragma omp for schedule(static)
            for (int h = 0; h < height; ++h) render_row(entries, h);
        }
    } else {
        std::vector<TopKEntry> entries(kk);
        for (int h = 0; h < height; ++h) render_row(entries, h);
    }
    return img;
}

void accumulate_contribs(const SampleContrib* sc, int n, std::vector<GaussianGrad>& grads) {
    for (int j = 0; j < n; ++j) {
        GaussianGrad& g = grads[sc[j].idx];
        g.d_mu.x += sc[j].d[0];
        g.d_mu.y += sc[j].d[1];
        g.d_theta += sc[j].d[2];
        g.d_scale.x += sc[j].d[3];
        g.d_scale.y += sc[j].d[4];
        g.d_color.r += sc[j].d[5];
        g.d_color.g += sc[j].d[6];
        g.d_color.b += sc[j].d[7];
    }
}

}  // namespace

ImageBuffer render_image(const GaussianSet& set, int width, int height, int k) {
    return render_image_impl(set, width, height, k, true);
}

ImageBuffer render_image_serial(const GaussianSet& set, int width, int height, int k) {
    return render_image_impl(set, width, height, k, false);
}

void backward_into(const PreparedSet& set, std::span<const PixelSample> samples, int k, BackwardScratch& scratch,
                   std::vector<GaussianGrad>& grads) {
    if (set.size() == 0) raise(ErrorKind::empty_set, "backward requires a non-empty GaussianSet");
    if (k < 1) raise(ErrorKind::invalid_parameter, "k must be >= 1");
    const int kk = static_cast<int>(std::min<size_t>(k, set.size()));
    const size_t ns = samples.size();

    // Validate before entering the parallel region; exceptions must not cross it.
    for (const PixelSample& s : samples)
        if (!finite(s.upstream)) raise(ErrorKind::invalid_parameter, "non-finite upstream gradient");

    scratch.contribs.resize(ns * kk);
    scratch.counts.resize(ns);
    grads.assign(set.size(), GaussianGrad{});

    const auto cands = set.all_indices();

    // Parallel map: each sample writes its own contribution slots.
#pragma omp parallel
    {
        std::vector<TopKEntry> entries(kk);
#pragma omp for schedule(static)
        for (long long i = 0; i < static_cast<long long>(ns); ++i) {
            const PixelSample& s = samples[i];
            const int n = select_top_k_entries(set, cands, {s.x.u, s.x.v}, kk, entries.data());
            const BlendResult blend = blend_entries(set, entries.data(), n);
            sample_gradients(set, {s.x.u, s.x.v}, entries.data(), n, s.upstream, blend,
                             &scratch.contribs[i * kk]);
            scratch.counts[i] = n;
        }
    }

    // Ordered reduction: accumulation order is fixed by sample index, so the
    // result does not depend on the parallel schedule.
    for (size_t i = 0; i < ns; ++i) accumulate_contribs(&scratch.contribs[i * kk], scratch.counts[i], grads);
}

std::vector<GaussianGrad> backward(const GaussianSet& set, std::span<const PixelSample> samples, int k) {
    PreparedSet ps(set);
    BackwardScratch scratch;
    std::vector<GaussianGrad> grads;
    backward_into(ps, samples, k, scratch, grads);
    return grads;
}

std::vector<GaussianGrad> backward_serial(const GaussianSet& set, std::span<const PixelSample> samples, int k) {
    if (set.empty()) raise(ErrorKind::empty_set, "backward requires a non-empty GaussianSet");
    if (k < 1) raise(ErrorKind::invalid_parameter, "k must be >= 1");
    PreparedSet ps(set);
    const int kk = static_cast<int>(std::min<size_t>(k, set.size()));
    std::vector<GaussianGrad> grads(set.size());
    std::vector<TopKEntry> entries(kk);
    std::vector<SampleContrib> contribs(kk);
    const auto cands = ps.all_indices();

    for (const PixelSample& s : samples) {
        if (!finite(s.upstream)) raise(ErrorKind::invalid_parameter, "non-finite upstream gradient");
        const int n = select_top_k_entries(ps, cands, {s.x.u, s.x.v}, kk, entries.data());
        const BlendResult blend = blend_entries(ps, entries.data(), n);
        sample_gradients(ps, {s.x.u, s.x.v}, entries.data(), n, s.upstream, blend, contribs.data());
        accumulate_contribs(contribs.data(), n, grads);
    }
    return grads;
}

}  // namespace igs
