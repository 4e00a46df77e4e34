#include "igs/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "igs/bsp.hpp"
#include "igs/error.hpp"
#include "igs/metrics.hpp"
#include "igs/renderer.hpp"
#include "igs/rng.hpp"
#include "igs/sampling.hpp"

namespace igs {

namespace {

void validate(const FitConfig& c) {
    if (c.budget < 8) raise(ErrorKind::invalid_parameter, "budget must be >= 8");
    if (c.k < 1) raise(ErrorKind::invalid_parameter, "k must be >= 1");
    if (c.lambda_init < 0.0 || c.lambda_init > 1.0 || c.lambda_opt < 0.0 || c.lambda_opt > 1.0)
        raise(ErrorKind::invalid_parameter, "lambda values must lie in [0,1]");
    if (c.iterations < 1 || c.samples_per_iter < 1 || c.eval_interval < 1 || c.plateau_patience < 1 ||
        c.warmup_iters < 1 || c.densify_interval < 1)
        raise(ErrorKind::invalid_parameter, "schedule counts must be >= 1");
    if (c.lr.mu <= 0.0 || c.lr.color <= 0.0 || c.lr.scale <= 0.0 || c.lr.theta <= 0.0 || c.lr_decay <= 0.0)
        raise(ErrorKind::invalid_parameter, "rates must be positive");
}

// Internal full-image render used for evaluation and densification maps.
// n_max = 64 keeps it fast at large counts and degenerates to the exact
// global render (single block) for sets of <= 64 Gaussians.
ImageBuffer render_current(const GaussianSet& set, int width, int height, int k) {
    const BspPartition p = build_partition(set, 64);
    return render_image_blocked(set, p, width, height, k);
}

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct TrainBuffers {
    std::vector<uint32_t> sample_idx;
    std::vector<SampleContrib> contribs;
    std::vector<int> counts;
    std::vector<double> losses;
    std::vector<GaussianGrad> grads;
};

// Fused forward/backward over one iteration's samples: loss and parameter
// gradients of L = (1/n) sum |c_r - c_t|_1 at the sampled pixel centers.
double train_step_gradients(const PreparedSet& ps, const ImageBuffer& target,
                            const std::vector<uint32_t>& sample_idx, int k, TrainBuffers& buf) {
    const size_t ns = sample_idx.size();
    const int kk = static_cast<int>(std::min<size_t>(k, ps.size()));
    const double inv_n = 1.0 / static_cast<double>(ns);
    const int W = target.width(), H = target.height();

    buf.contribs.resize(ns * kk);
    buf.counts.resize(ns);
    buf.losses.resize(ns);
    buf.grads.assign(ps.size(), GaussianGrad{});

    const auto cands = ps.all_indices();

#pragma omp parallel
    {
        std::vector<TopKEntry> entries(kk);
#pragma omp for schedule(static)
        for (long long i = 0; i < static_cast<long long>(ns); ++i) {
            const int h = static_cast<int>(sample_idx[i]) / W;
            const int w = static_cast<int>(sample_idx[i]) % W;
            const PixelCoord pc = pixel_center(h, w, H, W);
            const Vec2 x{pc.u, pc.v};
            const Color3 c_t = target.pixel(h, w);

            const int n = select_top_k_entries(ps, cands, x, kk, entries.data());
            const BlendResult blend = blend_entries(ps, entries.data(), n);
            const Color3 diff = blend.color - c_t;
            buf.losses[i] = diff.abs_sum();
            const Color3 upstream{sign_of(diff.r) * inv_n, sign_of(diff.g) * inv_n, sign_of(diff.b) * inv_n};
            sample_gradients(ps, x, entries.data(), n, upstream, blend, &buf.contribs[i * kk]);
            buf.counts[i] = n;
        }
    }

    // Ordered reductions keep the result independent of the thread count.
    double loss = 0.0;
    for (size_t i = 0; i < ns; ++i) loss += buf.losses[i];
    loss *= inv_n;

    for (size_t i = 0; i < ns; ++i) {
        const SampleContrib* sc = &buf.contribs[i * kk];
        for (int j = 0; j < buf.counts[i]; ++j) {
            GaussianGrad& g = buf.grads[sc[j].idx];
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
    return loss;
}

std::string checkpoint_id(int stage, int iteration, size_t count) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "lod%d_iter%d_n%zu", stage, iteration, count);
    return buf;
}

}  // namespace

std::pair<GaussianSet, FitReport> fit(const ImageBuffer& target, const FitConfig& config,
                                      const CheckpointFn& on_checkpoint) {
    validate(config);
    const int W = target.width(), H = target.height();

    Rng rng(config.seed);
    FitReport report;

    GaussianSet set = initialize_set(target, config.budget / 2, config.lambda_init, rng);

    const SamplingDistribution opt_dist = opt_distribution(target, config.lambda_opt);
    const AliasTable opt_table(opt_dist.p);

    AdamState adam;
    adam.resize(set.size());
    LearningRates lr = config.lr;
    bool decayed = false;

    double best_psnr = -std::numeric_limits<double>::infinity();
    int plateau_streak = 0;

    const double default_scale = 2.0 / std::max(W, H);
    const int add_count = config.budget / 8;
    int stage = 0;  // densifications completed

    TrainBuffers buf;

    auto emit_checkpoint = [&](int iteration) {
        const std::string id = checkpoint_id(stage, iteration, set.size());
        report.checkpoints.push_back(id);
        if (on_checkpoint) on_checkpoint(stage, iteration, id, set);
    };

    for (int iter = 1; iter <= config.iterations; ++iter) {
        buf.sample_idx.resize(config.samples_per_iter);
        for (auto& s : buf.sample_idx) s = static_cast<uint32_t>(opt_table.sample(rng));

        PreparedSet ps(set);
        const double loss = train_step_gradients(ps, target, buf.sample_idx, config.k, buf);
        if (!std::isfinite(loss)) raise(ErrorKind::invalid_parameter, "training loss became non-finite");

        adam_step(set, buf.grads, adam, lr, iter);

        ImageBuffer rendered;
        bool have_render = false;

        if (iter % config.eval_interval == 0 || iter == config.iterations) {
            rendered = render_current(set, W, H, config.k);
            have_render = true;
            const double p = psnr(rendered, target);
            const double s = ssim(rendered, target);
            if (p >= best_psnr + 0.01) {
                best_psnr = p;
                plateau_streak = 0;
            } else {
                best_psnr = std::max(best_psnr, p);
                ++plateau_streak;
                if (!decayed && plateau_streak >= config.plateau_patience) {
                    lr = lr.scaled(config.lr_decay);
                    decayed = true;
                    report.lr_decay_iteration = iter;
                }
            }
            report.evals.push_back({iter, static_cast<int>(set.size()), loss, p, s, best_psnr});
        }

        if (stage < 4 && iter == config.warmup_iters + stage * config.densify_interval) {
            emit_checkpoint(iter);
            if (!have_render) rendered = render_current(set, W, H, config.k);
            const SamplingDistribution add_dist = add_distribution(rendered, target);
            const AliasTable add_table(add_dist.p);
            for (int a = 0; a < add_count; ++a) {
                const auto flat = static_cast<uint32_t>(add_table.sample(rng));
                const int h = static_cast<int>(flat) / W;
                const int w = static_cast<int>(flat) % W;
                Gaussian2D g;
                const PixelCoord pc = pixel_center(h, w, H, W);
                g.mu = {pc.u, pc.v};
                g.theta = 0.0;
                g.scale = {default_scale, default_scale};
                g.color = target.pixel(h, w);
                set.gaussians.push_back(g);
            }
            adam.resize(set.size());
            ++stage;
        }
    }

    emit_checkpoint(config.iterations);
    report.final_count = static_cast<int>(set.size());
    return {std::move(set), std::move(report)};
}

void FitReport::write(std::ostream& os, const FitConfig& config) const {
    char line[512];
    std::snprintf(line, sizeof(line),
                  "config budget=%d k=%d lambda_init=%.6g lambda_opt=%.6g iterations=%d samples=%d "
                  "lr_mu=%.6g lr_color=%.6g lr_scale=%.6g lr_theta=%.6g eval_interval=%d patience=%d "
                  "lr_decay=%.6g warmup=%d densify_interval=%d seed=%llu\n",
                  config.budget, config.k, config.lambda_init, config.lambda_opt, config.iterations,
                  config.samples_per_iter, config.lr.mu, config.lr.color, config.lr.scale, config.lr.theta,
                  config.eval_interval, config.plateau_patience, config.lr_decay, config.warmup_iters,
                  config.densify_interval, static_cast<unsigned long long>(config.seed));
    os << line;
    for (const EvalRecord& e : evals) {
        std::snprintf(line, sizeof(line), "eval iter=%d n=%d loss=%.9e psnr=%.6f ssim=%.8f best=%.6f\n",
                      e.iteration, e.count, e.loss, e.psnr, e.ssim, e.best_psnr);
        os << line;
    }
    if (lr_decay_iteration >= 0) {
        std::snprintf(line, sizeof(line), "event lr_decay iter=%d\n", lr_decay_iteration);
        os << line;
    }
    for (const std::string& id : checkpoints) os << "checkpoint id=" << id << "\n";
    os << "final n=" << final_count << "\n";
}

}  // namespace igs
