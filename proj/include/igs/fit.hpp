#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "igs/adam.hpp"
#include "igs/gaussian.hpp"
#include "igs/image.hpp"

namespace igs {

/// Training schedule. Defaults reproduce the reference configuration:
/// half the budget at initialization, four error-guided additions of an
/// eighth each, L1 loss on 10k sampled pixels per iteration.
struct FitConfig {
    int budget = 0;  // target Gaussian count; final count is budget/2 + 4*(budget/8) (floor division)
    int k = kDefaultTopK;
    double lambda_init = 0.3;
    double lambda_opt = 0.8;
    int iterations = 50000;
    int samples_per_iter = 10000;
    LearningRates lr;
    int eval_interval = 1000;
    int plateau_patience = 3;
    double lr_decay = 0.1;  // multiplier, applied at most once
    int warmup_iters = 10000;
    int densify_interval = 5000;
    uint64_t seed = 0;
};

struct EvalRecord {
    int iteration = 0;
    int count = 0;
    double loss = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    double best_psnr = 0.0;  // running maximum
};

struct FitReport {
    std::vector<EvalRecord> evals;
    std::vector<std::string> checkpoints;  // LoD checkpoint identifiers, in emission order
    int lr_decay_iteration = -1;           // -1 when the decay never fired
    int final_count = 0;

    /// Line-oriented log: one `eval` record per evaluation plus checkpoint
    /// and event lines. Contains no timestamps, so identical runs produce
    /// byte-identical logs.
    void write(std::ostream& os, const FitConfig& config) const;
};

/// Called at the end of every densification stage (just before new Gaussians
/// are added, and once at the end of training) with the stage's final set.
using CheckpointFn = std::function<void(int stage, int iteration, const std::string& id, const GaussianSet& set)>;

/// Full encoder: content-adaptive initialization, importance-sampled L1
/// optimization with Adam, periodic evaluation with one-shot LR decay on
/// plateau, and error-guided densification. Deterministic for a fixed config.
std::pair<GaussianSet, FitReport> fit(const ImageBuffer& target, const FitConfig& config,
                                      const CheckpointFn& on_checkpoint = {});

}  // namespace igs
