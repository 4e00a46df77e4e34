#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "igs/error.hpp"
#include "igs/fit.hpp"
#include "igs/metrics.hpp"
#include "igs/renderer.hpp"
#include "test_support.hpp"

using namespace igs;

namespace {

bool sets_identical(const GaussianSet& a, const GaussianSet& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].mu.x != b[i].mu.x || a[i].mu.y != b[i].mu.y) return false;
        if (a[i].theta != b[i].theta) return false;
        if (a[i].scale.x != b[i].scale.x || a[i].scale.y != b[i].scale.y) return false;
        if (a[i].color.r != b[i].color.r || a[i].color.g != b[i].color.g || a[i].color.b != b[i].color.b)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("defaults mirror the reference schedule") {
    const FitConfig c;
    CHECK(c.k == 10);
    CHECK(c.lambda_init == 0.3);
    CHECK(c.lambda_opt == 0.8);
    CHECK(c.iterations == 50000);
    CHECK(c.samples_per_iter == 10000);
    CHECK(c.lr.mu == 2e-4);
    CHECK(c.lr.color == 2e-3);
    CHECK(c.lr.scale == 1e-3);
    CHECK(c.lr.theta == 1e-3);
    CHECK(c.eval_interval == 1000);
    CHECK(c.plateau_patience == 3);
    CHECK(c.lr_decay == 0.1);
    CHECK(c.warmup_iters == 10000);
    CHECK(c.densify_interval == 5000);
}

TEST_CASE("budget below 8 is rejected") {
    const ImageBuffer img = test::photo_like_image(32, 32, 6001);
    FitConfig c;
    c.budget = 7;
    c.iterations = 10;
    CHECK_THROWS_AS(fit(img, c), Error);
}

TEST_CASE("constant-color target hits 50 dB within 2k iterations") {
    ImageBuffer img(64, 64);
    for (int h = 0; h < 64; ++h)
        for (int w = 0; w < 64; ++w) img.set_pixel(h, w, {0.35, 0.6, 0.15});

    FitConfig c;
    c.budget = 8;
    c.iterations = 2000;
    c.samples_per_iter = 256;
    c.eval_interval = 100;
    c.seed = 7;
    const auto [set, report] = fit(img, c);
    REQUIRE(!report.evals.empty());
    CHECK(report.evals.back().best_psnr >= 50.0);
}

TEST_CASE("densification schedule, counts and checkpoints") {
    const ImageBuffer img = test::photo_like_image(48, 48, 6002);
    FitConfig c;
    c.budget = 40;
    c.iterations = 120;
    c.samples_per_iter = 128;
    c.eval_interval = 40;
    c.warmup_iters = 40;
    c.densify_interval = 20;
    c.seed = 11;

    std::vector<std::pair<int, size_t>> seen;  // (iteration, count at checkpoint)
    const auto [set, report] = fit(img, c, [&](int, int iteration, const std::string&, const GaussianSet& s) {
        seen.push_back({iteration, s.size()});
    });

    // init 20, +5 at iterations 40/60/80/100, final 40
    CHECK(set.size() == 40);
    CHECK(report.final_count == 40);
    REQUIRE(seen.size() == 5);
    CHECK(seen[0] == std::pair<int, size_t>{40, 20});
    CHECK(seen[1] == std::pair<int, size_t>{60, 25});
    CHECK(seen[2] == std::pair<int, size_t>{80, 30});
    CHECK(seen[3] == std::pair<int, size_t>{100, 35});
    CHECK(seen[4] == std::pair<int, size_t>{120, 40});
    CHECK(report.checkpoints.size() == 5);

    // Count is non-decreasing in the evaluation history and bounded by the schedule.
    int prev = 0;
    for (const auto& e : report.evals) {
        CHECK(e.count >= prev);
        prev = e.count;
        CHECK(e.count <= 40);
    }
}

TEST_CASE("best PSNR is a running maximum and constraints hold throughout") {
    const ImageBuffer img = test::vector_like_image(48, 48, 6003);
    FitConfig c;
    c.budget = 32;
    c.iterations = 300;
    c.samples_per_iter = 256;
    c.eval_interval = 50;
    c.warmup_iters = 100;
    c.densify_interval = 50;
    c.seed = 13;
    const auto [set, report] = fit(img, c);

    double best = -1e300;
    for (const auto& e : report.evals) {
        CHECK(e.best_psnr >= best);
        best = e.best_psnr;
        CHECK(e.best_psnr >= e.psnr - 1e-12);
    }
    for (const auto& g : set.gaussians) {
        const Gaussian2D cg = constrain(g);
        CHECK(cg.mu.x == g.mu.x);
        CHECK(cg.theta == g.theta);
        CHECK(cg.scale.x == g.scale.x);
        CHECK(cg.color.r == g.color.r);
    }
}

TEST_CASE("identical seeds give bit-identical fits and reports") {
    const ImageBuffer img = test::texture_like_image(40, 40, 6004);
    FitConfig c;
    c.budget = 24;
    c.iterations = 150;
    c.samples_per_iter = 200;
    c.eval_interval = 50;
    c.warmup_iters = 50;
    c.densify_interval = 25;
    c.seed = 99;

    const auto [set_a, rep_a] = fit(img, c);
    const auto [set_b, rep_b] = fit(img, c);
    CHECK(sets_identical(set_a, set_b));

    std::ostringstream la, lb;
    rep_a.write(la, c);
    rep_b.write(lb, c);
    CHECK(la.str() == lb.str());
    CHECK(!la.str().empty());
}

TEST_CASE("different seeds explore different initializations") {
    const ImageBuffer img = test::photo_like_image(40, 40, 6005);
    FitConfig c;
    c.budget = 24;
    c.iterations = 5;
    c.samples_per_iter = 64;
    c.seed = 1;
    FitConfig c2 = c;
    c2.seed = 2;
    const auto [set_a, rep_a] = fit(img, c);
    const auto [set_b, rep_b] = fit(img, c2);
    CHECK(!sets_identical(set_a, set_b));
}
