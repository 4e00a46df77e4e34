// Compares the OpenMP render/backward kernels against their serial reference
// implementations, and the blocked renderer against the global one.

#include <chrono>
#include <cstdio>
#include <vector>

#include "igs/bsp.hpp"
#include "igs/renderer.hpp"
#include "igs/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

igs::GaussianSet random_set(size_t n, uint64_t seed) {
    igs::Rng rng(seed);
    igs::GaussianSet set;
    set.gaussians.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        igs::Gaussian2D g;
        g.mu = {rng.next_double(), rng.next_double()};
        g.theta = rng.next_range(0.0, 3.14159);
        g.scale = {rng.next_range(0.005, 0.05), rng.next_range(0.005, 0.05)};
        g.color = {rng.next_double(), rng.next_double(), rng.next_double()};
        set.gaussians.push_back(g);
    }
    return set;
}

template <typename F>
double time_ms(F&& f, int trials = 5) {
    double best = 1e300;
    for (int t = 0; t < trials; ++t) {
        const auto start = std::chrono::steady_clock::now();
        f();
        const auto stop = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
    }
    return best;
}

}  // namespace

int main() {
    const igs::GaussianSet set = random_set(8000, 7);
    const int W = 512, H = 512, k = igs::kDefaultTopK;

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP: disabled\n");
#endif

    const igs::BspPartition part = igs::build_partition(set, 64);
    std::printf("set: %zu Gaussians, render %dx%d, k=%d, blocks=%zu\n\n", set.size(), W, H, k,
                part.block_count());

    const double g_serial = time_ms([&] { (void)igs::render_image_serial(set, W, H, k); }, 3);
    const double g_par = time_ms([&] { (void)igs::render_image(set, W, H, k); }, 3);
    std::printf("%-28s %10.1f ms\n", "global render (serial)", g_serial);
    std::printf("%-28s %10.1f ms   %.2fx\n", "global render (OpenMP)", g_par, g_serial / g_par);

    const double b_serial = time_ms([&] { (void)igs::render_image_blocked_serial(set, part, W, H, k); });
    const double b_par = time_ms([&] { (void)igs::render_image_blocked(set, part, W, H, k); });
    std::printf("%-28s %10.1f ms   %.2fx vs global serial\n", "blocked render (serial)", b_serial,
                g_serial / b_serial);
    std::printf("%-28s %10.1f ms   %.2fx vs blocked serial\n", "blocked render (OpenMP)", b_par,
                b_serial / b_par);

    igs::Rng rng(99);
    std::vector<igs::PixelSample> samples(10000);
    for (auto& s : samples)
        s = {{rng.next_double(), rng.next_double()}, {rng.next_double(), rng.next_double(), rng.next_double()}};

    const double bw_serial = time_ms([&] { (void)igs::backward_serial(set, samples, k); });
    const double bw_par = time_ms([&] { (void)igs::backward(set, samples, k); });
    std::printf("%-28s %10.1f ms\n", "backward 10k samples (serial)", bw_serial);
    std::printf("%-28s %10.1f ms   %.2fx\n", "backward 10k samples (OpenMP)", bw_par, bw_serial / bw_par);
    return 0;
}
