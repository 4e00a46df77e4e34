#include "igs/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "igs/error.hpp"

namespace igs {

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    if (!a.same_shape(b)) raise(ErrorKind::dimension_mismatch, "psnr: image dimensions differ");
    double se = 0.0, comp = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (size_t i = 0; i < da.size(); ++i) {
        const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
        const double y = d * d - comp;
        const double t = se + y;
        comp = (t - se) - y;
        se = t;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(da.size());
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWin = 11;

std::array<double, kWin> ssim_window() {
    std::array<double, kWin> w{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double d = i - (kWin - 1) / 2.0;
        w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable filtering with replicate padding, one channel.
void filter(const std::vector<double>& src, int W, int H, const std::array<double, kWin>& win,
            std::vector<double>& tmp, std::vector<double>& dst) {
    const int r = kWin / 2;
    auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

    tmp.resize(src.size());
    dst.resize(src.size());
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i) acc += win[i] * src[static_cast<size_t>(h) * W + clampi(w - r + i, W - 1)];
            tmp[static_cast<size_t>(h) * W + w] = acc;
        }
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i) acc += win[i] * tmp[static_cast<size_t>(clampi(h - r + i, H - 1)) * W + w];
            dst[static_cast<size_t>(h) * W + w] = acc;
        }
}

}  // namespace

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
    if (!a.same_shape(b)) raise(ErrorKind::dimension_mismatch, "ssim: image dimensions differ");
    const int W = a.width(), H = a.height();
    if (W < kWin || H < kWin) raise(ErrorKind::invalid_parameter, "ssim: image smaller than the 11x11 window");

    static const std::array<double, kWin> win = ssim_window();
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    const size_t n = static_cast<size_t>(W) * H;

    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    std::vector<double> mx, my, mxx, myy, mxy, tmp;

    double channel_sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                const size_t i = static_cast<size_t>(h) * W + w;
                x[i] = a.at(h, w, c);
                y[i] = b.at(h, w, c);
                xx[i] = x[i] * x[i];
                yy[i] = y[i] * y[i];
                xy[i] = x[i] * y[i];
            }
        filter(x, W, H, win, tmp, mx);
        filter(y, W, H, win, tmp, my);
        filter(xx, W, H, win, tmp, mxx);
        filter(yy, W, H, win, tmp, myy);
        filter(xy, W, H, win, tmp, mxy);

        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double var_x = mxx[i] - mx[i] * mx[i];
            const double var_y = myy[i] - my[i] * my[i];
            const double cov = mxy[i] - mx[i] * my[i];
            const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
            const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (var_x + var_y + c2);
            acc += num / den;
        }
        channel_sum += acc / static_cast<double>(n);
    }
    return channel_sum / 3.0;
}

}  // namespace igs
