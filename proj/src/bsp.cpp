#include "igs/bsp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "igs/error.hpp"
#include "igs/rng.hpp"

namespace igs {

Rect shell_of(const Rect& block) {
    const double ex = block.extent_x() * 0.25;
    const double ey = block.extent_y() * 0.25;
    Rect s{block.x1 - ex, block.y1 - ey, block.x2 + ex, block.y2 + ey};
    s.x1 = std::max(s.x1, 0.0);
    s.y1 = std::max(s.y1, 0.0);
    s.x2 = std::min(s.x2, 1.0);
    s.y2 = std::min(s.y2, 1.0);
    return s;
}

namespace {

struct Builder {
    const std::vector<Vec2>& mu;
    int n_max;
    BspPartition& out;

    int32_t build(Rect rect, std::vector<uint32_t> members, int depth) {
        const int32_t id = static_cast<int32_t>(out.nodes.size());
        out.nodes.emplace_back();
        out.nodes[id].point_bbox = point_bbox(members);

        if (static_cast<int>(members.size()) <= n_max) {
            std::sort(members.begin(), members.end());
            out.nodes[id].block = static_cast<int32_t>(out.blocks.size());
            out.blocks.push_back(rect);
            out.block_members.push_back(std::move(members));
            return id;
        }

        const int axis = depth % 2;  // 0: vertical line dividing u; 1: horizontal dividing v
        auto coord = [&](uint32_t i) { return axis == 0 ? mu[i].x : mu[i].y; };
        std::sort(members.begin(), members.end(), [&](uint32_t a, uint32_t b) {
            const double ca = coord(a), cb = coord(b);
            return ca < cb || (ca == cb && a < b);
        });

        const size_t n = members.size();
        const size_t half = n / 2;
        size_t pos = 0;
        double line = 0.0;
        bool forced = false;

        if (coord(members[half - 1]) < coord(members[half])) {
            pos = half;
        } else {
            // Coordinate ties straddle the middle; use the strict boundary
            // closest to an even split, preferring the lower side on a tie.
            size_t lo = 0, hi = 0;
            bool has_lo = false, has_hi = false;
            for (size_t j = half; j-- > 1;)
                if (coord(members[j - 1]) < coord(members[j])) {
                    lo = j;
                    has_lo = true;
                    break;
                }
            for (size_t j = half + 1; j < n; ++j)
                if (coord(members[j - 1]) < coord(members[j])) {
                    hi = j;
                    has_hi = true;
                    break;
                }
            if (has_lo && (!has_hi || half - lo <= hi - half))
                pos = lo;
            else if (has_hi)
                pos = hi;
            else
                forced = true;  // every coordinate identical along this axis
        }

        if (forced) {
            // Even index split. The line sits on the common coordinate so both
            // children's shells still contain the coincident positions.
            pos = half;
            line = coord(members[0]);
        } else {
            const double lo_c = coord(members[pos - 1]);
            const double hi_c = coord(members[pos]);
            line = 0.5 * (lo_c + hi_c);
            if (!(line > lo_c)) line = hi_c;  // adjacent doubles: keep the half-open rule consistent
        }

        std::vector<uint32_t> lower(members.begin(), members.begin() + pos);
        std::vector<uint32_t> upper(members.begin() + pos, members.end());
        members.clear();
        members.shrink_to_fit();

        Rect low_rect = rect, high_rect = rect;
        if (axis == 0) {
            low_rect.x2 = line;
            high_rect.x1 = line;
        } else {
            low_rect.y2 = line;
            high_rect.y1 = line;
        }

        out.nodes[id].axis = axis;
        out.nodes[id].line = line;
        const int32_t low_id = build(low_rect, std::move(lower), depth + 1);
        out.nodes[id].low = low_id;
        const int32_t high_id = build(high_rect, std::move(upper), depth + 1);
        out.nodes[id].high = high_id;
        return id;
    }

    Rect point_bbox(const std::vector<uint32_t>& members) const {
        Rect b{1.0, 1.0, 0.0, 0.0};
        for (uint32_t i : members) {
            b.x1 = std::min(b.x1, mu[i].x);
            b.y1 = std::min(b.y1, mu[i].y);
            b.x2 = std::max(b.x2, mu[i].x);
            b.y2 = std::max(b.y2, mu[i].y);
        }
        return b;
    }
};

void collect_shell_members(const BspPartition& p, const std::vector<Vec2>& mu, int32_t node_id,
                           const Rect& shell, std::vector<uint32_t>& out) {
    const BspNode& node = p.nodes[node_id];
    if (!shell.intersects_closed(node.point_bbox)) return;
    if (node.block >= 0) {
        for (uint32_t i : p.block_members[node.block])
            if (shell.contains_closed(mu[i])) out.push_back(i);
        return;
    }
    collect_shell_members(p, mu, node.low, shell, out);
    collect_shell_members(p, mu, node.high, shell, out);
}

std::vector<Vec2> positions(const GaussianSet& set) {
    std::vector<Vec2> mu(set.size());
    for (size_t i = 0; i < set.size(); ++i) mu[i] = set[i].mu;
    return mu;
}

}  // namespace

BspPartition build_partition(const GaussianSet& set, int n_max) {
    if (set.empty()) raise(ErrorKind::empty_set, "build_partition requires a non-empty GaussianSet");
    if (n_max < 1) raise(ErrorKind::invalid_parameter, "n_max must be >= 1");

    BspPartition p;
    p.n_max = n_max;
    p.source_size = static_cast<uint32_t>(set.size());

    const std::vector<Vec2> mu = positions(set);
    std::vector<uint32_t> all(set.size());
    std::iota(all.begin(), all.end(), 0u);

    Builder builder{mu, n_max, p};
    p.root = builder.build(Rect{0.0, 0.0, 1.0, 1.0}, std::move(all), 0);

    p.shells.reserve(p.blocks.size());
    p.shell_members.resize(p.blocks.size());
    for (size_t b = 0; b < p.blocks.size(); ++b) p.shells.push_back(shell_of(p.blocks[b]));
    for (size_t b = 0; b < p.blocks.size(); ++b) {
        collect_shell_members(p, mu, p.root, p.shells[b], p.shell_members[b]);
        std::sort(p.shell_members[b].begin(), p.shell_members[b].end());
    }
    return p;
}

void BspPartition::build_grid_locator() {
    const int nb = static_cast<int>(blocks.size());
    grid_dim = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(nb)))));
    grid_cells.assign(static_cast<size_t>(grid_dim) * grid_dim, {});
    auto cell_range = [&](double lo, double hi, int& c0, int& c1) {
        c0 = std::clamp(static_cast<int>(std::floor(lo * grid_dim)), 0, grid_dim - 1);
        c1 = std::clamp(static_cast<int>(std::ceil(hi * grid_dim)) - 1, 0, grid_dim - 1);
        if (c1 < c0) c1 = c0;
    };
    for (int b = 0; b < nb; ++b) {
        int cx0, cx1, cy0, cy1;
        cell_range(blocks[b].x1, blocks[b].x2, cx0, cx1);
        cell_range(blocks[b].y1, blocks[b].y2, cy0, cy1);
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx)
                grid_cells[static_cast<size_t>(cy) * grid_dim + cx].push_back(static_cast<uint32_t>(b));
    }
}

BspPartition rebuild_partition(std::vector<Rect> blocks, const GaussianSet& set) {
    if (blocks.empty()) raise(ErrorKind::invalid_parameter, "rebuild_partition requires at least one block");
    BspPartition p;
    p.blocks = std::move(blocks);
    p.source_size = static_cast<uint32_t>(set.size());
    p.shells.reserve(p.blocks.size());
    for (const Rect& b : p.blocks) p.shells.push_back(shell_of(b));
    p.build_grid_locator();

    p.block_members.resize(p.blocks.size());
    p.shell_members.resize(p.blocks.size());
    for (uint32_t i = 0; i < set.size(); ++i) {
        const int b = locate_block(p, {set[i].mu.x, set[i].mu.y});
        p.block_members[b].push_back(i);
    }
    // Shell membership is a plain rectangle test; corner quantization may
    // leave tiny gaps or overlaps between blocks, shells absorb them.
    for (size_t b = 0; b < p.blocks.size(); ++b)
        for (uint32_t i = 0; i < set.size(); ++i)
            if (p.shells[b].contains_closed(set[i].mu)) p.shell_members[b].push_back(i);
    return p;
}

int locate_block(const BspPartition& p, PixelCoord x) {
    if (!p.nodes.empty()) {
        int32_t id = p.root;
        while (p.nodes[id].block < 0) {
            const BspNode& n = p.nodes[id];
            const double c = n.axis == 0 ? x.u : x.v;
            id = c < n.line ? n.low : n.high;
        }
        return p.nodes[id].block;
    }

    // Grid path: first containing block in index order; if quantized corners
    // left x in a gap, fall back to the nearest candidate rectangle.
    const Vec2 v{x.u, x.v};
    const int cx = std::clamp(static_cast<int>(x.u * p.grid_dim), 0, p.grid_dim - 1);
    const int cy = std::clamp(static_cast<int>(x.v * p.grid_dim), 0, p.grid_dim - 1);
    const auto& cands = p.grid_cells[static_cast<size_t>(cy) * p.grid_dim + cx];
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (uint32_t b : cands) {
        const Rect& r = p.blocks[b];
        if (r.contains_half_open(v)) return static_cast<int>(b);
        const double dx = std::max({r.x1 - v.x, v.x - r.x2, 0.0});
        const double dy = std::max({r.y1 - v.y, v.y - r.y2, 0.0});
        const double d = std::max(dx, dy);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(b);
        }
    }
    if (best >= 0) return best;
    // Empty cell can only arise from degenerate quantized geometry; scan all.
    for (size_t b = 0; b < p.blocks.size(); ++b) {
        if (p.blocks[b].contains_half_open(v)) return static_cast<int>(b);
        const Rect& r = p.blocks[b];
        const double dx = std::max({r.x1 - v.x, v.x - r.x2, 0.0});
        const double dy = std::max({r.y1 - v.y, v.y - r.y2, 0.0});
        const double d = std::max(dx, dy);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(b);
        }
    }
    return best;
}

namespace {

Color3 blocked_pixel(const PreparedSet& ps, const BspPartition& p, Vec2 x, int k,
                     std::vector<TopKEntry>& entries) {
    const int b = locate_block(p, {x.x, x.y});
    const auto& members = p.shell_members[b];
    const int kk = static_cast<int>(std::min<size_t>(k, ps.size()));
    if (static_cast<int>(entries.size()) < kk) entries.resize(kk);
    const int n = select_top_k_entries(ps, {members.data(), members.size()}, x, kk, entries.data());
    return blend_entries(ps, entries.data(), n).color;
}

void check_partition(const PreparedSet& ps, const BspPartition& p) {
    if (p.blocks.empty()) raise(ErrorKind::invalid_parameter, "partition has no blocks");
    if (p.source_size != ps.size())
        raise(ErrorKind::invalid_parameter, "stale partition: Gaussian count changed since construction");
}

inline Color3 clamp01(Color3 c) {
    auto cl = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
    return {cl(c.r), cl(c.g), cl(c.b)};
}

ImageBuffer render_image_blocked_impl(const GaussianSet& set, const BspPartition& p, int width, int height,
                                      int k, bool parallel) {
    if (set.empty()) raise(ErrorKind::empty_set, "render requires a non-empty GaussianSet");
    if (width < 1 || height < 1) raise(ErrorKind::invalid_parameter, "render target must be at least 1x1");
    if (k < 1) raise(ErrorKind::invalid_parameter, "k must be >= 1");
    PreparedSet ps(set);
    check_partition(ps, p);
    ImageBuffer img(width, height);

    auto render_row = [&](std::vector<TopKEntry>& entries, int h) {
        for (int w = 0; w < width; ++w) {
            const PixelCoord pc = pixel_center(h, w, height, width);
            img.set_pixel(h, w, clamp01(blocked_pixel(ps, p, {pc.u, pc.v}, k, entries)));
        }
    };

    if (parallel) {
#pragma omp parallel
        {
            std::vector<TopKEntry> entries;
#pragma omp for schedule(static)
            for (int h = 0; h < height; ++h) render_row(entries, h);
        }
    } else {
        std::vector<TopKEntry> entries;
        for (int h = 0; h < height; ++h) render_row(entries, h);
    }
    return img;
}

}  // namespace

Color3 render_topk_blocked(const PreparedSet& ps, const BspPartition& p, PixelCoord x, int k) {
    if (ps.size() == 0) raise(ErrorKind::empty_set, "render requires a non-empty GaussianSet");
    if (k < 1) raise(ErrorKind::invalid_parameter, "k must be >= 1");
    check_partition(ps, p);
    std::vector<TopKEntry> entries;
    return blocked_pixel(ps, p, {x.u, x.v}, k, entries);
}

Color3 render_topk_blocked(const GaussianSet& set, const BspPartition& p, PixelCoord x, int k) {
    PreparedSet ps(set);
    return render_topk_blocked(ps, p, x, k);
}

ImageBuffer render_image_blocked(const GaussianSet& set, const BspPartition& p, int width, int height, int k) {
    return render_image_blocked_impl(set, p, width, height, k, true);
}

ImageBuffer render_image_blocked_serial(const GaussianSet& set, const BspPartition& p, int width, int height,
                                        int k) {
    return render_image_blocked_impl(set, p, width, height, k, false);
}

BenchResult bench_render(const GaussianSet& set, int pixels, const std::vector<int>& n_max_values,
                         uint64_t seed, int trials, int warmup) {
    if (set.empty()) raise(ErrorKind::empty_set, "bench requires a non-empty GaussianSet");
    if (pixels < 1) raise(ErrorKind::invalid_parameter, "pixel count must be >= 1");

    Rng rng(seed);
    std::vector<Vec2> xs(pixels);
    for (auto& x : xs) x = {rng.next_double(), rng.next_double()};

    PreparedSet ps(set);
    const int k = kDefaultTopK;
    const double to_ms_per_10k = 1e-6 * 10000.0 / pixels;  // ns -> ms, scaled to 10k pixels

    // The checksum keeps the optimizer honest.
    volatile double sink = 0.0;

    auto time_trials = [&](auto&& body) {
        std::vector<double> ms(trials);
        for (int t = 0; t < warmup; ++t) body();
        for (int t = 0; t < trials; ++t) {
            const auto start = std::chrono::steady_clock::now();
            body();
            const auto stop = std::chrono::steady_clock::now();
            ms[t] = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count() * to_ms_per_10k;
        }
        double mean = 0.0;
        for (double v : ms) mean += v;
        mean /= trials;
        double var = 0.0;
        for (double v : ms) var += (v - mean) * (v - mean);
        return std::pair<double, double>{mean, std::sqrt(var / trials)};
    };

    BenchResult result;
    {
        std::vector<TopKEntry> entries(std::min<size_t>(k, ps.size()));
        auto [mean, sd] = time_trials([&] {
            double acc = 0.0;
            for (const Vec2& x : xs) {
                const int n = select_top_k_entries(ps, ps.all_indices(), x, k, entries.data());
                acc += blend_entries(ps, entries.data(), n).color.r;
            }
            sink = sink + acc;
        });
        result.baseline = {0, 0, mean, sd, static_cast<double>(set.size())};
    }

    for (int n_max : n_max_values) {
        const BspPartition p = build_partition(set, n_max);
        double cand_sum = 0.0;
        for (const Vec2& x : xs) cand_sum += p.shell_members[locate_block(p, {x.x, x.y})].size();

        std::vector<TopKEntry> entries(std::min<size_t>(k, ps.size()));
        auto [mean, sd] = time_trials([&] {
            double acc = 0.0;
            for (const Vec2& x : xs) acc += blocked_pixel(ps, p, x, k, entries).r;
            sink = sink + acc;
        });
        result.rows.push_back({n_max, static_cast<int>(p.block_count()), mean, sd,
                               cand_sum / pixels});
    }
    (void)sink;
    return result;
}

}  // namespace igs
