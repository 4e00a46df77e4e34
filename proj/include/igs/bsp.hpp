#pragma once

#include <cstdint>
#include <vector>

#include "igs/gaussian.hpp"
#include "igs/image.hpp"
#include "igs/renderer.hpp"

namespace igs {

/// Axis-aligned rectangle in [0,1]^2. Blocks are half-open along each axis,
/// except that the far edge is closed when it touches the domain boundary.
struct Rect {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

    double extent_x() const { return x2 - x1; }
    double extent_y() const { return y2 - y1; }
    double area() const { return extent_x() * extent_y(); }

    bool contains_half_open(Vec2 p) const {
        const bool in_x = p.x >= x1 && (p.x < x2 || (x2 >= 1.0 && p.x <= x2));
        const bool in_y = p.y >= y1 && (p.y < y2 || (y2 >= 1.0 && p.y <= y2));
        return in_x && in_y;
    }
    bool contains_closed(Vec2 p) const { return p.x >= x1 && p.x <= x2 && p.y >= y1 && p.y <= y2; }
    bool intersects_closed(const Rect& o) const {
        return x1 <= o.x2 && o.x1 <= x2 && y1 <= o.y2 && o.y1 <= y2;
    }
};

/// Block rectangle extended by 1/4 of its own extent per side, clipped to the
/// domain. The candidate region for rendering that block's pixels.
Rect shell_of(const Rect& block);

/// Interior node of the alternating-axis split tree. Leaves reference a block.
struct BspNode {
    int axis = 0;       // 0 splits u, 1 splits v
    double line = 0.0;  // split coordinate; low child owns [.., line), high child [line, ..)
    int32_t low = -1;
    int32_t high = -1;
    int32_t block = -1;  // >= 0 for leaves
    Rect point_bbox;     // bbox of member positions in this subtree
};

/// Disjoint leaf blocks covering [0,1]^2, their shells, and per-rectangle
/// Gaussian membership. Partitions built in memory carry the split tree;
/// partitions reconstructed from serialized corners carry a grid locator.
struct BspPartition {
    std::vector<Rect> blocks;
    std::vector<Rect> shells;
    std::vector<std::vector<uint32_t>> block_members;  // ascending within each block
    std::vector<std::vector<uint32_t>> shell_members;  // ascending within each shell
    int n_max = 0;            // construction threshold; 0 when unknown (decoded)
    uint32_t source_size = 0;  // Gaussian count the partition refers to

    std::vector<BspNode> nodes;  // empty for reconstructed partitions
    int32_t root = -1;

    // Fallback locator over bare rectangles.
    int grid_dim = 0;
    std::vector<std::vector<uint32_t>> grid_cells;

    size_t block_count() const { return blocks.size(); }
    void build_grid_locator();
};

/// Recursive alternating-axis median splits until every leaf holds at most
/// n_max Gaussians. Deterministic; depth-0 split is vertical (divides u).
BspPartition build_partition(const GaussianSet& set, int n_max);

/// Rebuild a partition from bare block corners (the serialized form):
/// shells re-derived, memberships recomputed from the given set's positions.
BspPartition rebuild_partition(std::vector<Rect> blocks, const GaussianSet& set);

/// Index of the block containing x. Tree descent when the tree exists,
/// grid lookup otherwise.
int locate_block(const BspPartition& p, PixelCoord x);

/// render_topk restricted to the shell of the block containing x.
Color3 render_topk_blocked(const GaussianSet& set, const BspPartition& p, PixelCoord x, int k);
Color3 render_topk_blocked(const PreparedSet& ps, const BspPartition& p, PixelCoord x, int k);

/// Full-raster decode through the partition; OpenMP and serial variants.
ImageBuffer render_image_blocked(const GaussianSet& set, const BspPartition& p, int width, int height, int k);
ImageBuffer render_image_blocked_serial(const GaussianSet& set, const BspPartition& p, int width, int height,
                                        int k);

struct BenchRow {
    int n_max = 0;  // 0 = unpartitioned baseline
    int n_b = 0;
    double mean_ms_per_10k = 0.0;
    double std_ms = 0.0;
    double mean_candidates = 0.0;
};

struct BenchResult {
    BenchRow baseline;
    std::vector<BenchRow> rows;
};

/// Wall-clock timing of the blocked renderer over uniformly random pixels for
/// each n_max, plus the unpartitioned baseline. Single-threaded kernels so the
/// numbers reflect per-pixel work, not scheduling.
BenchResult bench_render(const GaussianSet& set, int pixels, const std::vector<int>& n_max_values,
                         uint64_t seed, int trials = 20, int warmup = 3);

}  // namespace igs
