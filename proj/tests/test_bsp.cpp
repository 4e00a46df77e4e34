#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bsp_checks.hpp"
#include "igs/bsp.hpp"
#include "igs/codec.hpp"
#include "igs/error.hpp"
#include "test_support.hpp"

using namespace igs;

namespace {

GaussianSet set_at(const std::vector<Vec2>& mus) {
    GaussianSet set;
    for (const Vec2& m : mus) {
        Gaussian2D g;
        g.mu = m;
        g.scale = {0.05, 0.05};
        g.color = {0.5, 0.5, 0.5};
        set.gaussians.push_back(g);
    }
    return set;
}

// Fuzz generator mixing uniform positions with coincident clusters.
GaussianSet fuzz_set(Rng& rng) {
    const size_t n = 1 + rng.next_index(5000);
    GaussianSet set;
    set.gaussians.reserve(n);
    const double cluster_frac = rng.next_double();
    Vec2 shared{rng.next_double(), rng.next_double()};
    for (size_t i = 0; i < n; ++i) {
        Gaussian2D g;
        if (rng.next_double() < cluster_frac) {
            g.mu = shared;  // exact coincidence
            if (rng.next_double() < 0.05) shared = {rng.next_double(), rng.next_double()};
        } else {
            g.mu = {rng.next_double(), rng.next_double()};
        }
        g.scale = {0.02, 0.02};
        g.color = {0.5, 0.5, 0.5};
        set.gaussians.push_back(g);
    }
    return set;
}

}  // namespace

TEST_CASE("shell_of arithmetic") {
    const Rect shell = shell_of({0.5, 0.5, 0.75, 1.0});
    CHECK(shell.x1 == doctest::Approx(0.4375).epsilon(1e-15));
    CHECK(shell.y1 == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(shell.x2 == doctest::Approx(0.8125).epsilon(1e-15));
    CHECK(shell.y2 == 1.0);  // clipped at the domain edge
}

TEST_CASE("small set stays in a single root block") {
    const GaussianSet set = test::random_set(5, 5001);
    const BspPartition p = build_partition(set, 8);
    REQUIRE(p.block_count() == 1);
    CHECK(p.blocks[0].x1 == 0.0);
    CHECK(p.blocks[0].y1 == 0.0);
    CHECK(p.blocks[0].x2 == 1.0);
    CHECK(p.blocks[0].y2 == 1.0);
    CHECK(p.shells[0].x2 == 1.0);
    CHECK(p.block_members[0].size() == 5);
    CHECK(p.shell_members[0].size() == 5);
}

TEST_CASE("four corner clusters split into four singleton blocks") {
    const GaussianSet set = set_at({{0.2, 0.22}, {0.78, 0.21}, {0.24, 0.79}, {0.81, 0.77}});
    const BspPartition p = build_partition(set, 1);
    REQUIRE(p.block_count() == 4);
    for (size_t b = 0; b < 4; ++b) {
        REQUIRE(p.block_members[b].size() == 1);
        const Vec2 mu = set[p.block_members[b][0]].mu;
        CHECK(p.blocks[b].contains_half_open(mu));
    }
    CHECK(test::check_disjoint_cover(p));
    CHECK(test::check_membership_partition(p, set.size()));
}

TEST_CASE("locate_block") {
    SUBCASE("single block partition always returns 0") {
        const GaussianSet set = test::random_set(4, 5002);
        const BspPartition p = build_partition(set, 10);
        Rng rng(5003);
        for (int i = 0; i < 100; ++i) CHECK(locate_block(p, {rng.next_double(), rng.next_double()}) == 0);
    }
    SUBCASE("a point on the split line lands on the greater-coordinate side") {
        const GaussianSet set = set_at({{0.25, 0.5}, {0.75, 0.5}});
        const BspPartition p = build_partition(set, 1);
        REQUIRE(p.block_count() == 2);
        const double line = p.blocks[0].x2;  // depth-0 split divides u
        const int at_line = locate_block(p, {line, 0.5});
        const int below = locate_block(p, {std::nextafter(line, 0.0), 0.5});
        CHECK(at_line != below);
        CHECK(p.blocks[at_line].x1 == line);
    }
    SUBCASE("matches a linear scan over block rectangles") {
        const GaussianSet set = test::random_set(800, 5004);
        const BspPartition p = build_partition(set, 16);
        Rng rng(5005);
        for (int i = 0; i < 1000; ++i) {
            const PixelCoord x{rng.next_double(), rng.next_double()};
            int want = -1;
            for (size_t b = 0; b < p.block_count(); ++b)
                if (p.blocks[b].contains_half_open({x.u, x.v})) {
                    want = static_cast<int>(b);
                    break;
                }
            REQUIRE(want >= 0);
            CHECK(locate_block(p, x) == want);
        }
    }
}

TEST_CASE("structural invariants over fuzzed sets") {
    Rng rng(5006);
    for (int trial = 0; trial < 60; ++trial) {
        const GaussianSet set = fuzz_set(rng);
        const int n_max = 1 + static_cast<int>(rng.next_index(64));
        const BspPartition p = build_partition(set, n_max);
        REQUIRE(test::check_disjoint_cover(p));
        REQUIRE(test::check_membership_partition(p, set.size()));
        REQUIRE(test::check_count_bound(p, n_max));
        REQUIRE(test::check_shell_containment(p, set));
        REQUIRE(test::check_shell_members_exact(p, set));
    }
}

TEST_CASE("fully coincident positions still partition and terminate") {
    GaussianSet set = set_at(std::vector<Vec2>(257, Vec2{0.5, 0.5}));
    const BspPartition p = build_partition(set, 4);
    CHECK(test::check_membership_partition(p, set.size()));
    CHECK(test::check_count_bound(p, 4));
    CHECK(test::check_shell_containment(p, set));
    CHECK(test::check_disjoint_cover(p));
}

TEST_CASE("single-block partition renders bit-identically to the global renderer") {
    const GaussianSet set = test::random_set(200, 5007);
    const BspPartition p = build_partition(set, static_cast<int>(set.size()));
    REQUIRE(p.block_count() == 1);
    const ImageBuffer blocked = render_image_blocked(set, p, 64, 48, 10);
    const ImageBuffer global = render_image(set, 64, 48, 10);
    for (size_t i = 0; i < global.data().size(); ++i) CHECK(blocked.data()[i] == global.data()[i]);
}

TEST_CASE("clustered sets with wide gaps render identically through shells") {
    // Four tight clusters; every test pixel sits near one cluster, so its
    // global top-k lies inside the shell of its block.
    Rng rng(5008);
    GaussianSet set;
    const Vec2 centers[4] = {{0.15, 0.15}, {0.85, 0.15}, {0.15, 0.85}, {0.85, 0.85}};
    for (const Vec2& c : centers)
        for (int i = 0; i < 25; ++i) {
            Gaussian2D g;
            g.mu = {c.x + rng.next_range(-0.04, 0.04), c.y + rng.next_range(-0.04, 0.04)};
            g.scale = {0.02, 0.02};
            g.color = {rng.next_double(), rng.next_double(), rng.next_double()};
            set.gaussians.push_back(g);
        }
    const BspPartition p = build_partition(set, 25);
    const int k = 5;
    PreparedSet ps(set);
    int compared = 0;
    for (int t = 0; t < 400; ++t) {
        const Vec2 c = {centers[t % 4].x + rng.next_range(-0.06, 0.06),
                        centers[t % 4].y + rng.next_range(-0.06, 0.06)};
        // Premise: the global selection must lie inside the pixel's shell.
        const TopKSelection sel = select_top_k(set, {c.x, c.y}, k);
        const auto& members = p.shell_members[locate_block(p, {c.x, c.y})];
        const bool premise = std::all_of(sel.indices.begin(), sel.indices.end(), [&](uint32_t i) {
            return std::binary_search(members.begin(), members.end(), i);
        });
        if (!premise) continue;
        const Color3 a = render_topk(set, {c.x, c.y}, k);
        const Color3 b = render_topk_blocked(ps, p, {c.x, c.y}, k);
        CHECK(a.r == b.r);
        CHECK(a.g == b.g);
        CHECK(a.b == b.b);
        ++compared;
    }
    CHECK(compared > 350);
}

TEST_CASE("blocked and parallel blocked renders agree with the serial reference") {
    const GaussianSet set = test::random_set(500, 5009);
    const BspPartition p = build_partition(set, 32);
    const ImageBuffer a = render_image_blocked(set, p, 80, 64, 10);
    const ImageBuffer b = render_image_blocked_serial(set, p, 80, 64, 10);
    for (size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("stale partitions are rejected") {
    GaussianSet set = test::random_set(50, 5010);
    const BspPartition p = build_partition(set, 8);
    set.gaussians.push_back(set.gaussians.front());
    CHECK_THROWS_AS(render_topk_blocked(set, p, {0.5, 0.5}, 10), Error);
    CHECK_THROWS_AS(render_image_blocked(set, p, 16, 16, 10), Error);
}

TEST_CASE("candidate counts track 9N/(4 N_b) on uniform sets") {
    const GaussianSet set = test::random_set(2000, 5011, 0.01, 0.05);
    Rng rng(5012);
    for (int n_max : {500, 125, 32}) {
        const BspPartition p = build_partition(set, n_max);
        double cand = 0.0;
        const int pixels = 2000;
        for (int i = 0; i < pixels; ++i)
            cand += static_cast<double>(
                p.shell_members[locate_block(p, {rng.next_double(), rng.next_double()})].size());
        cand /= pixels;
        const double predicted = 9.0 * 2000.0 / (4.0 * static_cast<double>(p.block_count()));
        CHECK(cand > 0.5 * predicted);
        CHECK(cand < 1.5 * predicted);
    }
}

TEST_CASE("partitions rebuilt from quantized corners keep rendering coherently") {
    // Small scales: shell filtering presumes the locality that trained sets
    // exhibit, so the random stand-in must be local too.
    const GaussianSet raw = test::random_set(1500, 5013, 0.005, 0.05);
    GaussianSet set = raw;
    constrain_all(set);
    const BspPartition built = build_partition(set, 64);
    const auto bytes = encode(set, &built, 128, 128, 10);
    const Decoded d = decode(bytes);
    REQUIRE(d.partition.has_value());
    REQUIRE(d.partition->block_count() == built.block_count());

    // Membership after the rebuild is exactly the rectangle test.
    CHECK(test::check_membership_partition(*d.partition, d.set.size()));
    CHECK(test::check_shell_members_exact(*d.partition, d.set));

    // The rebuilt locate agrees with the tree locate away from quantized edges.
    Rng rng(5014);
    int agree = 0, total = 0;
    for (int i = 0; i < 2000; ++i) {
        const PixelCoord x{rng.next_double(), rng.next_double()};
        if (locate_block(built, x) == locate_block(*d.partition, x)) ++agree;
        ++total;
    }
    CHECK(agree > total * 95 / 100);

    // And the rebuilt partition renders close to the exact global render.
    const ImageBuffer a = render_image_blocked(d.set, *d.partition, 96, 96, 10);
    const ImageBuffer b = render_image(d.set, 96, 96, 10);
    double mad = 0.0;
    for (size_t i = 0; i < a.data().size(); ++i) mad += std::abs(double(a.data()[i]) - double(b.data()[i]));
    mad /= static_cast<double>(a.data().size());
    CHECK(mad < 0.01);
}
