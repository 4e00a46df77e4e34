#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "igs/bsp.hpp"
#include "igs/codec.hpp"
#include "igs/error.hpp"
#include "igs/renderer.hpp"
#include "test_support.hpp"

using namespace igs;

namespace {

// Independent binary16 conversion oracle built on frexp/rint arithmetic
// instead of bit manipulation. Finite inputs only.
uint16_t half_oracle(float f) {
    const uint16_t sign = std::signbit(f) ? 0x8000 : 0x0000;
    const double mag = std::abs(static_cast<double>(f));
    if (mag == 0.0) return sign;

    int e2;
    (void)std::frexp(mag, &e2);  // mag = m * 2^e2, m in [0.5, 1)
    const int unbiased = e2 - 1;

    if (unbiased < -14) {
        // Subnormal target: units of 2^-24. Scaling by a power of two is
        // exact; rint applies the default round-half-even.
        const double q = std::rint(std::ldexp(mag, 24));
        if (q >= 1024.0) return sign | 0x0400;  // rounded up into the normal range
        return sign | static_cast<uint16_t>(q);
    }

    double q = std::rint(std::ldexp(mag, 10 - unbiased));  // in [1024, 2048]
    int exp = unbiased;
    if (q >= 2048.0) {
        q = 1024.0;
        ++exp;
    }
    if (exp > 15) return sign | 0x7c00;  // overflow to infinity
    return sign | static_cast<uint16_t>((exp + 15) << 10) | static_cast<uint16_t>(q - 1024.0);
}

GaussianSet constrained_random_set(size_t n, uint64_t seed) {
    GaussianSet set = test::random_set(n, seed);
    constrain_all(set);
    return set;
}

}  // namespace

TEST_CASE("binary16 conversion") {
    SUBCASE("known values") {
        CHECK(float_to_half(0.0f) == 0x0000);
        CHECK(float_to_half(-0.0f) == 0x8000);
        CHECK(float_to_half(1.0f) == 0x3c00);
        CHECK(float_to_half(-2.0f) == 0xc000);
        CHECK(float_to_half(65504.0f) == 0x7bff);
        CHECK(half_to_float(0x3c00) == 1.0f);
        CHECK(half_to_float(0x3555) == doctest::Approx(0.333251953125).epsilon(1e-12));
        CHECK(half_to_float(0x0001) == doctest::Approx(5.960464477539063e-8).epsilon(1e-12));
    }
    SUBCASE("round-trip through float is the identity on every finite half") {
        for (uint32_t bits = 0; bits < 0x10000; ++bits) {
            const uint16_t h = static_cast<uint16_t>(bits);
            if (((h >> 10) & 0x1f) == 0x1f) continue;  // inf/nan patterns
            CHECK(float_to_half(half_to_float(h)) == h);
        }
    }
    SUBCASE("agrees with the arithmetic oracle on random floats") {
        Rng rng(3001);
        for (int i = 0; i < 200000; ++i) {
            // Log-uniform magnitudes across normals and subnormals.
            const double mag = std::pow(10.0, rng.next_range(-9.0, 4.8));
            const float f = static_cast<float>(rng.next_double() < 0.5 ? -mag : mag);
            CHECK(float_to_half(f) == half_oracle(f));
        }
    }
    SUBCASE("agrees with the oracle on the codec's actual parameter ranges") {
        Rng rng(3002);
        for (int i = 0; i < 100000; ++i) {
            const float f = static_cast<float>(rng.next_range(0.0, 2.0));
            CHECK(float_to_half(f) == half_oracle(f));
        }
    }
}

TEST_CASE("encode layout and sizes") {
    SUBCASE("8000 Gaussians, no partition: 128020 bytes, 128000 payload") {
        const GaussianSet set = constrained_random_set(8000, 3003);
        const auto bytes = encode(set, nullptr, 2048, 2048, 10);
        CHECK(bytes.size() == 128020);
        const SizeReport sr = size_report(8000, 0, 2048, 2048);
        CHECK(sr.payload_bytes == 128000);
        CHECK(std::abs(sr.bpp - 0.244) <= 0.0005);
    }
    SUBCASE("1000 Gaussians: 16000 payload bytes, bpp near 0.031") {
        const SizeReport sr = size_report(1000, 0, 2048, 2048);
        CHECK(sr.payload_bytes == 16000);
        CHECK(std::abs(sr.bpp - 0.031) <= 0.0005);
        CHECK(sr.bpp == doctest::Approx(16000.0 * 8.0 / (2048.0 * 2048.0)).epsilon(1e-12));
    }
    SUBCASE("block table adds exactly 8 bytes per block") {
        const GaussianSet set = constrained_random_set(300, 3004);
        const BspPartition p = build_partition(set, 16);
        const auto bytes = encode(set, &p, 512, 512, 10);
        CHECK(bytes.size() == 20 + 16 * 300 + 8 * p.block_count());
        const SizeReport sr = size_report(300, static_cast<uint32_t>(p.block_count()), 512, 512);
        CHECK(sr.block_bytes == 8 * p.block_count());
    }
    SUBCASE("length formula holds over fuzzed sizes") {
        Rng rng(3005);
        for (int i = 0; i < 100; ++i) {
            const size_t n = 1 + rng.next_index(400);
            const GaussianSet set = constrained_random_set(n, 3100 + i);
            if (rng.next_double() < 0.5) {
                const auto bytes = encode(set, nullptr, 64, 64, 10);
                CHECK(bytes.size() == 20 + 16 * n);
            } else {
                const BspPartition p = build_partition(set, 1 + static_cast<int>(rng.next_index(32)));
                const auto bytes = encode(set, &p, 64, 64, 10);
                CHECK(bytes.size() == 20 + 16 * n + 8 * p.block_count());
            }
        }
    }
}

TEST_CASE("decode") {
    const GaussianSet set = constrained_random_set(120, 3006);
    const BspPartition p = build_partition(set, 16);
    const auto bytes = encode(set, &p, 256, 192, 7);

    SUBCASE("header fields round-trip") {
        const Decoded d = decode(bytes);
        CHECK(d.width == 256);
        CHECK(d.height == 192);
        CHECK(d.k == 7);
        CHECK(d.set.size() == 120);
        REQUIRE(d.partition.has_value());
        CHECK(d.partition->block_count() == p.block_count());
    }
    SUBCASE("parameters equal their binary16 quantization exactly") {
        const Decoded d = decode(encode(set, nullptr, 64, 64, 10));
        for (size_t i = 0; i < set.size(); ++i) {
            auto q = [](double v) {
                return static_cast<double>(half_to_float(half_oracle(static_cast<float>(v))));
            };
            const Gaussian2D want = constrain(Gaussian2D{{q(set[i].mu.x), q(set[i].mu.y)},
                                                         q(set[i].theta),
                                                         {q(set[i].scale.x), q(set[i].scale.y)},
                                                         {q(set[i].color.r), q(set[i].color.g), q(set[i].color.b)}});
            CHECK(d.set[i].mu.x == want.mu.x);
            CHECK(d.set[i].mu.y == want.mu.y);
            CHECK(d.set[i].theta == want.theta);
            CHECK(d.set[i].scale.x == want.scale.x);
            CHECK(d.set[i].scale.y == want.scale.y);
            CHECK(d.set[i].color.r == want.color.r);
            CHECK(d.set[i].color.g == want.color.g);
            CHECK(d.set[i].color.b == want.color.b);
        }
    }
    SUBCASE("encode -> decode -> encode is byte-identical") {
        const Decoded d = decode(bytes);
        const BspPartition rebuilt = *d.partition;
        const auto again = encode(d.set, &rebuilt, d.width, d.height, d.k);
        REQUIRE(again.size() == bytes.size());
        CHECK(std::memcmp(again.data(), bytes.data(), bytes.size()) == 0);
    }
    SUBCASE("rendering the decoded set equals rendering the quantized set bit-for-bit") {
        const Decoded d = decode(encode(set, nullptr, 64, 64, 10));
        const GaussianSet q = quantize_set(set);
        const ImageBuffer a = render_image(d.set, 48, 32, 10);
        const ImageBuffer b = render_image(q, 48, 32, 10);
        for (size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] == b.data()[i]);
    }
    SUBCASE("error kinds") {
        auto expect_kind = [](std::vector<uint8_t> b, ErrorKind kind) {
            try {
                decode(b);
                FAIL_CHECK("expected a decode error");
            } catch (const Error& e) {
                CHECK(e.kind() == kind);
            }
        };
        std::vector<uint8_t> bad = bytes;
        bad[0] = 'X';
        expect_kind(bad, ErrorKind::bad_magic);

        bad = bytes;
        bad[4] = 9;
        expect_kind(bad, ErrorKind::bad_version);

        bad = bytes;
        bad.pop_back();
        expect_kind(bad, ErrorKind::truncated);

        expect_kind(std::vector<uint8_t>(bytes.begin(), bytes.begin() + 10), ErrorKind::truncated);

        bad = bytes;
        for (int i = 0; i < 4; ++i) bad[12 + i] = 0;  // n_g = 0
        expect_kind(bad, ErrorKind::empty_set);
    }
}

TEST_CASE("quantize_set satisfies the invariants after rounding") {
    const GaussianSet set = constrained_random_set(500, 3007);
    const GaussianSet q = quantize_set(set);
    for (const auto& g : q.gaussians) {
        CHECK(g.scale.x >= kScaleMin);
        CHECK(g.scale.x <= kScaleMax);
        CHECK(g.theta >= 0.0);
        CHECK(g.theta < 3.14159265358979324);
        CHECK(g.color.r >= 0.0);
        CHECK(g.color.r <= 1.0);
        CHECK(g.mu.x >= 0.0);
        CHECK(g.mu.x <= 1.0);
    }
}
