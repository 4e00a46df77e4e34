#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "igs/bsp.hpp"
#include "igs/gaussian.hpp"

namespace igs {

/// IEEE 754 binary16 conversions, round-to-nearest-even. Storage format of
/// every serialized parameter.
uint16_t float_to_half(float f);
float half_to_float(uint16_t h);

inline uint16_t double_to_half(double d) { return float_to_half(static_cast<float>(d)); }
inline double half_to_double(uint16_t h) { return half_to_float(h); }

/// The set as it will read back after a serialization roundtrip: every
/// parameter pushed through binary16 and re-constrained.
GaussianSet quantize_set(const GaussianSet& set);

/// Serialized size accounting. Payload covers Gaussian records only; the
/// 20-byte header and the block table are reported separately. KB figures in
/// logs use decimal units (1 KB = 1000 bytes).
struct SizeReport {
    uint64_t payload_bytes = 0;  // 16 per Gaussian
    uint64_t block_bytes = 0;    // 8 per block
    uint64_t header_bytes = 20;
    double bpp = 0.0;  // payload_bytes * 8 / (width * height)
};

SizeReport size_report(uint32_t n_g, uint32_t n_b, uint32_t width, uint32_t height);

struct Decoded {
    GaussianSet set;
    std::optional<BspPartition> partition;
    uint32_t width = 0;
    uint32_t height = 0;
    int k = kDefaultTopK;
};

/// Layout: "IGS2" | version u8 | flags u8 | k u16 | width u16 | height u16 |
/// n_g u32 | n_b u32, little-endian (20-byte header), then n_g records of
/// 8 float16 (mu_u, mu_v, theta, s1, s2, r, g, b) and n_b records of
/// 4 float16 (x1, y1, x2, y2). Total 20 + 16 n_g + 8 n_b bytes.
std::vector<uint8_t> encode(const GaussianSet& set, const BspPartition* partition, uint32_t width,
                            uint32_t height, int k);

/// Parses and validates a file, constrains the decoded parameters, and
/// rebuilds partition membership from the stored corners.
Decoded decode(const std::vector<uint8_t>& bytes);

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace igs
