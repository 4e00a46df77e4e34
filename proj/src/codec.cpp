#include "igs/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "igs/error.hpp"

namespace igs {

uint16_t float_to_half(float f) {
    const uint32_t x = std::bit_cast<uint32_t>(f);
    const uint32_t sign = (x >> 16) & 0x8000u;
    uint32_t mant = x & 0x007fffffu;
    const int32_t exp = static_cast<int32_t>((x >> 23) & 0xffu);

    if (exp == 0xff)  // inf or nan
        return static_cast<uint16_t>(sign | 0x7c00u | (mant ? (0x200u | (mant >> 13)) : 0u));

    const int32_t e = exp - 127 + 15;
    if (e >= 0x1f) return static_cast<uint16_t>(sign | 0x7c00u);  // overflow to inf
    if (e <= 0) {
        // Subnormal half (or zero): shift the 24-bit significand down so the
        // result counts units of 2^-24.
        const int32_t shift = 14 - e;
        if (shift > 24 || exp == 0) return static_cast<uint16_t>(sign);
        mant |= 0x00800000u;
        uint32_t kept = mant >> shift;
        const uint32_t rem = mant & ((1u << shift) - 1u);
        const uint32_t half_point = 1u << (shift - 1);
        if (rem > half_point || (rem == half_point && (kept & 1u))) ++kept;
        return static_cast<uint16_t>(sign | kept);  // carry into the normal range is well-formed
    }

    uint32_t h = sign | (static_cast<uint32_t>(e) << 10) | (mant >> 13);
    const uint32_t rem = mant & 0x1fffu;
    if (rem > 0x1000u || (rem == 0x1000u && (h & 1u))) ++h;  // RNE; carry may bump the exponent
    return static_cast<uint16_t>(h);
}

float half_to_float(uint16_t h) {
    const uint32_t sign = static_cast<uint32_t>(h & 0x8000u) << 16;
    const uint32_t exp = (h >> 10) & 0x1fu;
    uint32_t mant = h & 0x3ffu;
    uint32_t x;
    if (exp == 0) {
        if (mant == 0) {
            x = sign;
        } else {
            int e = -1;
            do {
                mant <<= 1;
                ++e;
            } while (!(mant & 0x400u));
            mant &= 0x3ffu;
            x = sign | (static_cast<uint32_t>(127 - 15 - e) << 23) | (mant << 13);
        }
    } else if (exp == 0x1f) {
        x = sign | 0x7f800000u | (mant << 13);
    } else {
        x = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    return std::bit_cast<float>(x);
}

GaussianSet quantize_set(const GaussianSet& set) {
    GaussianSet out;
    out.gaussians.reserve(set.size());
    auto q = [](double v) { return half_to_double(double_to_half(v)); };
    for (const auto& g : set.gaussians) {
        Gaussian2D r;
        r.mu = {q(g.mu.x), q(g.mu.y)};
        r.theta = q(g.theta);
        r.scale = {q(g.scale.x), q(g.scale.y)};
        r.color = {q(g.color.r), q(g.color.g), q(g.color.b)};
        out.gaussians.push_back(constrain(r));
    }
    return out;
}

SizeReport size_report(uint32_t n_g, uint32_t n_b, uint32_t width, uint32_t height) {
    SizeReport r;
    r.payload_bytes = 16ull * n_g;
    r.block_bytes = 8ull * n_b;
    r.bpp = static_cast<double>(r.payload_bytes) * 8.0 / (static_cast<double>(width) * height);
    return r;
}

namespace {

constexpr char kMagic[4] = {'I', 'G', 'S', '2'};
constexpr uint8_t kVersion = 1;
constexpr size_t kHeaderBytes = 20;

struct Writer {
    std::vector<uint8_t> bytes;
    void u8(uint8_t v) { bytes.push_back(v); }
    void u16(uint16_t v) {
        bytes.push_back(static_cast<uint8_t>(v & 0xff));
        bytes.push_back(static_cast<uint8_t>(v >> 8));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
    }
    void half(double v) { u16(double_to_half(v)); }
};

struct Reader {
    const std::vector<uint8_t>& bytes;
    size_t pos = 0;
    uint8_t u8() { return bytes[pos++]; }
    uint16_t u16() {
        const uint16_t v = static_cast<uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
        pos += 2;
        return v;
    }
    uint32_t u32() {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    double half() { return half_to_double(u16()); }
};

void check_encodable(double v, const char* what) {
    if (!std::isfinite(v) || std::abs(v) > 65504.0)
        raise(ErrorKind::invalid_parameter, std::string("value of ") + what + " outside binary16 finite range");
}

}  // namespace

std::vector<uint8_t> encode(const GaussianSet& set, const BspPartition* partition, uint32_t width,
                            uint32_t height, int k) {
    if (set.empty()) raise(ErrorKind::empty_set, "cannot encode an empty GaussianSet");
    if (width == 0 || height == 0) raise(ErrorKind::invalid_parameter, "encoded dimensions must be positive");
    if (width > 0xffff || height > 0xffff)
        raise(ErrorKind::invalid_parameter, "encoded dimensions exceed the u16 header fields");
    if (k < 1 || k > 0xffff) raise(ErrorKind::invalid_parameter, "k out of range for the header");
    if (partition && partition->source_size != set.size())
        raise(ErrorKind::invalid_parameter, "partition was not built over this set");

    const uint32_t n_g = static_cast<uint32_t>(set.size());
    const uint32_t n_b = partition ? static_cast<uint32_t>(partition->block_count()) : 0;

    Writer w;
    w.bytes.reserve(kHeaderBytes + 16ull * n_g + 8ull * n_b);
    for (char c : kMagic) w.u8(static_cast<uint8_t>(c));
    w.u8(kVersion);
    w.u8(0);  // flags
    w.u16(static_cast<uint16_t>(k));
    w.u16(static_cast<uint16_t>(width));
    w.u16(static_cast<uint16_t>(height));
    w.u32(n_g);
    w.u32(n_b);

    for (const auto& g : set.gaussians) {
        const double vals[8] = {g.mu.x, g.mu.y, g.theta, g.scale.x, g.scale.y, g.color.r, g.color.g, g.color.b};
        for (double v : vals) {
            check_encodable(v, "Gaussian parameter");
            w.half(v);
        }
    }
    if (partition) {
        for (const Rect& b : partition->blocks) {
            const double vals[4] = {b.x1, b.y1, b.x2, b.y2};
            for (double v : vals) {
                check_encodable(v, "block corner");
                w.half(v);
            }
        }
    }
    return w.bytes;
}

Decoded decode(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < kHeaderBytes) raise(ErrorKind::truncated, "file shorter than the 20-byte header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) raise(ErrorKind::bad_magic, "not an IGS2 file");

    Reader r{bytes, 4};
    const uint8_t version = r.u8();
    if (version != kVersion)
        raise(ErrorKind::bad_version, "unsupported IGS2 version " + std::to_string(version));
    r.u8();  // flags, reserved
    Decoded d;
    d.k = r.u16();
    d.width = r.u16();
    d.height = r.u16();
    const uint32_t n_g = r.u32();
    const uint32_t n_b = r.u32();

    if (n_g == 0) raise(ErrorKind::empty_set, "IGS2 file contains zero Gaussians");
    const size_t expected = kHeaderBytes + 16ull * n_g + 8ull * n_b;
    if (bytes.size() != expected)
        raise(ErrorKind::truncated, "file length " + std::to_string(bytes.size()) + " != expected " +
                                        std::to_string(expected));
    if (d.k < 1) raise(ErrorKind::invalid_parameter, "header k must be >= 1");
    if (d.width == 0 || d.height == 0) raise(ErrorKind::invalid_parameter, "header dimensions must be positive");

    d.set.gaussians.reserve(n_g);
    for (uint32_t i = 0; i < n_g; ++i) {
        Gaussian2D g;
        g.mu.x = r.half();
        g.mu.y = r.half();
        g.theta = r.half();
        g.scale.x = r.half();
        g.scale.y = r.half();
        g.color.r = r.half();
        g.color.g = r.half();
        g.color.b = r.half();
        // float16 rounding can overshoot the bounds by one ulp
        d.set.gaussians.push_back(constrain(g));
    }

    if (n_b > 0) {
        std::vector<Rect> blocks(n_b);
        for (auto& b : blocks) {
            b.x1 = r.half();
            b.y1 = r.half();
            b.x2 = r.half();
            b.y2 = r.half();
        }
        d.partition = rebuild_partition(std::move(blocks), d.set);
    }
    return d;
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::io, "cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) raise(ErrorKind::io, "read failure on " + path);
    return bytes;
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot create " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(ErrorKind::io, "write failure on " + path);
}

}  // namespace igs
