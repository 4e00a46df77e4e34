#include "igs/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "igs/error.hpp"

namespace igs {

namespace {

struct FileHandle {
    FILE* fp = nullptr;
    FileHandle(const std::string& path, const char* mode) : fp(std::fopen(path.c_str(), mode)) {}
    ~FileHandle() {
        if (fp) std::fclose(fp);
    }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
};

}  // namespace

ImageBuffer load_image(const std::string& path) {
    FileHandle file(path, "rb");
    if (!file.fp) raise(ErrorKind::io, "cannot open " + path);

    uint8_t sig[8];
    if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        raise(ErrorKind::unsupported_format, path + " is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorKind::io, "libpng initialization failed");
    }

    std::vector<uint8_t> raw;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int bit_depth = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorKind::io, "PNG decode failure in " + path);
    }

    png_init_io(png, file.fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    int color_type = 0;
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);

    png_read_update_info(png, info);
    bit_depth = png_get_bit_depth(png, info);
    const size_t rowbytes = png_get_rowbytes(png, info);

    raw.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 h = 0; h < height; ++h) rows[h] = raw.data() + h * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageBuffer img(static_cast<int>(width), static_cast<int>(height));
    if (bit_depth == 16) {
        // PNG 16-bit samples are big-endian.
        for (png_uint_32 h = 0; h < height; ++h) {
            const uint8_t* row = raw.data() + h * rowbytes;
            for (png_uint_32 w = 0; w < width; ++w)
                for (int c = 0; c < 3; ++c) {
                    const uint16_t v =
                        static_cast<uint16_t>((row[(w * 3 + c) * 2] << 8) | row[(w * 3 + c) * 2 + 1]);
                    img.at(static_cast<int>(h), static_cast<int>(w), c) = static_cast<float>(v / 65535.0);
                }
        }
    } else {
        for (png_uint_32 h = 0; h < height; ++h) {
            const uint8_t* row = raw.data() + h * rowbytes;
            for (png_uint_32 w = 0; w < width; ++w)
                for (int c = 0; c < 3; ++c)
                    img.at(static_cast<int>(h), static_cast<int>(w), c) =
                        static_cast<float>(row[w * 3 + c] / 255.0);
        }
    }
    return img;
}

void save_image(const ImageBuffer& img, const std::string& path, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) raise(ErrorKind::invalid_parameter, "bit depth must be 8 or 16");

    FileHandle file(path, "wb");
    if (!file.fp) raise(ErrorKind::io, "cannot create " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        raise(ErrorKind::io, "libpng initialization failed");
    }

    const int W = img.width(), H = img.height();
    const size_t rowbytes = static_cast<size_t>(W) * 3 * (bit_depth / 8);
    std::vector<uint8_t> raw(rowbytes * H);
    std::vector<png_bytep> rows(H);

    const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
    for (int h = 0; h < H; ++h) {
        uint8_t* row = raw.data() + h * rowbytes;
        rows[h] = row;
        for (int w = 0; w < W; ++w)
            for (int c = 0; c < 3; ++c) {
                double v = img.at(h, w, c);
                v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                const auto q = static_cast<uint32_t>(std::lround(v * maxval));
                if (bit_depth == 16) {
                    row[(w * 3 + c) * 2] = static_cast<uint8_t>(q >> 8);
                    row[(w * 3 + c) * 2 + 1] = static_cast<uint8_t>(q & 0xff);
                } else {
                    row[w * 3 + c] = static_cast<uint8_t>(q);
                }
            }
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(ErrorKind::io, "PNG encode failure for " + path);
    }

    png_init_io(png, file.fp);
    png_set_IHDR(png, info, W, H, bit_depth, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace igs
