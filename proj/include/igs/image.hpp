#pragma once

#include <cstddef>
#include <vector>

#include "igs/error.hpp"
#include "igs/types.hpp"

namespace igs {

/// Continuous image-domain coordinates in [0,1]^2. u is horizontal, v vertical.
struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

/// Center of pixel (row h, col w) in an H x W raster.
inline PixelCoord pixel_center(int h, int w, int height, int width) {
    return {(w + 0.5) / width, (h + 0.5) / height};
}

/// Row-major H x W x 3 raster, RGB, nominal range [0,1]. Stored as float32;
/// all rendering and metric arithmetic happens in double.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height, float fill = 0.0f)
        : width_(width), height_(height), data_(static_cast<size_t>(width) * height * 3, fill) {
        if (width < 1 || height < 1) raise(ErrorKind::invalid_parameter, "image dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }

    float& at(int h, int w, int c) { return data_[(static_cast<size_t>(h) * width_ + w) * 3 + c]; }
    float at(int h, int w, int c) const { return data_[(static_cast<size_t>(h) * width_ + w) * 3 + c]; }

    Color3 pixel(int h, int w) const {
        const float* p = &data_[(static_cast<size_t>(h) * width_ + w) * 3];
        return {p[0], p[1], p[2]};
    }
    void set_pixel(int h, int w, Color3 c) {
        float* p = &data_[(static_cast<size_t>(h) * width_ + w) * 3];
        p[0] = static_cast<float>(c.r);
        p[1] = static_cast<float>(c.g);
        p[2] = static_cast<float>(c.b);
    }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    bool same_shape(const ImageBuffer& o) const { return width_ == o.width_ && height_ == o.height_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

}  // namespace igs
