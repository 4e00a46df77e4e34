#pragma once

#include "igs/image.hpp"

namespace igs {

/// 10*log10(1/MSE) over all pixels and channels in [0,1] scale.
/// Identical images yield +infinity.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// Mean structural similarity: 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2, replicate padding, averaged over RGB.
/// Requires min(W, H) >= 11.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace igs
