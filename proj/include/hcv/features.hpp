#pragma once

#include <utility>

#include "hcv/image.hpp"
#include "hcv/tensor.hpp"

namespace hcv {

/// Descriptor layout, per pixel.
inline constexpr int kFeatureChannels = 11;
inline constexpr int kChanIntensity = 0;  // z-scored over the 3x3 window
inline constexpr int kChanGradX = 1;
inline constexpr int kChanGradY = 2;
inline constexpr int kChanCensus = 3;     // 8 channels, row-major neighbour order

/// Per-pixel L2-normalised descriptors at 1/level resolution.
struct FeatureMap {
    int level = 8;
    Tensor data;  // [C, H, W]

    int channels() const { return static_cast<int>(data.extent(0)); }
    int height() const { return static_cast<int>(data.extent(1)); }
    int width() const { return static_cast<int>(data.extent(2)); }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

/// Luma in [0, 255] as a [1, H, W] tensor (0.299 R + 0.587 G + 0.114 B).
Tensor to_gray(const Image& image);

/// Average-pools the grayscale image by `level` (8 or 16) and computes the
/// 11-channel descriptor on that grid. Throws InvalidArgument for images
/// smaller than 16x16 or an unsupported level.
FeatureMap extract_features(const Image& image, int level);

/// {level 8, level 16}
std::pair<FeatureMap, FeatureMap> build_pyramid(const Image& image);

}  // namespace hcv
