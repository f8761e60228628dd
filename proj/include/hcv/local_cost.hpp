#pragma once

#include <span>

#include "hcv/features.hpp"
#include "hcv/flow_field.hpp"
#include "hcv/tensor.hpp"
#include "hcv/volume_buffer.hpp"

namespace hcv {

/// 4D local cost volume at 1/8 resolution: (2r+1)^2 scores per pixel with
/// offset ordinal o = (dy + r) * (2r + 1) + (dx + r).
class LocalCostVolume {
public:
    LocalCostVolume(int height, int width, int radius);

    int height() const { return height_; }
    int width() const { return width_; }
    int radius() const { return radius_; }
    int window() const { return 2 * radius_ + 1; }
    int offsets() const { return window() * window(); }

    std::span<float> scores_at(int h, int w) {
        return {scores_.data() + pixel(h, w), static_cast<std::size_t>(offsets())};
    }
    std::span<const float> scores_at(int h, int w) const {
        return {scores_.data() + pixel(h, w), static_cast<std::size_t>(offsets())};
    }
    float score(int h, int w, int dy, int dx) const {
        return scores_[pixel(h, w) + static_cast<std::size_t>((dy + radius_) * window() + dx + radius_)];
    }
    std::size_t score_count() const { return scores_.size(); }

private:
    std::size_t pixel(int h, int w) const {
        return (static_cast<std::size_t>(h) * width_ + w) * offsets();
    }

    int height_;
    int width_;
    int radius_;
    VolumeVector<float> scores_;
};

/// Zero-padded unfold correlation of f1 against f2 within radius `radius`.
LocalCostVolume build_local_volume(const FeatureMap& f1, const FeatureMap& f2, int radius);

/// Window correlation re-centred at the current flow using bilinear samples of
/// f2. Returns [H, W, (2r+1)^2]. Equals build_local_volume when flow is zero.
Tensor lookup_local_at_flow(const FeatureMap& f1, const FeatureMap& f2, const FlowField& flow,
                            int radius);

/// Indexes a precomputed volume at offsets flow + o with bilinear weights
/// over the offset plane; positions beyond the stored window read 0.
Tensor lookup_local_in_volume(const LocalCostVolume& volume, const FlowField& flow);

}  // namespace hcv
