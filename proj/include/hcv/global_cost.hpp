#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hcv/features.hpp"
#include "hcv/flow_field.hpp"
#include "hcv/numerics.hpp"
#include "hcv/tensor.hpp"
#include "hcv/volume_buffer.hpp"

namespace hcv {

/// Horizontal: displacement along columns, candidates are the H rows of the
/// target column. Vertical: displacement along rows, candidates are the W
/// columns of the target row.
enum class Axis { horizontal, vertical };

const char* to_string(Axis axis);

/// Dot product of two descriptors divided by sqrt(C).
float correlation(const FeatureMap& f1, const FeatureMap& f2, int u, int v, int i, int j);

/// Top-K sparsified 3D global cost volume along one axis.
///
/// Slot (h, w, j) holds the K best candidates for displacement d = j - D.
/// Slots whose target line is out of grid are invalid and hold kSentinel
/// scores and index -1.
class TopkCostVolume {
public:
    TopkCostVolume(Axis axis, int height, int width, int max_disp, int k);

    Axis axis() const { return axis_; }
    int height() const { return height_; }
    int width() const { return width_; }
    int max_disp() const { return max_disp_; }
    int disp_count() const { return 2 * max_disp_; }
    int k() const { return k_; }

    std::size_t slot(int h, int w, int j) const {
        return (static_cast<std::size_t>(h) * width_ + w) * disp_count() + j;
    }
    std::span<float> scores_at(int h, int w, int j) {
        return {scores_.data() + slot(h, w, j) * k_, static_cast<std::size_t>(k_)};
    }
    std::span<const float> scores_at(int h, int w, int j) const {
        return {scores_.data() + slot(h, w, j) * k_, static_cast<std::size_t>(k_)};
    }
    std::span<std::int32_t> indices_at(int h, int w, int j) {
        return {indices_.data() + slot(h, w, j) * k_, static_cast<std::size_t>(k_)};
    }
    std::span<const std::int32_t> indices_at(int h, int w, int j) const {
        return {indices_.data() + slot(h, w, j) * k_, static_cast<std::size_t>(k_)};
    }
    bool valid(int h, int w, int j) const { return valid_.test(slot(h, w, j)); }
    void set_valid(int h, int w, int j, bool on) { valid_.set(slot(h, w, j), on); }

    std::size_t score_count() const { return scores_.size(); }
    std::size_t index_count() const { return indices_.size(); }
    std::size_t mask_bits() const { return valid_.size(); }

private:
    Axis axis_;
    int height_;
    int width_;
    int max_disp_;
    int k_;
    VolumeVector<float> scores_;
    VolumeVector<std::int32_t> indices_;
    VolumeMask valid_;
};

/// Aggregated per-displacement scores of one axis; invalid slots hold kSentinel.
class AggregatedCostVolume {
public:
    AggregatedCostVolume(Axis axis, int height, int width, int max_disp);

    Axis axis() const { return axis_; }
    int height() const { return height_; }
    int width() const { return width_; }
    int max_disp() const { return max_disp_; }
    int disp_count() const { return 2 * max_disp_; }

    std::size_t slot(int h, int w, int j) const {
        return (static_cast<std::size_t>(h) * width_ + w) * disp_count() + j;
    }
    float& score(int h, int w, int j) { return scores_[slot(h, w, j)]; }
    float score(int h, int w, int j) const { return scores_[slot(h, w, j)]; }
    std::span<const float> scores_at(int h, int w) const {
        return {scores_.data() + slot(h, w, 0), static_cast<std::size_t>(disp_count())};
    }
    bool valid(int h, int w, int j) const { return valid_.test(slot(h, w, j)); }
    void set_valid(int h, int w, int j, bool on) { valid_.set(slot(h, w, j), on); }

    std::size_t score_count() const { return scores_.size(); }
    std::size_t mask_bits() const { return valid_.size(); }

private:
    Axis axis_;
    int height_;
    int width_;
    int max_disp_;
    VolumeVector<float> scores_;
    VolumeMask valid_;
};

enum class LayerKind : std::uint8_t { conv3d = 0, conv_transpose3d = 1 };
enum class Activation : std::uint8_t { none = 0, relu = 1 };

struct AggLayer {
    LayerKind kind = LayerKind::conv3d;
    Activation activation = Activation::none;
    Triple stride{1, 1, 1};
    Triple padding{0, 0, 0};
    Tensor weights;  // [Cout, Cin, kx, ky, kz]
    std::vector<float> bias;

    friend bool operator==(const AggLayer&, const AggLayer&) = default;
};

/// Aggregation stack applied to the [K, H, W, 2D] volume with K as channels.
struct AggWeights {
    std::vector<AggLayer> layers;

    /// Single 1x1x1 conv with all weights 1/K: per-slot mean of the K scores.
    static AggWeights averaging(int k);
    /// 3x3x3 [1,2,1]-separable Gaussian depthwise smoothing over (h, w, d)
    /// followed by a 1/K channel collapse. Used by the pipeline by default.
    static AggWeights smoothing(int k);

    /// Output shape for a given input shape; throws InvalidArgument when the
    /// layer chain is inconsistent.
    std::vector<std::int64_t> output_shape(const std::vector<std::int64_t>& input) const;

    friend bool operator==(const AggWeights&, const AggWeights&) = default;
};

/// HCVW binary weight files (little-endian).
AggWeights read_hcvw(const std::filesystem::path& path);
void write_hcvw(const std::filesystem::path& path, const AggWeights& weights);
AggWeights decode_hcvw(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_hcvw(const AggWeights& weights);

/// Builds the Top-K volume for displacements {-D, ..., D-1} along `axis`.
/// Only one dense candidate line per worker is held at a time.
TopkCostVolume build_topk_volume(const FeatureMap& f1, const FeatureMap& f2, Axis axis,
                                 int max_disp, int k);

/// Runs the aggregation stack. Sentinels are zeroed on input, the validity
/// mask is carried through, and invalid slots are restored to kSentinel.
AggregatedCostVolume aggregate(const TopkCostVolume& volume, const AggWeights& weights);

/// Soft-argmax over displacements on each axis; flow in level-16 pixels.
FlowField initial_flow(const AggregatedCostVolume& horizontal,
                       const AggregatedCostVolume& vertical, float temperature = 1.0f);

/// Packs a Top-K volume into a [K, H, W, 2D] tensor with sentinels zeroed.
Tensor topk_to_tensor(const TopkCostVolume& volume);

}  // namespace hcv
