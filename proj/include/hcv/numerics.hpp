#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hcv/tensor.hpp"

namespace hcv {

/// Score stored in masked slots. Treated as -infinity by masked_softmax and topk.
inline constexpr float kSentinel = std::numeric_limits<float>::lowest();

inline bool is_sentinel(float v) { return v <= kSentinel; }

struct ScoredIndexList {
    std::vector<float> scores;
    std::vector<std::int32_t> indices;
};

/// K largest values, non-increasing, ties broken by ascending index.
ScoredIndexList topk(std::span<const float> values, int k);

/// Allocation-free variant. `scratch` is resized to values.size(); the first
/// k entries of `out_scores`/`out_indices` are written.
void topk_into(std::span<const float> values, int k, std::vector<std::int32_t>& scratch,
               std::span<float> out_scores, std::span<std::int32_t> out_indices);

/// softmax(values / temperature) restricted to entries where mask is true.
/// Masked-out (and sentinel) entries get probability exactly 0.
std::vector<float> masked_softmax(std::span<const float> values, std::span<const bool> mask,
                                  float temperature = 1.0f);

/// In-place variant over a raw buffer; `mask` may be empty meaning all true.
void masked_softmax_into(std::span<const float> values, std::span<const std::uint8_t> mask,
                         float temperature, std::span<float> out);

using Triple = std::array<int, 3>;

/// Cross-correlation of a [Cin, X, Y, Z] volume with [Cout, Cin, kx, ky, kz]
/// weights, zero padding. Kernel extents must be odd. `bias` may be empty.
Tensor conv3d(const Tensor& volume, const Tensor& weights, Triple stride, Triple padding,
              std::span<const float> bias = {});

/// Adjoint of conv3d: the weights keep the conv3d layout, so a
/// [A, B, kx, ky, kz] tensor maps A input channels to B output channels.
/// Output extent per axis is (in - 1) * stride - 2 * pad + k. Even kernel
/// extents are admitted.
Tensor conv_transpose3d(const Tensor& volume, const Tensor& weights, Triple stride,
                        Triple padding, std::span<const float> bias = {});

/// Block mean over f x f cells of a [C, H, W] map; partial edge blocks average
/// their valid pixels only.
Tensor avg_pool2d(const Tensor& map, int factor);

/// Bilinear sample of a [C, H, W] map at (x, y); out-of-grid neighbours are 0.
std::vector<float> bilinear_sample(const Tensor& map, float x, float y);

/// Same as above, writing C values into `out`.
void bilinear_sample_into(const Tensor& map, float x, float y, std::span<float> out);

}  // namespace hcv
