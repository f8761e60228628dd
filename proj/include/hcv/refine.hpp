#pragma once

#include <vector>

#include "hcv/features.hpp"
#include "hcv/flow_field.hpp"
#include "hcv/global_cost.hpp"
#include "hcv/local_cost.hpp"
#include "hcv/tensor.hpp"

namespace hcv {

/// Samples each pixel's aggregated scores at displacements u + delta
/// (horizontal) and v + delta (vertical), delta in [-r, r], with linear
/// interpolation along d. Out-of-range or invalid neighbours read 0.
/// Returns [H, W, 2 * (2r + 1)]: horizontal block first.
Tensor lookup_global(const AggregatedCostVolume& horizontal, const AggregatedCostVolume& vertical,
                     const FlowField& flow, int radius);

enum class LocalLookup {
    recentred,  // recompute correlations around the current flow
    fixed,      // index the zero-centred local volume
};

struct RefineOptions {
    int iters = 12;
    int radius = 4;
    float temperature = 1.0f;
    float damping = 0.8f;
    LocalLookup lookup = LocalLookup::recentred;
};

/// Damped local soft-argmax iteration starting from `seed`. Returns one field
/// per iteration (the seed itself is not included).
std::vector<FlowField> refine_flow(const FeatureMap& f1, const FeatureMap& f2,
                                   const FlowField& seed, const RefineOptions& options);

/// Bilinear resampling of a flow field to (out_h, out_w) with components
/// multiplied by `scale`. Pixel centres are aligned; coordinates are clamped
/// to the source grid.
FlowField resize_flow(const FlowField& flow, int out_h, int out_w, int scale);

/// Level-16 initial flow to a level-8 seed (x2 resample, x2 magnitudes).
/// Defaults to twice the source extents.
FlowField seed_from_init(const FlowField& init, int out_h = 0, int out_w = 0);

/// Level-8 flow to full resolution (x8 resample, x8 magnitudes).
FlowField upsample_flow(const FlowField& flow, int out_h = 0, int out_w = 0);

}  // namespace hcv
