#include "hcv/global_cost.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hcv/errors.hpp"
#include "hcv/parallel.hpp"

namespace hcv {

namespace {

void check_pair(const FeatureMap& f1, const FeatureMap& f2, const char* op) {
    if (f1.level != f2.level || f1.data.shape() != f2.data.shape()) {
        throw InvalidArgument(std::string(op) + ": feature maps differ in level or shape (" +
                              f1.data.shape_string() + " vs " + f2.data.shape_string() + ")");
    }
}

// Pixel-major copy: [H, W, C].
std::vector<float> interleave(const FeatureMap& fm) {
    const int c = fm.channels(), h = fm.height(), w = fm.width();
    std::vector<float> out(static_cast<std::size_t>(c) * h * w);
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                out[(static_cast<std::size_t>(y) * w + x) * c + ch] = fm.data.at(ch, y, x);
            }
        }
    }
    return out;
}

inline float dot_scaled(const float* a, const float* b, int c, float sqrt_c) {
    float acc = 0.0f;
    for (int i = 0; i < c; ++i) acc += a[i] * b[i];
    return acc / sqrt_c;
}

}  // namespace

const char* to_string(Axis axis) { return axis == Axis::horizontal ? "horizontal" : "vertical"; }

float correlation(const FeatureMap& f1, const FeatureMap& f2, int u, int v, int i, int j) {
    if (f1.channels() != f2.channels()) {
        throw InvalidArgument("correlation: channel counts differ");
    }
    if (u < 0 || u >= f1.width() || v < 0 || v >= f1.height() || i < 0 || i >= f2.width() ||
        j < 0 || j >= f2.height()) {
        throw InvalidArgument("correlation: coordinates out of grid");
    }
    const int c = f1.channels();
    float acc = 0.0f;
    for (int ch = 0; ch < c; ++ch) acc += f1.data.at(ch, v, u) * f2.data.at(ch, j, i);
    return acc / std::sqrt(static_cast<float>(c));
}

TopkCostVolume::TopkCostVolume(Axis axis, int height, int width, int max_disp, int k)
    : axis_(axis), height_(height), width_(width), max_disp_(max_disp), k_(k) {
    if (height < 1 || width < 1 || max_disp < 1 || k < 1) {
        throw InvalidArgument("TopkCostVolume: extents, D and K must be positive");
    }
    const std::size_t slots = static_cast<std::size_t>(height) * width * 2 * max_disp;
    scores_.assign(slots * k, kSentinel);
    indices_.assign(slots * k, -1);
    valid_ = VolumeMask(slots);
    if (scores_.size() != slots * k || indices_.size() != slots * k || valid_.size() != slots) {
        throw std::logic_error("TopkCostVolume storage does not match H*W*2D*K");
    }
}

AggregatedCostVolume::AggregatedCostVolume(Axis axis, int height, int width, int max_disp)
    : axis_(axis), height_(height), width_(width), max_disp_(max_disp) {
    if (height < 1 || width < 1 || max_disp < 1) {
        throw InvalidArgument("AggregatedCostVolume: extents and D must be positive");
    }
    const std::size_t slots = static_cast<std::size_t>(height) * width * 2 * max_disp;
    scores_.assign(slots, kSentinel);
    valid_ = VolumeMask(slots);
}

TopkCostVolume build_topk_volume(const FeatureMap& f1, const FeatureMap& f2, Axis axis,
                                 int max_disp, int k) {
    check_pair(f1, f2, "build_topk_volume");
    const int h = f1.height(), w = f1.width(), c = f1.channels();
    const int candidates = axis == Axis::horizontal ? h : w;
    if (max_disp < 1) throw InvalidArgument("build_topk_volume: D must be >= 1");
    if (k < 1 || k > candidates) {
        throw InvalidArgument("build_topk_volume: K=" + std::to_string(k) + " exceeds the " +
                              std::to_string(candidates) + " candidates per line");
    }

    TopkCostVolume vol(axis, h, w, max_disp, k);
    const int nd = 2 * max_disp;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int j = 0; j < nd; ++j) {
                const int d = j - max_disp;
                const bool ok = axis == Axis::horizontal ? (x + d >= 0 && x + d < w)
                                                         : (y + d >= 0 && y + d < h);
                vol.set_valid(y, x, j, ok);
            }
        }
    }

    const std::vector<float> a = interleave(f1);
    const std::vector<float> b = interleave(f2);
    const float sqrt_c = std::sqrt(static_cast<float>(c));

    parallel_for(0, h, [&](std::int64_t row) {
        const int y = static_cast<int>(row);
        std::vector<float> line(static_cast<std::size_t>(candidates));
        std::vector<std::int32_t> scratch;
        for (int x = 0; x < w; ++x) {
            const float* src = a.data() + (static_cast<std::size_t>(y) * w + x) * c;
            for (int j = 0; j < nd; ++j) {
                if (!vol.valid(y, x, j)) continue;
                const int d = j - max_disp;
                for (int i = 0; i < candidates; ++i) {
                    const int ty = axis == Axis::horizontal ? i : y + d;
                    const int tx = axis == Axis::horizontal ? x + d : i;
                    const float* dst = b.data() + (static_cast<std::size_t>(ty) * w + tx) * c;
                    line[static_cast<std::size_t>(i)] = dot_scaled(src, dst, c, sqrt_c);
                }
                topk_into(line, k, scratch, vol.scores_at(y, x, j), vol.indices_at(y, x, j));
            }
        }
    });
    return vol;
}

AggWeights AggWeights::averaging(int k) {
    if (k < 1) throw InvalidArgument("averaging weights need K >= 1");
    AggLayer layer;
    layer.weights = Tensor({1, k, 1, 1, 1}, 1.0f / static_cast<float>(k));
    return AggWeights{{layer}};
}

AggWeights AggWeights::smoothing(int k) {
    if (k < 1) throw InvalidArgument("smoothing weights need K >= 1");
    constexpr float g[3] = {0.25f, 0.5f, 0.25f};
    AggLayer smooth;
    smooth.padding = {1, 1, 1};
    smooth.weights = Tensor({k, k, 3, 3, 3});
    for (int ch = 0; ch < k; ++ch) {
        for (int x = 0; x < 3; ++x) {
            for (int y = 0; y < 3; ++y) {
                for (int z = 0; z < 3; ++z) smooth.weights.at(ch, ch, x, y, z) = g[x] * g[y] * g[z];
            }
        }
    }
    AggLayer collapse;
    collapse.weights = Tensor({1, k, 1, 1, 1}, 1.0f / static_cast<float>(k));
    return AggWeights{{smooth, collapse}};
}

std::vector<std::int64_t> AggWeights::output_shape(const std::vector<std::int64_t>& input) const {
    if (input.size() != 4) throw InvalidArgument("aggregation input must be rank 4");
    std::vector<std::int64_t> shape = input;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const AggLayer& layer = layers[li];
        const std::string where = "aggregation layer " + std::to_string(li) + ": ";
        if (layer.weights.rank() != 5) throw InvalidArgument(where + "weights must be rank 5");
        const auto& ws = layer.weights.shape();
        const bool transpose = layer.kind == LayerKind::conv_transpose3d;
        const std::int64_t cin = transpose ? ws[0] : ws[1];
        const std::int64_t cout = transpose ? ws[1] : ws[0];
        if (cin != shape[0]) {
            throw InvalidArgument(where + "expects " + std::to_string(cin) + " channels, got " +
                                  std::to_string(shape[0]));
        }
        if (!layer.bias.empty() && static_cast<std::int64_t>(layer.bias.size()) != cout) {
            throw InvalidArgument(where + "bias length mismatch");
        }
        shape[0] = cout;
        for (int a = 0; a < 3; ++a) {
            const std::int64_t k = ws[static_cast<std::size_t>(a) + 2];
            const int s = layer.stride[static_cast<std::size_t>(a)];
            const int p = layer.padding[static_cast<std::size_t>(a)];
            if (s < 1 || p < 0) throw InvalidArgument(where + "bad stride or padding");
            std::int64_t& e = shape[static_cast<std::size_t>(a) + 1];
            if (transpose) {
                e = (e - 1) * s - 2 * p + k;
            } else {
                if (k % 2 == 0) throw InvalidArgument(where + "conv3d kernel extents must be odd");
                const std::int64_t span = e + 2 * p - k;
                if (span < 0) throw InvalidArgument(where + "kernel larger than padded input");
                e = span / s + 1;
            }
            if (e < 1) throw InvalidArgument(where + "empty output");
        }
    }
    return shape;
}

Tensor topk_to_tensor(const TopkCostVolume& volume) {
    const int h = volume.height(), w = volume.width(), nd = volume.disp_count(), k = volume.k();
    Tensor t({k, h, w, nd});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int j = 0; j < nd; ++j) {
                if (!volume.valid(y, x, j)) continue;
                const auto s = volume.scores_at(y, x, j);
                for (int c = 0; c < k; ++c) {
                    const float v = s[static_cast<std::size_t>(c)];
                    t.at(c, y, x, j) = is_sentinel(v) ? 0.0f : v;
                }
            }
        }
    }
    return t;
}

AggregatedCostVolume aggregate(const TopkCostVolume& volume, const AggWeights& weights) {
    const int h = volume.height(), w = volume.width(), nd = volume.disp_count();
    const std::vector<std::int64_t> want{1, h, w, nd};
    const auto got = weights.output_shape({volume.k(), h, w, nd});
    if (got != want) {
        throw InvalidArgument("aggregation stack maps the volume to " + shape_string(got) +
                              " instead of " + shape_string(want));
    }

    Tensor x = topk_to_tensor(volume);
    for (const AggLayer& layer : weights.layers) {
        x = layer.kind == LayerKind::conv3d
                ? conv3d(x, layer.weights, layer.stride, layer.padding, layer.bias)
                : conv_transpose3d(x, layer.weights, layer.stride, layer.padding, layer.bias);
        if (layer.activation == Activation::relu) {
            for (float& v : x.data()) v = std::max(v, 0.0f);
        }
    }

    AggregatedCostVolume out(volume.axis(), h, w, volume.max_disp());
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            for (int j = 0; j < nd; ++j) {
                const bool ok = volume.valid(y, xx, j);
                out.set_valid(y, xx, j, ok);
                out.score(y, xx, j) = ok ? x.at(0, y, xx, j) : kSentinel;
            }
        }
    }
    return out;
}

FlowField initial_flow(const AggregatedCostVolume& horizontal,
                       const AggregatedCostVolume& vertical, float temperature) {
    if (horizontal.height() != vertical.height() || horizontal.width() != vertical.width()) {
        throw InvalidArgument("initial_flow: horizontal and vertical volumes differ in extent");
    }
    if (horizontal.axis() != Axis::horizontal || vertical.axis() != Axis::vertical) {
        throw InvalidArgument("initial_flow: volumes passed in the wrong axis order");
    }
    if (!(temperature > 0.0f)) throw InvalidArgument("initial_flow: temperature must be positive");
    const int h = horizontal.height(), w = horizontal.width();

    auto expectation = [temperature](const AggregatedCostVolume& vol, int y, int x,
                                     std::vector<std::uint8_t>& mask, std::vector<float>& prob) {
        const int nd = vol.disp_count();
        mask.resize(static_cast<std::size_t>(nd));
        prob.resize(static_cast<std::size_t>(nd));
        for (int j = 0; j < nd; ++j) mask[static_cast<std::size_t>(j)] = vol.valid(y, x, j);
        masked_softmax_into(vol.scores_at(y, x), mask, temperature, prob);
        double e = 0.0;
        for (int j = 0; j < nd; ++j) {
            e += static_cast<double>(j - vol.max_disp()) * prob[static_cast<std::size_t>(j)];
        }
        return static_cast<float>(e);
    };

    FlowField flow(h, w, 16);
    parallel_for(0, h, [&](std::int64_t row) {
        const int y = static_cast<int>(row);
        std::vector<std::uint8_t> mask;
        std::vector<float> prob;
        for (int x = 0; x < w; ++x) {
            flow.u.at(y, x) = expectation(horizontal, y, x, mask, prob);
            flow.v.at(y, x) = expectation(vertical, y, x, mask, prob);
        }
    });
    return flow;
}

}  // namespace hcv
