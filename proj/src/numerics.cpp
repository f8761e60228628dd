#include "hcv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hcv/errors.hpp"
#include "hcv/parallel.hpp"

namespace hcv {

void topk_into(std::span<const float> values, int k, std::vector<std::int32_t>& scratch,
               std::span<float> out_scores, std::span<std::int32_t> out_indices) {
    const auto n = static_cast<std::int64_t>(values.size());
    if (k <= 0 || k > n) {
        throw InvalidArgument("topk: k=" + std::to_string(k) + " must be in [1, " +
                              std::to_string(n) + "]");
    }
    scratch.resize(values.size());
    std::iota(scratch.begin(), scratch.end(), 0);
    auto before = [&](std::int32_t a, std::int32_t b) {
        const float va = values[static_cast<std::size_t>(a)];
        const float vb = values[static_cast<std::size_t>(b)];
        return va > vb || (va == vb && a < b);
    };
    std::partial_sort(scratch.begin(), scratch.begin() + k, scratch.end(), before);
    for (int i = 0; i < k; ++i) {
        out_indices[static_cast<std::size_t>(i)] = scratch[static_cast<std::size_t>(i)];
        out_scores[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(scratch[i])];
    }
}

ScoredIndexList topk(std::span<const float> values, int k) {
    ScoredIndexList out;
    std::vector<std::int32_t> scratch;
    out.scores.resize(static_cast<std::size_t>(std::max(k, 0)));
    out.indices.resize(out.scores.size());
    topk_into(values, k, scratch, out.scores, out.indices);
    return out;
}

void masked_softmax_into(std::span<const float> values, std::span<const std::uint8_t> mask,
                         float temperature, std::span<float> out) {
    if (!(temperature > 0.0f)) throw InvalidArgument("softmax temperature must be positive");
    if (!mask.empty() && mask.size() != values.size()) {
        throw InvalidArgument("softmax mask length mismatch");
    }
    auto admitted = [&](std::size_t i) {
        return (mask.empty() || mask[i] != 0) && !is_sentinel(values[i]);
    };
    bool any = false;
    double peak = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!admitted(i)) continue;
        if (!any || values[i] > peak) peak = values[i];
        any = true;
    }
    if (!any) throw EmptySupport("softmax has no admissible entry");

    const double inv_t = 1.0 / static_cast<double>(temperature);
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (admitted(i)) total += std::exp((values[i] - peak) * inv_t);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = admitted(i) ? static_cast<float>(std::exp((values[i] - peak) * inv_t) / total)
                             : 0.0f;
    }
}

std::vector<float> masked_softmax(std::span<const float> values, std::span<const bool> mask,
                                  float temperature) {
    if (mask.size() != values.size()) throw InvalidArgument("softmax mask length mismatch");
    std::vector<std::uint8_t> m(mask.begin(), mask.end());
    std::vector<float> out(values.size());
    masked_softmax_into(values, m, temperature, out);
    return out;
}

namespace {

struct ConvGeometry {
    std::int64_t cin, cout;
    std::array<std::int64_t, 3> in, out, k;
};

void check_conv_args(const Tensor& volume, const Tensor& weights, Triple stride,
                     Triple padding, std::span<const float> bias, std::int64_t out_channels,
                     const char* op) {
    if (volume.rank() != 4) throw InvalidArgument(std::string(op) + ": volume must be rank 4");
    if (weights.rank() != 5) throw InvalidArgument(std::string(op) + ": weights must be rank 5");
    for (int a = 0; a < 3; ++a) {
        if (stride[a] < 1) throw InvalidArgument(std::string(op) + ": stride must be >= 1");
        if (padding[a] < 0) throw InvalidArgument(std::string(op) + ": negative padding");
    }
    if (!bias.empty() && static_cast<std::int64_t>(bias.size()) != out_channels) {
        throw InvalidArgument(std::string(op) + ": bias length does not match output channels");
    }
}

}  // namespace

Tensor conv3d(const Tensor& volume, const Tensor& weights, Triple stride, Triple padding,
              std::span<const float> bias) {
    check_conv_args(volume, weights, stride, padding, bias, weights.rank() == 5 ? weights.extent(0) : 0,
                    "conv3d");
    ConvGeometry g{};
    g.cin = volume.extent(0);
    g.cout = weights.extent(0);
    if (weights.extent(1) != g.cin) {
        throw InvalidArgument("conv3d: weights " + weights.shape_string() +
                              " do not match volume " + volume.shape_string());
    }
    for (int a = 0; a < 3; ++a) {
        g.in[a] = volume.extent(a + 1);
        g.k[a] = weights.extent(a + 2);
        if (g.k[a] % 2 == 0) throw InvalidArgument("conv3d: kernel extents must be odd");
        const std::int64_t span = g.in[a] + 2 * padding[a] - g.k[a];
        if (span < 0) throw InvalidArgument("conv3d: kernel larger than padded input");
        g.out[a] = span / stride[a] + 1;
    }

    Tensor out({g.cout, g.out[0], g.out[1], g.out[2]});
    const float* in = volume.data().data();
    const float* w = weights.data().data();
    float* o = out.data().data();
    const std::int64_t in_plane = g.in[0] * g.in[1] * g.in[2];
    const std::int64_t k_vol = g.k[0] * g.k[1] * g.k[2];

    parallel_for(0, g.cout * g.out[0], [&](std::int64_t job) {
        const std::int64_t co = job / g.out[0];
        const std::int64_t ox = job % g.out[0];
        for (std::int64_t oy = 0; oy < g.out[1]; ++oy) {
            for (std::int64_t oz = 0; oz < g.out[2]; ++oz) {
                float acc = bias.empty() ? 0.0f : bias[static_cast<std::size_t>(co)];
                for (std::int64_t ci = 0; ci < g.cin; ++ci) {
                    const float* wk = w + (co * g.cin + ci) * k_vol;
                    const float* src = in + ci * in_plane;
                    for (std::int64_t kx = 0; kx < g.k[0]; ++kx) {
                        const std::int64_t ix = ox * stride[0] - padding[0] + kx;
                        if (ix < 0 || ix >= g.in[0]) continue;
                        for (std::int64_t ky = 0; ky < g.k[1]; ++ky) {
                            const std::int64_t iy = oy * stride[1] - padding[1] + ky;
                            if (iy < 0 || iy >= g.in[1]) continue;
                            for (std::int64_t kz = 0; kz < g.k[2]; ++kz) {
                                const std::int64_t iz = oz * stride[2] - padding[2] + kz;
                                if (iz < 0 || iz >= g.in[2]) continue;
                                acc += wk[(kx * g.k[1] + ky) * g.k[2] + kz] *
                                       src[(ix * g.in[1] + iy) * g.in[2] + iz];
                            }
                        }
                    }
                }
                o[((co * g.out[0] + ox) * g.out[1] + oy) * g.out[2] + oz] = acc;
            }
        }
    });
    return out;
}

Tensor conv_transpose3d(const Tensor& volume, const Tensor& weights, Triple stride,
                        Triple padding, std::span<const float> bias) {
    check_conv_args(volume, weights, stride, padding, bias, weights.rank() == 5 ? weights.extent(1) : 0,
                    "conv_transpose3d");
    ConvGeometry g{};
    g.cin = volume.extent(0);
    g.cout = weights.extent(1);
    if (weights.extent(0) != g.cin) {
        throw InvalidArgument("conv_transpose3d: weights " + weights.shape_string() +
                              " do not match volume " + volume.shape_string());
    }
    for (int a = 0; a < 3; ++a) {
        g.in[a] = volume.extent(a + 1);
        g.k[a] = weights.extent(a + 2);
        if (g.k[a] < 1) throw InvalidArgument("conv_transpose3d: empty kernel");
        g.out[a] = (g.in[a] - 1) * stride[a] - 2 * padding[a] + g.k[a];
        if (g.out[a] < 1) throw InvalidArgument("conv_transpose3d: empty output");
    }

    Tensor out({g.cout, g.out[0], g.out[1], g.out[2]});
    const float* in = volume.data().data();
    const float* w = weights.data().data();
    float* o = out.data().data();
    const std::int64_t in_plane = g.in[0] * g.in[1] * g.in[2];
    const std::int64_t k_vol = g.k[0] * g.k[1] * g.k[2];

    // Gather form: each output cell sums its contributions in a fixed order.
    parallel_for(0, g.cout * g.out[0], [&](std::int64_t job) {
        const std::int64_t co = job / g.out[0];
        const std::int64_t ox = job % g.out[0];
        for (std::int64_t oy = 0; oy < g.out[1]; ++oy) {
            for (std::int64_t oz = 0; oz < g.out[2]; ++oz) {
                float acc = bias.empty() ? 0.0f : bias[static_cast<std::size_t>(co)];
                for (std::int64_t ci = 0; ci < g.cin; ++ci) {
                    const float* wk = w + (ci * g.cout + co) * k_vol;
                    const float* src = in + ci * in_plane;
                    for (std::int64_t kx = 0; kx < g.k[0]; ++kx) {
                        const std::int64_t nx = ox + padding[0] - kx;
                        if (nx < 0 || nx % stride[0] != 0) continue;
                        const std::int64_t ix = nx / stride[0];
                        if (ix >= g.in[0]) continue;
                        for (std::int64_t ky = 0; ky < g.k[1]; ++ky) {
                            const std::int64_t ny = oy + padding[1] - ky;
                            if (ny < 0 || ny % stride[1] != 0) continue;
                            const std::int64_t iy = ny / stride[1];
                            if (iy >= g.in[1]) continue;
                            for (std::int64_t kz = 0; kz < g.k[2]; ++kz) {
                                const std::int64_t nz = oz + padding[2] - kz;
                                if (nz < 0 || nz % stride[2] != 0) continue;
                                const std::int64_t iz = nz / stride[2];
                                if (iz >= g.in[2]) continue;
                                acc += wk[(kx * g.k[1] + ky) * g.k[2] + kz] *
                                       src[(ix * g.in[1] + iy) * g.in[2] + iz];
                            }
                        }
                    }
                }
                o[((co * g.out[0] + ox) * g.out[1] + oy) * g.out[2] + oz] = acc;
            }
        }
    });
    return out;
}

Tensor avg_pool2d(const Tensor& map, int factor) {
    if (factor < 1) throw InvalidArgument("avg_pool2d: factor must be >= 1");
    if (map.rank() != 3) throw InvalidArgument("avg_pool2d: map must be [C, H, W]");
    const std::int64_t c = map.extent(0), h = map.extent(1), w = map.extent(2);
    const std::int64_t oh = (h + factor - 1) / factor, ow = (w + factor - 1) / factor;
    Tensor out({c, oh, ow});
    for (std::int64_t ch = 0; ch < c; ++ch) {
        for (std::int64_t y = 0; y < oh; ++y) {
            for (std::int64_t x = 0; x < ow; ++x) {
                double sum = 0.0;
                std::int64_t count = 0;
                for (std::int64_t yy = y * factor; yy < std::min(h, (y + 1) * factor); ++yy) {
                    for (std::int64_t xx = x * factor; xx < std::min(w, (x + 1) * factor); ++xx) {
                        sum += map.at(ch, yy, xx);
                        ++count;
                    }
                }
                out.at(ch, y, x) = static_cast<float>(sum / static_cast<double>(count));
            }
        }
    }
    return out;
}

void bilinear_sample_into(const Tensor& map, float x, float y, std::span<float> out) {
    const std::int64_t c = map.extent(0), h = map.extent(1), w = map.extent(2);
    const float fx0 = std::floor(x), fy0 = std::floor(y);
    const float ax = x - fx0, ay = y - fy0;
    const auto x0 = static_cast<std::int64_t>(fx0), y0 = static_cast<std::int64_t>(fy0);
    const float wts[4] = {(1.0f - ax) * (1.0f - ay), ax * (1.0f - ay), (1.0f - ax) * ay, ax * ay};
    const std::int64_t xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const std::int64_t ys[4] = {y0, y0, y0 + 1, y0 + 1};
    std::fill(out.begin(), out.begin() + c, 0.0f);
    const std::int64_t plane = h * w;
    const float* base = map.data().data();
    for (int n = 0; n < 4; ++n) {
        if (wts[n] == 0.0f) continue;
        if (xs[n] < 0 || xs[n] >= w || ys[n] < 0 || ys[n] >= h) continue;
        const float* p = base + ys[n] * w + xs[n];
        for (std::int64_t ch = 0; ch < c; ++ch) out[static_cast<std::size_t>(ch)] += wts[n] * p[ch * plane];
    }
}

std::vector<float> bilinear_sample(const Tensor& map, float x, float y) {
    if (map.rank() != 3) throw InvalidArgument("bilinear_sample: map must be [C, H, W]");
    std::vector<float> out(static_cast<std::size_t>(map.extent(0)));
    bilinear_sample_into(map, x, y, out);
    return out;
}

}  // namespace hcv
