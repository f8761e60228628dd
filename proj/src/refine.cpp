#include "hcv/refine.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "hcv/errors.hpp"
#include "hcv/numerics.hpp"
#include "hcv/parallel.hpp"

namespace hcv {

namespace {

// Linear interpolation of a pixel's score line at displacement `pos`.
float sample_line(const AggregatedCostVolume& vol, int y, int x, float pos) {
    const float t = pos + static_cast<float>(vol.max_disp());
    const float ft0 = std::floor(t);
    const float a = t - ft0;
    if (!std::isfinite(ft0) || std::fabs(ft0) > 1e8f) return 0.0f;
    const int t0 = static_cast<int>(ft0);
    const int nd = vol.disp_count();
    float acc = 0.0f;
    const int idx[2] = {t0, t0 + 1};
    const float wts[2] = {1.0f - a, a};
    for (int n = 0; n < 2; ++n) {
        if (wts[n] == 0.0f || idx[n] < 0 || idx[n] >= nd || !vol.valid(y, x, idx[n])) continue;
        acc += wts[n] * vol.score(y, x, idx[n]);
    }
    return acc;
}

}  // namespace

Tensor lookup_global(const AggregatedCostVolume& horizontal, const AggregatedCostVolume& vertical,
                     const FlowField& flow, int radius) {
    const int h = horizontal.height(), w = horizontal.width();
    if (vertical.height() != h || vertical.width() != w || flow.height() != h ||
        flow.width() != w) {
        throw InvalidArgument("lookup_global: volume and flow extents differ");
    }
    if (radius < 0) throw InvalidArgument("lookup_global: radius must be >= 0");
    const int taps = 2 * radius + 1;
    Tensor out({h, w, 2 * taps});
    parallel_for(0, h, [&](std::int64_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            const float u = flow.u.at(y, x), v = flow.v.at(y, x);
            for (int i = 0; i < taps; ++i) {
                const auto delta = static_cast<float>(i - radius);
                out.at(y, x, i) = sample_line(horizontal, y, x, u + delta);
                out.at(y, x, taps + i) = sample_line(vertical, y, x, v + delta);
            }
        }
    });
    return out;
}

std::vector<FlowField> refine_flow(const FeatureMap& f1, const FeatureMap& f2,
                                   const FlowField& seed, const RefineOptions& options) {
    if (options.iters < 1) throw InvalidArgument("refine_flow: iters must be >= 1");
    if (options.radius < 1) throw InvalidArgument("refine_flow: radius must be >= 1");
    if (!(options.damping >= 0.0f && options.damping <= 1.0f)) {
        throw InvalidArgument("refine_flow: damping must lie in [0, 1]");
    }
    if (!(options.temperature > 0.0f)) {
        throw InvalidArgument("refine_flow: temperature must be positive");
    }
    if (seed.height() != f1.height() || seed.width() != f1.width()) {
        throw InvalidArgument("refine_flow: seed extents do not match the feature grid");
    }

    const int h = f1.height(), w = f1.width(), r = options.radius, win = 2 * r + 1;
    const int n_off = win * win;
    std::optional<LocalCostVolume> fixed;
    if (options.lookup == LocalLookup::fixed) fixed.emplace(build_local_volume(f1, f2, r));

    std::vector<FlowField> seq;
    seq.reserve(static_cast<std::size_t>(options.iters));
    FlowField current = seed;
    current.level = f1.level;
    current.valid.clear();
    for (int it = 0; it < options.iters; ++it) {
        const Tensor scores = fixed ? lookup_local_in_volume(*fixed, current)
                                    : lookup_local_at_flow(f1, f2, current, r);
        FlowField next = current;
        parallel_for(0, h, [&](std::int64_t row) {
            const int y = static_cast<int>(row);
            std::vector<float> prob(static_cast<std::size_t>(n_off));
            for (int x = 0; x < w; ++x) {
                const std::span<const float> s(
                    scores.data().data() + (static_cast<std::size_t>(y) * w + x) * n_off,
                    static_cast<std::size_t>(n_off));
                masked_softmax_into(s, {}, options.temperature, prob);
                double du = 0.0, dv = 0.0;
                int o = 0;
                for (int dy = -r; dy <= r; ++dy) {
                    for (int dx = -r; dx <= r; ++dx, ++o) {
                        du += dx * static_cast<double>(prob[static_cast<std::size_t>(o)]);
                        dv += dy * static_cast<double>(prob[static_cast<std::size_t>(o)]);
                    }
                }
                next.u.at(y, x) = current.u.at(y, x) + options.damping * static_cast<float>(du);
                next.v.at(y, x) = current.v.at(y, x) + options.damping * static_cast<float>(dv);
            }
        });
        current = std::move(next);
        seq.push_back(current);
    }
    return seq;
}

FlowField resize_flow(const FlowField& flow, int out_h, int out_w, int scale) {
    if (out_h < 1 || out_w < 1 || scale < 1) throw InvalidArgument("resize_flow: bad target size");
    const int h = flow.height(), w = flow.width();
    Tensor stacked({2, h, w});
    std::copy(flow.u.data().begin(), flow.u.data().end(), stacked.data().begin());
    std::copy(flow.v.data().begin(), flow.v.data().end(), stacked.data().begin() + h * w);

    FlowField out(out_h, out_w, std::max(1, flow.level / scale));
    const float s = static_cast<float>(scale);
    parallel_for(0, out_h, [&](std::int64_t row) {
        const int y = static_cast<int>(row);
        float uv[2];
        for (int x = 0; x < out_w; ++x) {
            const float sx = std::clamp((static_cast<float>(x) + 0.5f) / s - 0.5f, 0.0f,
                                        static_cast<float>(w - 1));
            const float sy = std::clamp((static_cast<float>(y) + 0.5f) / s - 0.5f, 0.0f,
                                        static_cast<float>(h - 1));
            bilinear_sample_into(stacked, sx, sy, uv);
            out.u.at(y, x) = uv[0] * s;
            out.v.at(y, x) = uv[1] * s;
        }
    });
    return out;
}

FlowField seed_from_init(const FlowField& init, int out_h, int out_w) {
    return resize_flow(init, out_h > 0 ? out_h : 2 * init.height(),
                       out_w > 0 ? out_w : 2 * init.width(), 2);
}

FlowField upsample_flow(const FlowField& flow, int out_h, int out_w) {
    return resize_flow(flow, out_h > 0 ? out_h : 8 * flow.height(),
                       out_w > 0 ? out_w : 8 * flow.width(), 8);
}

}  // namespace hcv
