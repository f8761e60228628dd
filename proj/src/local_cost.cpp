#include "hcv/local_cost.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "hcv/errors.hpp"
#include "hcv/numerics.hpp"
#include "hcv/parallel.hpp"

namespace hcv {

namespace {

void check_maps(const FeatureMap& f1, const FeatureMap& f2, int radius, const char* op) {
    if (f1.level != f2.level || f1.data.shape() != f2.data.shape()) {
        throw InvalidArgument(std::string(op) + ": feature maps differ in level or shape");
    }
    if (radius < 1) throw InvalidArgument(std::string(op) + ": radius must be >= 1");
}

void check_flow(const FlowField& flow, int h, int w, const char* op) {
    if (flow.height() != h || flow.width() != w) {
        throw InvalidArgument(std::string(op) + ": flow extents do not match the feature grid");
    }
}

}  // namespace

LocalCostVolume::LocalCostVolume(int height, int width, int radius)
    : height_(height), width_(width), radius_(radius) {
    if (height < 1 || width < 1 || radius < 0) {
        throw InvalidArgument("LocalCostVolume: bad extents or radius");
    }
    scores_.assign(static_cast<std::size_t>(height) * width * offsets(), 0.0f);
    if (scores_.size() != static_cast<std::size_t>(height) * width * window() * window()) {
        throw std::logic_error("LocalCostVolume storage does not match H*W*(2r+1)^2");
    }
}

LocalCostVolume build_local_volume(const FeatureMap& f1, const FeatureMap& f2, int radius) {
    check_maps(f1, f2, radius, "build_local_volume");
    const int h = f1.height(), w = f1.width(), c = f1.channels();
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    const float sqrt_c = std::sqrt(static_cast<float>(c));
    const float* a = f1.data.data().data();
    const float* b = f2.data.data().data();

    LocalCostVolume vol(h, w, radius);
    parallel_for(0, h, [&](std::int64_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            auto out = vol.scores_at(y, x);
            std::size_t o = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx, ++o) {
                    const int ty = y + dy, tx = x + dx;
                    if (ty < 0 || ty >= h || tx < 0 || tx >= w) {
                        out[o] = 0.0f;
                        continue;
                    }
                    float acc = 0.0f;
                    for (int ch = 0; ch < c; ++ch) {
                        acc += a[ch * plane + static_cast<std::int64_t>(y) * w + x] *
                               b[ch * plane + static_cast<std::int64_t>(ty) * w + tx];
                    }
                    out[o] = acc / sqrt_c;
                }
            }
        }
    });
    return vol;
}

Tensor lookup_local_at_flow(const FeatureMap& f1, const FeatureMap& f2, const FlowField& flow,
                            int radius) {
    check_maps(f1, f2, radius, "lookup_local_at_flow");
    const int h = f1.height(), w = f1.width(), c = f1.channels();
    check_flow(flow, h, w, "lookup_local_at_flow");
    const int win = 2 * radius + 1;
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    const float sqrt_c = std::sqrt(static_cast<float>(c));
    const float* a = f1.data.data().data();

    Tensor out({h, w, win * win});
    parallel_for(0, h, [&](std::int64_t row) {
        const int y = static_cast<int>(row);
        std::vector<float> sample(static_cast<std::size_t>(c));
        for (int x = 0; x < w; ++x) {
            const float cx = static_cast<float>(x) + flow.u.at(y, x);
            const float cy = static_cast<float>(y) + flow.v.at(y, x);
            std::int64_t o = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx, ++o) {
                    bilinear_sample_into(f2.data, cx + static_cast<float>(dx),
                                         cy + static_cast<float>(dy), sample);
                    float acc = 0.0f;
                    for (int ch = 0; ch < c; ++ch) {
                        acc += a[ch * plane + static_cast<std::int64_t>(y) * w + x] *
                               sample[static_cast<std::size_t>(ch)];
                    }
                    out.at(y, x, o) = acc / sqrt_c;
                }
            }
        }
    });
    return out;
}

Tensor lookup_local_in_volume(const LocalCostVolume& volume, const FlowField& flow) {
    const int h = volume.height(), w = volume.width(), r = volume.radius(), win = volume.window();
    check_flow(flow, h, w, "lookup_local_in_volume");
    Tensor out({h, w, win * win});
    parallel_for(0, h, [&](std::int64_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            const float fu = flow.u.at(y, x), fv = flow.v.at(y, x);
            std::int64_t o = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx, ++o) {
                    const float px = fu + static_cast<float>(dx);
                    const float py = fv + static_cast<float>(dy);
                    const float fx0 = std::floor(px), fy0 = std::floor(py);
                    const float ax = px - fx0, ay = py - fy0;
                    const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
                    const float wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
                    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
                    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
                    float acc = 0.0f;
                    for (int n = 0; n < 4; ++n) {
                        if (wts[n] == 0.0f) continue;
                        if (xs[n] < -r || xs[n] > r || ys[n] < -r || ys[n] > r) continue;
                        acc += wts[n] * volume.score(y, x, ys[n], xs[n]);
                    }
                    out.at(y, x, o) = acc;
                }
            }
        }
    });
    return out;
}

}  // namespace hcv
