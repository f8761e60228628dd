#include "hcv/memory.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "hcv/errors.hpp"
#include "hcv/features.hpp"
#include "hcv/global_cost.hpp"
#include "hcv/local_cost.hpp"
#include "hcv/synthetic.hpp"
#include "hcv/volume_buffer.hpp"

namespace hcv {

void MemoryPlan::add(std::string name, std::int64_t elements, std::int64_t bytes, bool mask) {
    buffers.push_back({std::move(name), elements, bytes, mask});
    if (!mask) total_elements += elements;
    total_bytes += bytes;
}

MemoryPlan count_allpairs(int image_h, int image_w, int levels) {
    if (image_h < 1 || image_w < 1 || levels < 1 || levels > 16) {
        throw InvalidArgument("count_allpairs: bad extents or level count");
    }
    const auto n = static_cast<std::int64_t>(ceil_div(image_h, 8)) * ceil_div(image_w, 8);
    const auto base = static_cast<unsigned __int128>(n) * static_cast<unsigned __int128>(n);
    // base * sum_{i<L} 4^-i == base * (4^L - 1) / (3 * 4^(L-1)), floored.
    const unsigned __int128 num = base * ((static_cast<unsigned __int128>(1) << (2 * levels)) - 1);
    const unsigned __int128 den = static_cast<unsigned __int128>(3) << (2 * (levels - 1));
    const auto elements = static_cast<std::int64_t>(num / den);

    MemoryPlan plan;
    plan.method = "allpairs";
    plan.add(levels == 1 ? "correlation" : "correlation_pyramid", elements, 4 * elements);
    return plan;
}

MemoryPlan count_hcv(int image_h, int image_w, const RunConfig& cfg) {
    if (image_h < 1 || image_w < 1) throw InvalidArgument("count_hcv: bad extents");
    const std::int64_t h16 = ceil_div(image_h, 16), w16 = ceil_div(image_w, 16);
    const std::int64_t h8 = ceil_div(image_h, 8), w8 = ceil_div(image_w, 8);
    const std::int64_t dh = cfg.resolved_d_h(static_cast<int>(w16));
    const std::int64_t dv = cfg.resolved_d_v(static_cast<int>(h16));
    const std::int64_t k = cfg.k;
    const std::int64_t win = 2 * static_cast<std::int64_t>(cfg.l_r) + 1;

    const std::int64_t slots_h = h16 * w16 * 2 * dh;
    const std::int64_t slots_v = h16 * w16 * 2 * dv;
    auto bits_to_bytes = [](std::int64_t bits) { return (bits + 7) / 8; };

    MemoryPlan plan;
    plan.method = "hcv";
    plan.add("topk_scores_h", slots_h * k, 4 * slots_h * k);
    plan.add("topk_indices_h", slots_h * k, 4 * slots_h * k);
    plan.add("topk_scores_v", slots_v * k, 4 * slots_v * k);
    plan.add("topk_indices_v", slots_v * k, 4 * slots_v * k);
    plan.add("aggregated_h", slots_h, 4 * slots_h);
    plan.add("aggregated_v", slots_v, 4 * slots_v);
    plan.add("local", h8 * w8 * win * win, 4 * h8 * w8 * win * win);
    plan.add("topk_mask_h", slots_h, bits_to_bytes(slots_h), true);
    plan.add("topk_mask_v", slots_v, bits_to_bytes(slots_v), true);
    plan.add("aggregated_mask_h", slots_h, bits_to_bytes(slots_h), true);
    plan.add("aggregated_mask_v", slots_v, bits_to_bytes(slots_v), true);
    return plan;
}

std::string format_plan(const MemoryPlan& plan) {
    std::string out = "plan " + plan.method + "\n";
    char buf[256];
    for (const auto& b : plan.buffers) {
        std::snprintf(buf, sizeof buf, "  %-20s %16lld %s %16lld bytes\n", b.name.c_str(),
                      static_cast<long long>(b.elements), b.mask ? "bits    " : "elements",
                      static_cast<long long>(b.bytes));
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "  %-20s %16lld elements %16lld bytes (%.3f GB)\n", "total",
                  static_cast<long long>(plan.total_elements),
                  static_cast<long long>(plan.total_bytes),
                  static_cast<double>(plan.total_bytes) / 1e9);
    out += buf;
    return out;
}

namespace {

class CapGuard {
public:
    explicit CapGuard(std::int64_t cap) : previous_(VolumeTracker::cap()) { VolumeTracker::set_cap(cap); }
    ~CapGuard() { VolumeTracker::set_cap(previous_); }
    CapGuard(const CapGuard&) = delete;
    CapGuard& operator=(const CapGuard&) = delete;

private:
    std::int64_t previous_;
};

std::int64_t run_hcv(const PeakRequest& req) {
    const SyntheticPair pair = make_synthetic_pair(req.image_w, req.image_h, 3, 2, req.seed);
    const auto [f1_8, f1_16] = build_pyramid(pair.first);
    const auto [f2_8, f2_16] = build_pyramid(pair.second);
    const RunConfig& cfg = req.cfg;
    cfg.validate(f1_16.height(), f1_16.width());
    const AggWeights weights = cfg.weights.empty() ? AggWeights::smoothing(cfg.k) : read_hcvw(cfg.weights);

    const std::int64_t baseline = VolumeTracker::live_bytes();
    VolumeTracker::reset_peak();
    std::int64_t peak = 0;
    {
        CapGuard cap(req.cap_bytes > 0 ? baseline + req.cap_bytes : 0);
        const TopkCostVolume th = build_topk_volume(f1_16, f2_16, Axis::horizontal,
                                                    cfg.resolved_d_h(f1_16.width()), cfg.k);
        const TopkCostVolume tv = build_topk_volume(f1_16, f2_16, Axis::vertical,
                                                    cfg.resolved_d_v(f1_16.height()), cfg.k);
        const AggregatedCostVolume ah = aggregate(th, weights);
        const AggregatedCostVolume av = aggregate(tv, weights);
        const LocalCostVolume local = build_local_volume(f1_8, f2_8, cfg.l_r);
        peak = VolumeTracker::peak_bytes() - baseline;
    }
    return peak;
}

std::int64_t run_allpairs(const PeakRequest& req) {
    const std::int64_t needed = count_allpairs(req.image_h, req.image_w, 1).total_bytes;
    if (req.cap_bytes > 0 && needed > req.cap_bytes) {
        throw BudgetExceeded("all-pairs volume needs " + std::to_string(needed) +
                             " bytes, cap is " + std::to_string(req.cap_bytes));
    }
    const SyntheticPair pair = make_synthetic_pair(req.image_w, req.image_h, 3, 2, req.seed);
    const FeatureMap f1 = extract_features(pair.first, 8);
    const FeatureMap f2 = extract_features(pair.second, 8);
    const int h = f1.height(), w = f1.width(), c = f1.channels();
    const std::int64_t n = static_cast<std::int64_t>(h) * w;
    const float sqrt_c = std::sqrt(static_cast<float>(c));

    const std::int64_t baseline = VolumeTracker::live_bytes();
    VolumeTracker::reset_peak();
    CapGuard cap(req.cap_bytes > 0 ? baseline + req.cap_bytes : 0);
    VolumeVector<float> volume(static_cast<std::size_t>(n * n));
    const float* a = f1.data.data().data();
    const float* b = f2.data.data().data();
    for (std::int64_t p = 0; p < n; ++p) {
        for (std::int64_t q = 0; q < n; ++q) {
            float acc = 0.0f;
            for (int ch = 0; ch < c; ++ch) acc += a[ch * n + p] * b[ch * n + q];
            volume[static_cast<std::size_t>(p * n + q)] = acc / sqrt_c;
        }
    }
    return VolumeTracker::peak_bytes() - baseline;
}

}  // namespace

std::int64_t measure_peak(const PeakRequest& request) {
    return request.scenario == Scenario::hcv ? run_hcv(request) : run_allpairs(request);
}

}  // namespace hcv
