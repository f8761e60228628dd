#include "hcv/pipeline.hpp"

#include <chrono>

#include "hcv/errors.hpp"
#include "hcv/features.hpp"
#include "hcv/global_cost.hpp"
#include "hcv/parallel.hpp"
#include "hcv/refine.hpp"

namespace hcv {

namespace {

class StageTimer {
public:
    explicit StageTimer(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}

    void lap(std::string name) {
        const auto now = std::chrono::steady_clock::now();
        sink_.emplace_back(std::move(name),
                           std::chrono::duration<double, std::milli>(now - last_).count());
        last_ = now;
    }

private:
    std::vector<std::pair<std::string, double>>& sink_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

EstimateResult estimate(const Image& first, const Image& second, const RunConfig& cfg) {
    if (first.width != second.width || first.height != second.height) {
        throw InvalidArgument("estimate: frames differ in size");
    }
    if (cfg.threads > 0) set_num_threads(cfg.threads);

    EstimateResult result;
    StageTimer timer(result.stage_ms);

    const auto [f1_8, f1_16] = build_pyramid(first);
    const auto [f2_8, f2_16] = build_pyramid(second);
    cfg.validate(f1_16.height(), f1_16.width());
    const AggWeights weights = cfg.weights.empty() ? AggWeights::smoothing(cfg.k) : read_hcvw(cfg.weights);
    timer.lap("features");

    const TopkCostVolume topk_h = build_topk_volume(f1_16, f2_16, Axis::horizontal,
                                                    cfg.resolved_d_h(f1_16.width()), cfg.k);
    const TopkCostVolume topk_v = build_topk_volume(f1_16, f2_16, Axis::vertical,
                                                    cfg.resolved_d_v(f1_16.height()), cfg.k);
    timer.lap("topk_volumes");

    const AggregatedCostVolume agg_h = aggregate(topk_h, weights);
    const AggregatedCostVolume agg_v = aggregate(topk_v, weights);
    timer.lap("aggregation");

    result.init = initial_flow(agg_h, agg_v, cfg.temperature);
    timer.lap("initial_flow");

    const FlowField seed = seed_from_init(result.init, f1_8.height(), f1_8.width());
    RefineOptions opts;
    opts.iters = cfg.iters;
    opts.radius = cfg.l_r;
    opts.temperature = cfg.temperature;
    opts.damping = cfg.damping;
    opts.lookup = cfg.lookup;
    result.iterations = refine_flow(f1_8, f2_8, seed, opts);
    timer.lap("refine");

    result.flow = upsample_flow(result.iterations.back(), first.height, first.width);
    timer.lap("upsample");

    result.plan = count_hcv(first.height, first.width, cfg);
    return result;
}

}  // namespace hcv
