#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcv/flow_field.hpp"

namespace hcv {

struct MetricReport {
    double epe_mean = 0.0;
    double epe_median = 0.0;
    double f1_all = 0.0;  // percent
    std::int64_t pixel_count = 0;
    double epe_s0_40 = 0.0;  // mean EPE where |gt| <= 40 px
    double epe_s40_plus = 0.0;
    std::int64_t count_s0_40 = 0;
    std::int64_t count_s40_plus = 0;
};

/// Empty mask means "all pixels"; it is combined with gt.valid when present.
MetricReport epe(const FlowField& pred, const FlowField& gt,
                 std::span<const std::uint8_t> mask = {});

/// Percentage of pixels with EPE > 3 px and EPE > 5% of |gt|.
double f1_all(const FlowField& pred, const FlowField& gt, std::span<const std::uint8_t> mask = {});

/// epe() with f1_all filled in.
MetricReport evaluate(const FlowField& pred, const FlowField& gt,
                      std::span<const std::uint8_t> mask = {});

/// Flat `key=value` lines.
std::string format_report(const MetricReport& report);

/// Mean over masked pixels of |du| + |dv|.
double loss_init(const FlowField& init, const FlowField& gt, std::span<const std::uint8_t> mask = {});

/// gamma^(N-1-i) for i in [0, N).
std::vector<double> loss_iter_weights(std::size_t n, double gamma);

double loss_iter(const std::vector<FlowField>& sequence, const FlowField& gt, double gamma,
                 std::span<const std::uint8_t> mask = {});

inline double loss_total(double l_init, double l_iter) { return l_init + l_iter; }

}  // namespace hcv
