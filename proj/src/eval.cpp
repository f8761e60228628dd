#include "hcv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "hcv/errors.hpp"

namespace hcv {

namespace {

constexpr double kBandEdge = 40.0;

void check_fields(const FlowField& pred, const FlowField& gt, std::span<const std::uint8_t> mask,
                  const char* op) {
    if (pred.u.shape() != gt.u.shape() || pred.v.shape() != gt.v.shape() ||
        pred.u.shape() != pred.v.shape()) {
        throw InvalidArgument(std::string(op) + ": prediction and ground truth extents differ");
    }
    if (!mask.empty() && mask.size() != pred.u.size()) {
        throw InvalidArgument(std::string(op) + ": mask length does not match the field");
    }
}

// Pixel indices selected by the explicit mask and the ground-truth validity.
std::vector<std::size_t> selected(const FlowField& gt, std::span<const std::uint8_t> mask,
                                  const char* op) {
    std::vector<std::size_t> idx;
    const std::size_t n = gt.u.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask.empty() && mask[i] == 0) continue;
        if (!gt.valid.empty() && gt.valid[i] == 0) continue;
        idx.push_back(i);
    }
    if (idx.empty()) throw InvalidArgument(std::string(op) + ": mask selects no pixels");
    return idx;
}

double endpoint_error(const FlowField& pred, const FlowField& gt, std::size_t i) {
    const double du = static_cast<double>(pred.u[i]) - gt.u[i];
    const double dv = static_cast<double>(pred.v[i]) - gt.v[i];
    return std::sqrt(du * du + dv * dv);
}

double l1_mean(const FlowField& pred, const FlowField& gt, std::span<const std::uint8_t> mask,
               const char* op) {
    check_fields(pred, gt, mask, op);
    const auto idx = selected(gt, mask, op);
    double sum = 0.0;
    for (std::size_t i : idx) {
        sum += std::fabs(static_cast<double>(pred.u[i]) - gt.u[i]) +
               std::fabs(static_cast<double>(pred.v[i]) - gt.v[i]);
    }
    return sum / static_cast<double>(idx.size());
}

}  // namespace

MetricReport epe(const FlowField& pred, const FlowField& gt, std::span<const std::uint8_t> mask) {
    check_fields(pred, gt, mask, "epe");
    const auto idx = selected(gt, mask, "epe");
    MetricReport r;
    std::vector<double> errors;
    errors.reserve(idx.size());
    double sum = 0.0, sum_lo = 0.0, sum_hi = 0.0;
    for (std::size_t i : idx) {
        const double e = endpoint_error(pred, gt, i);
        errors.push_back(e);
        sum += e;
        const double mag = std::hypot(static_cast<double>(gt.u[i]), static_cast<double>(gt.v[i]));
        if (mag <= kBandEdge) {
            sum_lo += e;
            ++r.count_s0_40;
        } else {
            sum_hi += e;
            ++r.count_s40_plus;
        }
    }
    r.pixel_count = static_cast<std::int64_t>(idx.size());
    r.epe_mean = sum / static_cast<double>(idx.size());
    r.epe_s0_40 = r.count_s0_40 ? sum_lo / static_cast<double>(r.count_s0_40) : 0.0;
    r.epe_s40_plus = r.count_s40_plus ? sum_hi / static_cast<double>(r.count_s40_plus) : 0.0;

    std::sort(errors.begin(), errors.end());
    const std::size_t n = errors.size();
    r.epe_median = n % 2 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
    return r;
}

double f1_all(const FlowField& pred, const FlowField& gt, std::span<const std::uint8_t> mask) {
    check_fields(pred, gt, mask, "f1_all");
    const auto idx = selected(gt, mask, "f1_all");
    std::size_t outliers = 0;
    for (std::size_t i : idx) {
        const double e = endpoint_error(pred, gt, i);
        const double mag = std::hypot(static_cast<double>(gt.u[i]), static_cast<double>(gt.v[i]));
        if (e > 3.0 && e > 0.05 * mag) ++outliers;
    }
    return 100.0 * static_cast<double>(outliers) / static_cast<double>(idx.size());
}

MetricReport evaluate(const FlowField& pred, const FlowField& gt,
                      std::span<const std::uint8_t> mask) {
    MetricReport r = epe(pred, gt, mask);
    r.f1_all = f1_all(pred, gt, mask);
    return r;
}

std::string format_report(const MetricReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "epe=%.6f\nepe_median=%.6f\nf1_all=%.4f\npixel_count=%lld\n"
                  "epe_s0_40=%.6f\ncount_s0_40=%lld\nepe_s40_plus=%.6f\ncount_s40_plus=%lld\n",
                  r.epe_mean, r.epe_median, r.f1_all, static_cast<long long>(r.pixel_count),
                  r.epe_s0_40, static_cast<long long>(r.count_s0_40), r.epe_s40_plus,
                  static_cast<long long>(r.count_s40_plus));
    return buf;
}

double loss_init(const FlowField& init, const FlowField& gt, std::span<const std::uint8_t> mask) {
    return l1_mean(init, gt, mask, "loss_init");
}

std::vector<double> loss_iter_weights(std::size_t n, double gamma) {
    if (n == 0) throw InvalidArgument("loss_iter: empty prediction sequence");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("loss_iter: gamma must lie in (0, 1]");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(gamma, static_cast<double>(n - 1 - i));
    return w;
}

double loss_iter(const std::vector<FlowField>& sequence, const FlowField& gt, double gamma,
                 std::span<const std::uint8_t> mask) {
    const auto w = loss_iter_weights(sequence.size(), gamma);
    double total = 0.0;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        total += w[i] * l1_mean(sequence[i], gt, mask, "loss_iter");
    }
    return total;
}

}  // namespace hcv
