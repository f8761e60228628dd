#include "hcv/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hcv/global_cost.hpp"
#include "hcv/local_cost.hpp"
#include "hcv/numerics.hpp"
#include "rng.hpp"

namespace hcv {

namespace {

using detail::SplitMix64;

FeatureMap random_unit_map(SplitMix64& rng, int h, int w, int c, int level) {
    FeatureMap fm;
    fm.level = level;
    fm.data = Tensor({c, h, w});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::vector<float> v(static_cast<std::size_t>(c));
            float n2 = 0.0f;
            for (float& e : v) {
                e = static_cast<float>(rng.uniform(-1.0, 1.0));
                n2 += e * e;
            }
            const float inv = 1.0f / std::sqrt(n2);
            for (int ch = 0; ch < c; ++ch) fm.data.at(ch, y, x) = v[static_cast<std::size_t>(ch)] * inv;
        }
    }
    return fm;
}

float ref_corr(const FeatureMap& a, const FeatureMap& b, int y1, int x1, int y2, int x2) {
    const int c = a.channels();
    float acc = 0.0f;
    for (int ch = 0; ch < c; ++ch) acc += a.data.at(ch, y1, x1) * b.data.at(ch, y2, x2);
    return acc / std::sqrt(static_cast<float>(c));
}

// Dense 4D volume [y1][x1][y2][x2] followed by stable sort per (pixel, displacement).
bool check_topk_case(SplitMix64& rng) {
    const int h = rng.integer(1, 8), w = rng.integer(1, 8), c = rng.integer(2, 11);
    const FeatureMap f1 = random_unit_map(rng, h, w, c, 16);
    const FeatureMap f2 = random_unit_map(rng, h, w, c, 16);
    std::vector<float> dense(static_cast<std::size_t>(h * w * h * w));
    for (int y1 = 0; y1 < h; ++y1)
        for (int x1 = 0; x1 < w; ++x1)
            for (int y2 = 0; y2 < h; ++y2)
                for (int x2 = 0; x2 < w; ++x2)
                    dense[static_cast<std::size_t>(((y1 * w + x1) * h + y2) * w + x2)] =
                        ref_corr(f1, f2, y1, x1, y2, x2);

    for (Axis axis : {Axis::horizontal, Axis::vertical}) {
        const int cands = axis == Axis::horizontal ? h : w;
        const int d_max = rng.integer(1, std::max(h, w));
        for (int k : {1, 2, 4}) {
            if (k > cands) continue;
            const TopkCostVolume vol = build_topk_volume(f1, f2, axis, d_max, k);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    for (int j = 0; j < 2 * d_max; ++j) {
                        const int d = j - d_max;
                        const int tx = x + d, ty = y + d;
                        const bool ok = axis == Axis::horizontal ? (tx >= 0 && tx < w) : (ty >= 0 && ty < h);
                        if (vol.valid(y, x, j) != ok) return false;
                        if (!ok) continue;
                        std::vector<std::pair<float, int>> line;
                        for (int i = 0; i < cands; ++i) {
                            const int y2 = axis == Axis::horizontal ? i : ty;
                            const int x2 = axis == Axis::horizontal ? tx : i;
                            line.emplace_back(dense[static_cast<std::size_t>(((y * w + x) * h + y2) * w + x2)], i);
                        }
                        std::stable_sort(line.begin(), line.end(),
                                         [](const auto& a, const auto& b) { return a.first > b.first; });
                        const auto s = vol.scores_at(y, x, j);
                        const auto ix = vol.indices_at(y, x, j);
                        for (int r = 0; r < k; ++r) {
                            if (s[static_cast<std::size_t>(r)] != line[static_cast<std::size_t>(r)].first ||
                                ix[static_cast<std::size_t>(r)] != line[static_cast<std::size_t>(r)].second) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    return true;
}

bool check_local_case(SplitMix64& rng) {
    const int h = rng.integer(1, 16), w = rng.integer(1, 16), c = rng.integer(2, 11);
    const int radii[3] = {1, 2, 4};
    const int r = radii[rng.integer(0, 2)];
    const FeatureMap f1 = random_unit_map(rng, h, w, c, 8);
    const FeatureMap f2 = random_unit_map(rng, h, w, c, 8);
    const LocalCostVolume vol = build_local_volume(f1, f2, r);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int ty = y + dy, tx = x + dx;
                    const float want = (ty < 0 || ty >= h || tx < 0 || tx >= w)
                                           ? 0.0f
                                           : ref_corr(f1, f2, y, x, ty, tx);
                    if (vol.score(y, x, dy, dx) != want) return false;
                }
    return true;
}

Tensor random_tensor(SplitMix64& rng, std::vector<std::int64_t> shape) {
    Tensor t(std::move(shape));
    for (float& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return t;
}

// Direct-definition conv3d used only as a reference here.
Tensor ref_conv3d(const Tensor& in, const Tensor& w, Triple s, Triple p) {
    const auto ci = in.extent(0), co = w.extent(0);
    std::int64_t o[3];
    for (int a = 0; a < 3; ++a) o[a] = (in.extent(a + 1) + 2 * p[a] - w.extent(a + 2)) / s[a] + 1;
    Tensor out({co, o[0], o[1], o[2]});
    for (std::int64_t oc = 0; oc < co; ++oc)
        for (std::int64_t x = 0; x < o[0]; ++x)
            for (std::int64_t y = 0; y < o[1]; ++y)
                for (std::int64_t z = 0; z < o[2]; ++z) {
                    double acc = 0.0;
                    for (std::int64_t ic = 0; ic < ci; ++ic)
                        for (std::int64_t kx = 0; kx < w.extent(2); ++kx)
                            for (std::int64_t ky = 0; ky < w.extent(3); ++ky)
                                for (std::int64_t kz = 0; kz < w.extent(4); ++kz) {
                                    const auto ix = x * s[0] - p[0] + kx, iy = y * s[1] - p[1] + ky,
                                               iz = z * s[2] - p[2] + kz;
                                    if (ix < 0 || iy < 0 || iz < 0 || ix >= in.extent(1) ||
                                        iy >= in.extent(2) || iz >= in.extent(3))
                                        continue;
                                    acc += static_cast<double>(w.at(oc, ic, kx, ky, kz)) * in.at(ic, ix, iy, iz);
                                }
                    out.at(oc, x, y, z) = static_cast<float>(acc);
                }
    return out;
}

// Scatter-form transposed conv reference.
Tensor ref_conv_transpose3d(const Tensor& in, const Tensor& w, Triple s, Triple p) {
    const auto ci = in.extent(0), co = w.extent(1);
    std::int64_t o[3];
    for (int a = 0; a < 3; ++a) o[a] = (in.extent(a + 1) - 1) * s[a] - 2 * p[a] + w.extent(a + 2);
    std::vector<double> acc(static_cast<std::size_t>(co * o[0] * o[1] * o[2]), 0.0);
    for (std::int64_t ic = 0; ic < ci; ++ic)
        for (std::int64_t x = 0; x < in.extent(1); ++x)
            for (std::int64_t y = 0; y < in.extent(2); ++y)
                for (std::int64_t z = 0; z < in.extent(3); ++z)
                    for (std::int64_t oc = 0; oc < co; ++oc)
                        for (std::int64_t kx = 0; kx < w.extent(2); ++kx)
                            for (std::int64_t ky = 0; ky < w.extent(3); ++ky)
                                for (std::int64_t kz = 0; kz < w.extent(4); ++kz) {
                                    const auto ox = x * s[0] - p[0] + kx, oy = y * s[1] - p[1] + ky,
                                               oz = z * s[2] - p[2] + kz;
                                    if (ox < 0 || oy < 0 || oz < 0 || ox >= o[0] || oy >= o[1] || oz >= o[2])
                                        continue;
                                    acc[static_cast<std::size_t>(((oc * o[0] + ox) * o[1] + oy) * o[2] + oz)] +=
                                        static_cast<double>(w.at(ic, oc, kx, ky, kz)) * in.at(ic, x, y, z);
                                }
    Tensor out({co, o[0], o[1], o[2]});
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i]);
    return out;
}

bool check_aggregation_case(SplitMix64& rng) {
    const int h = rng.integer(2, 6), w = rng.integer(2, 6), c = rng.integer(2, 11);
    const FeatureMap f1 = random_unit_map(rng, h, w, c, 16);
    const FeatureMap f2 = random_unit_map(rng, h, w, c, 16);
    const int k = 2;
    const TopkCostVolume vol = build_topk_volume(f1, f2, Axis::horizontal, rng.integer(1, w), k);

    // Averaging weights: K-mean of the stored scores.
    const AggregatedCostVolume mean = aggregate(vol, AggWeights::averaging(k));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int j = 0; j < vol.disp_count(); ++j) {
                if (!vol.valid(y, x, j)) {
                    if (mean.valid(y, x, j) || !is_sentinel(mean.score(y, x, j))) return false;
                    continue;
                }
                const auto s = vol.scores_at(y, x, j);
                if (mean.score(y, x, j) != (s[0] + s[1]) / 2.0f) return false;
            }

    // Random same-padding stack: conv3d (relu) then 1x1x1 collapse.
    AggLayer l1;
    l1.activation = Activation::relu;
    l1.padding = {1, 1, 1};
    l1.weights = random_tensor(rng, {3, k, 3, 3, 3});
    l1.bias = {0.1f, -0.2f, 0.05f};
    AggLayer l2;
    l2.weights = random_tensor(rng, {1, 3, 1, 1, 1});
    const AggregatedCostVolume got = aggregate(vol, AggWeights{{l1, l2}});
    Tensor x = topk_to_tensor(vol);
    x = ref_conv3d(x, l1.weights, l1.stride, l1.padding);
    for (std::int64_t ch = 0; ch < 3; ++ch)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(x.size() / 3); ++i) {
            float& v = x[static_cast<std::size_t>(ch * (x.size() / 3) + i)];
            v = std::max(v + l1.bias[static_cast<std::size_t>(ch)], 0.0f);
        }
    x = ref_conv3d(x, l2.weights, l2.stride, l2.padding);
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            for (int j = 0; j < vol.disp_count(); ++j) {
                if (!vol.valid(y, xx, j)) continue;
                if (std::fabs(got.score(y, xx, j) - x.at(0, y, xx, j)) > 1e-5f) return false;
            }

    // Adjoint identity <conv(a), b> == <a, conv^T(b)>.
    const Triple s{2, 1, 2}, p{1, 1, 0};
    const Tensor wts = random_tensor(rng, {2, 3, 3, 3, 3});
    const Tensor a = random_tensor(rng, {3, 5, 4, 5});
    const Tensor ca = conv3d(a, wts, s, p);
    const Tensor b = random_tensor(rng, ca.shape());
    const Tensor tb = conv_transpose3d(b, wts, s, p);
    if (tb.shape() != a.shape()) return false;
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) lhs += static_cast<double>(ca[i]) * b[i];
    for (std::size_t i = 0; i < a.size(); ++i) {
        rhs += static_cast<double>(a[i]) * tb[i];
        scale += std::fabs(static_cast<double>(a[i]) * tb[i]);
    }
    if (std::fabs(lhs - rhs) > 1e-4 * std::max(1.0, scale)) return false;

    const Tensor tb_ref = ref_conv_transpose3d(b, wts, s, p);
    for (std::size_t i = 0; i < tb.size(); ++i) {
        if (std::fabs(tb[i] - tb_ref[i]) > 1e-5f) return false;
    }
    return true;
}

template <typename Check>
bool run_suite(std::ostream& out, const char* name, int cases, SplitMix64& rng, Check check) {
    int failed = 0;
    for (int i = 0; i < cases; ++i) {
        if (!check(rng)) ++failed;
    }
    out << "selfcheck " << name << ": " << (failed ? "FAIL" : "pass") << " (" << cases - failed
        << "/" << cases << ")\n";
    return failed == 0;
}

}  // namespace

bool run_selfcheck(std::ostream& out, std::uint64_t seed) {
    SplitMix64 rng(seed);
    bool ok = true;
    ok &= run_suite(out, "topk", 60, rng, check_topk_case);
    ok &= run_suite(out, "local", 60, rng, check_local_case);
    ok &= run_suite(out, "aggregation", 20, rng, check_aggregation_case);
    out << "selfcheck " << (ok ? "passed" : "FAILED") << "\n";
    return ok;
}

}  // namespace hcv
