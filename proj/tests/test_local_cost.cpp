#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hcv/errors.hpp"
#include "hcv/local_cost.hpp"
#include "oracles.hpp"

using namespace hcv;

namespace {

FeatureMap shifted(const FeatureMap& f, int sx, int sy) {
    FeatureMap g = f;
    for (float& v : g.data.data()) v = 0.0f;
    for (int c = 0; c < f.channels(); ++c)
        for (int y = 0; y < f.height(); ++y)
            for (int x = 0; x < f.width(); ++x) {
                const int ox = x - sx, oy = y - sy;
                if (ox >= 0 && ox < f.width() && oy >= 0 && oy < f.height()) g.data.at(c, y, x) = f.data.at(c, oy, ox);
            }
    return g;
}

}  // namespace

TEST(LocalVolume, SelfMatchAtCentre) {
    std::mt19937 rng(1);
    const FeatureMap f = oracle::random_unit_features(rng, 11, 7, 9, 8);
    const LocalCostVolume vol = build_local_volume(f, f, 2);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x) {
            const auto s = vol.scores_at(y, x);
            const auto best = std::max_element(s.begin(), s.end()) - s.begin();
            EXPECT_EQ(best, 12);
            EXPECT_NEAR(vol.score(y, x, 0, 0), 1.0f / std::sqrt(11.0f), 1e-6);
        }
    EXPECT_EQ(vol.score(0, 0, -1, -1), 0.0f);
}

TEST(LocalVolume, MatchesNestedLoops) {
    std::mt19937 rng(2);
    const FeatureMap a = oracle::random_unit_features(rng, 11, 10, 12, 8);
    const FeatureMap b = oracle::random_unit_features(rng, 11, 10, 12, 8);
    const LocalCostVolume vol = build_local_volume(a, b, 2);
    EXPECT_EQ(vol.score_count(), std::size_t{10 * 12 * 25});
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 12; ++x)
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    ASSERT_EQ(vol.score(y, x, dy, dx), oracle::local_score(a, b, y, x, dy, dx));
                    ASSERT_EQ(vol.scores_at(y, x)[(dy + 2) * 5 + dx + 2], vol.score(y, x, dy, dx));
                }
}

TEST(LocalVolume, SwapSymmetry) {
    std::mt19937 rng(3);
    const FeatureMap a = oracle::random_unit_features(rng, 5, 6, 6, 8);
    const FeatureMap b = oracle::random_unit_features(rng, 5, 6, 6, 8);
    const LocalCostVolume ab = build_local_volume(a, b, 1), ba = build_local_volume(b, a, 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (y + dy < 0 || y + dy >= 6 || x + dx < 0 || x + dx >= 6) continue;
                    // Products commute but the channel sum order is the same, so this is exact.
                    EXPECT_EQ(ab.score(y, x, dy, dx), ba.score(y + dy, x + dx, -dy, -dx));
                }
}

TEST(LocalVolume, Errors) {
    std::mt19937 rng(4);
    const FeatureMap a = oracle::random_unit_features(rng, 11, 4, 4, 8);
    const FeatureMap b = oracle::random_unit_features(rng, 11, 4, 5, 8);
    EXPECT_THROW(build_local_volume(a, b, 1), InvalidArgument);
    EXPECT_THROW(build_local_volume(a, a, 0), InvalidArgument);
}

TEST(LocalLookup, ZeroFlowEqualsVolume) {
    std::mt19937 rng(5);
    const FeatureMap a = oracle::random_unit_features(rng, 11, 8, 9, 8);
    const FeatureMap b = oracle::random_unit_features(rng, 11, 8, 9, 8);
    const LocalCostVolume vol = build_local_volume(a, b, 3);
    const Tensor got = lookup_local_at_flow(a, b, FlowField(8, 9, 8), 3);
    ASSERT_EQ(got.shape(), (std::vector<std::int64_t>{8, 9, 49}));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 9; ++x)
            for (int o = 0; o < 49; ++o) ASSERT_EQ(got.at(y, x, o), vol.scores_at(y, x)[o]);
}

TEST(LocalLookup, RecentringFindsShift) {
    std::mt19937 rng(6);
    const FeatureMap a = oracle::random_unit_features(rng, 11, 8, 12, 8);
    const FeatureMap b = shifted(a, 3, 0);
    const Tensor got = lookup_local_at_flow(a, b, FlowField(8, 12, 8, 3.0f, 0.0f), 2);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x + 3 < 12; ++x) {
            int best = 0;
            for (int o = 1; o < 25; ++o)
                if (got.at(y, x, o) > got.at(y, x, best)) best = o;
            EXPECT_EQ(best, 12);
        }
}

TEST(LocalLookup, MatchesDirectEvaluation) {
    std::mt19937 rng(7);
    const FeatureMap a = oracle::random_unit_features(rng, 11, 6, 7, 8);
    const FeatureMap b = oracle::random_unit_features(rng, 11, 6, 7, 8);
    FlowField flow(6, 7, 8);
    std::uniform_real_distribution<float> u(-2.5f, 2.5f);
    for (float& v : flow.u.data()) v = u(rng);
    for (float& v : flow.v.data()) v = u(rng);
    const Tensor got = lookup_local_at_flow(a, b, flow, 2);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 7; ++x)
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    double acc = 0.0;
                    for (int c = 0; c < 11; ++c)
                        acc += a.data.at(c, y, x) *
                               oracle::bilinear(b.data, c, x + flow.u.at(y, x) + dx, y + flow.v.at(y, x) + dy);
                    EXPECT_NEAR(got.at(y, x, (dy + 2) * 5 + dx + 2), acc / std::sqrt(11.0), 1e-5);
                }
}

TEST(LocalLookup, LipschitzInFlow) {
    std::mt19937 rng(8);
    const FeatureMap a = oracle::random_unit_features(rng, 11, 6, 6, 8);
    const FeatureMap b = oracle::random_unit_features(rng, 11, 6, 6, 8);
    FlowField flow(6, 6, 8, 0.3f, -0.7f);
    const Tensor s0 = lookup_local_at_flow(a, b, flow, 2);
    for (float& v : flow.u.data()) v += 1e-4f;
    const Tensor s1 = lookup_local_at_flow(a, b, flow, 2);
    float mx = 0.0f;
    for (float v : b.data.data()) mx = std::max(mx, std::fabs(v));
    const float bound = 4.0f * mx * std::sqrt(11.0f) * 1e-4f + 1e-6f;
    for (std::size_t i = 0; i < s0.size(); ++i) EXPECT_LE(std::fabs(s0[i] - s1[i]), bound);
}

TEST(LocalLookup, FixedVolumeIndexing) {
    std::mt19937 rng(9);
    const FeatureMap a = oracle::random_unit_features(rng, 11, 6, 6, 8);
    const FeatureMap b = oracle::random_unit_features(rng, 11, 6, 6, 8);
    const LocalCostVolume vol = build_local_volume(a, b, 2);
    // Integer flow inside the window reads the stored scores directly.
    const Tensor got = lookup_local_in_volume(vol, FlowField(6, 6, 8, 1.0f, 0.0f));
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x)
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    const float want = dx + 1 <= 2 ? vol.score(y, x, dy, dx + 1) : 0.0f;
                    EXPECT_EQ(got.at(y, x, (dy + 2) * 5 + dx + 2), want);
                }
}
