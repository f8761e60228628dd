#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>

#include "hcv/config.hpp"
#include "hcv/errors.hpp"
#include "hcv/flowio.hpp"
#include "hcv/memory.hpp"
#include "hcv/synthetic.hpp"
#include "oracles.hpp"

using namespace hcv;
namespace fs = std::filesystem;

namespace {

std::int64_t sum_parts(const MemoryPlan& p, bool bytes) {
    std::int64_t s = 0;
    for (const auto& b : p.buffers) {
        if (bytes) s += b.bytes;
        else if (!b.mask) s += b.elements;
    }
    return s;
}

const BufferCount& buffer(const MemoryPlan& p, const std::string& name) {
    for (const auto& b : p.buffers)
        if (b.name == name) return b;
    throw std::runtime_error("no buffer " + name);
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hcv_bench_" + std::to_string(::getpid()) + "_" + name);
    fs::create_directories(p);
    return p;
}

#ifdef HCV_EXE
int run_cli(const std::string& args, const fs::path& out = {}) {
    std::string cmd = std::string("\"") + HCV_EXE + "\" " + args;
    cmd += out.empty() ? " > /dev/null 2>&1" : " > \"" + out.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

#endif

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(CountAllpairs, Examples) {
    EXPECT_EQ(count_allpairs(1080, 1920, 1).total_elements, 1049760000LL);
    EXPECT_EQ(count_allpairs(1080, 1920, 1).total_bytes, 4199040000LL);
    EXPECT_EQ(count_allpairs(8, 8, 1).total_elements, 1);
    EXPECT_EQ(count_allpairs(1, 1, 1).total_elements, 1);
    EXPECT_EQ(count_allpairs(9, 8, 1).total_elements, 4);
}

TEST(CountAllpairs, PyramidMatchesClosedForm) {
    EXPECT_EQ(count_allpairs(1080, 1920, 4).total_elements, oracle::allpairs_elements(1080, 1920, 4));
    EXPECT_EQ(count_allpairs(1080, 1920, 4).total_elements, 1394212500LL);
    for (int levels = 1; levels <= 6; ++levels)
        for (int h : {8, 37, 256, 448})
            EXPECT_EQ(count_allpairs(h, 2 * h + 5, levels).total_elements,
                      oracle::allpairs_elements(h, 2 * h + 5, levels));
    EXPECT_THROW(count_allpairs(0, 8, 1), InvalidArgument);
    EXPECT_THROW(count_allpairs(8, 8, 0), InvalidArgument);
}

TEST(CountHcv, HandCountTinyImage) {
    RunConfig cfg;
    cfg.d_h = cfg.d_v = 1;
    cfg.k = 1;
    cfg.l_r = 1;
    const MemoryPlan p = count_hcv(16, 16, cfg);
    const std::int64_t topk = buffer(p, "topk_scores_h").elements + buffer(p, "topk_indices_h").elements +
                              buffer(p, "topk_scores_v").elements + buffer(p, "topk_indices_v").elements;
    EXPECT_EQ(topk, 8);
    EXPECT_EQ(buffer(p, "local").elements, 36);
    EXPECT_EQ(buffer(p, "topk_mask_h").bytes, 1);
}

TEST(CountHcv, FullHdExample) {
    RunConfig cfg;
    cfg.d_h = 120;
    cfg.d_v = 68;
    // Extents given as (H, W) = (1080, 1920): H16 = 68, W16 = 120, H8 = 135, W8 = 240.
    const MemoryPlan p = count_hcv(1080, 1920, cfg);
    const std::int64_t topk = buffer(p, "topk_scores_h").elements + buffer(p, "topk_indices_h").elements +
                              buffer(p, "topk_scores_v").elements + buffer(p, "topk_indices_v").elements;
    EXPECT_EQ(topk, 2LL * 68 * 120 * 240 * 8 + 2LL * 68 * 120 * 136 * 8);
    EXPECT_EQ(topk, 49090560LL);
    EXPECT_EQ(buffer(p, "aggregated_h").elements + buffer(p, "aggregated_v").elements, 3068160LL);
    EXPECT_EQ(buffer(p, "local").elements, 2624400LL);
    EXPECT_EQ(p.total_elements, 49090560LL + 3068160LL + 2624400LL);
}

TEST(CountHcv, TotalsAreSumsOfParts) {
    for (int h : {16, 100, 256, 448, 1080})
        for (int w : {16, 333, 1024}) {
            const MemoryPlan p = count_hcv(h, w, RunConfig{});
            EXPECT_EQ(p.total_elements, sum_parts(p, false));
            EXPECT_EQ(p.total_bytes, sum_parts(p, true));
            const MemoryPlan a = count_allpairs(h, w, 3);
            EXPECT_EQ(a.total_bytes, sum_parts(a, true));
        }
}

TEST(Config, DefaultsAndResolution) {
    const RunConfig c;
    EXPECT_EQ(c.k, 8);
    EXPECT_EQ(c.l_r, 4);
    EXPECT_EQ(c.r_g, 3);
    EXPECT_EQ(c.iters, 12);
    EXPECT_FLOAT_EQ(c.damping, 0.8f);
    EXPECT_FLOAT_EQ(c.temperature, 1.0f);
    EXPECT_EQ(c.resolved_d_h(16), 16);
    EXPECT_EQ(c.resolved_d_h(400), 128);
    EXPECT_EQ(c.resolved_d_v(68), 68);
}

TEST(Config, SetAndValidate) {
    RunConfig c;
    c.set("k", "4");
    c.set("temperature", "0.5");
    c.set("lookup", "fixed");
    EXPECT_EQ(c.k, 4);
    EXPECT_FLOAT_EQ(c.temperature, 0.5f);
    EXPECT_EQ(c.lookup, LocalLookup::fixed);
    EXPECT_THROW(c.set("bogus", "1"), InvalidArgument);
    EXPECT_THROW(c.set("k", "four"), InvalidArgument);
    EXPECT_NO_THROW(c.validate(16, 16));
    c.k = 17;
    EXPECT_THROW(c.validate(16, 16), InvalidArgument);
    c.k = 0;
    EXPECT_THROW(c.validate(16, 16), InvalidArgument);
    c = RunConfig{};
    c.damping = 1.5f;
    EXPECT_THROW(c.validate(16, 16), InvalidArgument);
    c = RunConfig{};
    c.temperature = 0.0f;
    EXPECT_THROW(c.validate(16, 16), InvalidArgument);
}

TEST(Config, FileLayersOverBase) {
    const fs::path dir = scratch("cfg");
    const fs::path p = dir / "run.cfg";
    std::ofstream(p) << "# tuned\nk = 2\n  iters=3  # trailing\n\ndamping = 0.5\n";
    RunConfig base;
    base.l_r = 2;
    const RunConfig c = load_config_file(p, base);
    EXPECT_EQ(c.k, 2);
    EXPECT_EQ(c.iters, 3);
    EXPECT_FLOAT_EQ(c.damping, 0.5f);
    EXPECT_EQ(c.l_r, 2);
    std::ofstream(p) << "k 2\n";
    EXPECT_THROW(load_config_file(p), InvalidArgument);
    fs::remove_all(dir);
}

TEST(Synthetic, ZeroShiftGivesIdenticalFrames) {
    const SyntheticPair s = make_synthetic_pair(40, 30, 0, 0, 9);
    EXPECT_EQ(s.first, s.second);
    for (float u : s.gt.u.data()) EXPECT_EQ(u, 0.0f);
    for (float v : s.gt.v.data()) EXPECT_EQ(v, 0.0f);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) EXPECT_TRUE(s.gt.is_valid(y, x));
}

TEST(Synthetic, ShiftConstruction) {
    for (auto [dx, dy] : {std::pair{5, 0}, std::pair{-3, 7}, std::pair{12, -9}}) {
        const SyntheticPair s = make_synthetic_pair(48, 40, dx, dy, 4);
        int valid = 0;
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 48; ++x) {
                const bool inside = x + dx >= 0 && x + dx < 48 && y + dy >= 0 && y + dy < 40;
                EXPECT_EQ(s.gt.is_valid(y, x), inside);
                EXPECT_EQ(s.gt.u.at(y, x), static_cast<float>(dx));
                EXPECT_EQ(s.gt.v.at(y, x), static_cast<float>(dy));
                if (inside) {
                    EXPECT_EQ(s.second.at(x + dx, y + dy), s.first.at(x, y));
                    ++valid;
                }
            }
        EXPECT_EQ(valid, (48 - std::abs(dx)) * (40 - std::abs(dy)));
    }
}

TEST(Synthetic, DeterministicAndSeeded) {
    EXPECT_EQ(make_synthetic_pair(64, 32, 3, 2, 11).first, make_synthetic_pair(64, 32, 3, 2, 11).first);
    EXPECT_EQ(make_synthetic_pair(64, 32, 3, 2, 11).second, make_synthetic_pair(64, 32, 3, 2, 11).second);
    EXPECT_NE(make_synthetic_pair(64, 32, 3, 2, 11).first, make_synthetic_pair(64, 32, 3, 2, 12).first);
    EXPECT_THROW(make_synthetic_pair(16, 16, 16, 0, 1), InvalidArgument);
    EXPECT_THROW(make_synthetic_pair(16, 16, 0, -16, 1), InvalidArgument);
}

TEST(MeasurePeak, HcvWithinEnvelope) {
    for (auto [h, w] : {std::pair{256, 256}, std::pair{448, 1024}}) {
        PeakRequest req;
        req.image_h = h;
        req.image_w = w;
        const std::int64_t measured = measure_peak(req);
        const std::int64_t planned = count_hcv(h, w, req.cfg).total_bytes;
        EXPECT_LE(measured, planned * 5 / 4) << h << "x" << w;
        EXPECT_GT(measured, 0);
        EXPECT_EQ(measure_peak(req), measured);
    }
}

TEST(MeasurePeak, AllpairsWithinEnvelope) {
    PeakRequest req;
    req.scenario = Scenario::allpairs;
    const std::int64_t measured = measure_peak(req);
    const std::int64_t planned = count_allpairs(256, 256, 1).total_bytes;
    EXPECT_GE(measured * 5, planned * 4);
    EXPECT_LE(measured, planned * 5 / 4);
}

TEST(MeasurePeak, CapIsEnforced) {
    PeakRequest req;
    req.scenario = Scenario::allpairs;
    req.image_h = 1080;
    req.image_w = 1920;
    req.cap_bytes = 1 << 20;
    EXPECT_THROW(measure_peak(req), BudgetExceeded);
    req.scenario = Scenario::hcv;
    req.image_h = req.image_w = 256;
    req.cap_bytes = 1024;
    EXPECT_THROW(measure_peak(req), BudgetExceeded);
}

#ifdef HCV_EXE
TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("cli");
    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("estimate only_one.pgm"), 1);
    EXPECT_EQ(run_cli("bench-mem --size 10by10"), 1);
    std::ofstream(dir / "bad.pgm") << "P2\n1 1\n255\n0\n";
    EXPECT_EQ(run_cli("estimate \"" + (dir / "bad.pgm").string() + "\" \"" + (dir / "bad.pgm").string() +
                      "\" -o \"" + (dir / "o.flo").string() + "\""),
              2);
    EXPECT_EQ(run_cli("synth --shift 2 1 --size 64x48 --seed 3 -o \"" + dir.string() + "\""), 0);
    EXPECT_TRUE(fs::exists(dir / "frame1.pgm"));
    EXPECT_TRUE(fs::exists(dir / "gt.flo"));
    const std::string gt = (dir / "gt.flo").string();
    EXPECT_EQ(run_cli("eval \"" + gt + "\" \"" + gt + "\"", dir / "eval.txt"), 0);
    EXPECT_NE(slurp(dir / "eval.txt").find("epe=0"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, BenchMemPrintsPlans) {
    const fs::path dir = scratch("bm");
    EXPECT_EQ(run_cli("bench-mem --size 1080x1920 --levels 4", dir / "out.txt"), 0);
    const std::string out = slurp(dir / "out.txt");
    EXPECT_NE(out.find("1049760000"), std::string::npos);
    EXPECT_NE(out.find("1394212500"), std::string::npos);
    EXPECT_NE(out.find("2624400"), std::string::npos);
    EXPECT_NE(out.find("ratio_elements"), std::string::npos);
    fs::remove_all(dir);
}
#endif
