// Command-line front end: estimate, synth, eval, bench-mem, selfcheck.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hcv/config.hpp"
#include "hcv/errors.hpp"
#include "hcv/eval.hpp"
#include "hcv/flowio.hpp"
#include "hcv/memory.hpp"
#include "hcv/parallel.hpp"
#include "hcv/pipeline.hpp"
#include "hcv/selfcheck.hpp"
#include "hcv/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitCheck = 3;

struct ConfigFlags {
    std::string config_path;
    std::optional<int> d_h, d_v, k, l_r, r_g, iters, threads;
    std::optional<float> damping, temperature;
    std::optional<std::string> weights, lookup;

    void attach(CLI::App& app) {
        app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
        app.add_option("--d-h", d_h, "max horizontal displacement at 1/16 (0 = auto)");
        app.add_option("--d-v", d_v, "max vertical displacement at 1/16 (0 = auto)");
        app.add_option("--k", k, "Top-K candidates kept per slot");
        app.add_option("--l-r", l_r, "local window radius at 1/8");
        app.add_option("--r-g", r_g, "global lookup radius");
        app.add_option("--iters", iters, "refinement iterations");
        app.add_option("--damping", damping, "refinement step damping in (0, 1]");
        app.add_option("--temperature", temperature, "softmax temperature");
        app.add_option("--weights", weights, "HCVW aggregation weights");
        app.add_option("--lookup", lookup, "local lookup: recentred | fixed");
        app.add_option("--threads", threads, "worker threads (env HCV_THREADS)");
    }

    hcv::RunConfig resolve() const {
        hcv::RunConfig cfg;
        if (const char* env = std::getenv("HCV_THREADS")) cfg.set("threads", env);
        if (!config_path.empty()) cfg = hcv::load_config_file(config_path, cfg);
        auto put = [&](const char* key, const auto& opt) {
            if (opt) cfg.set(key, to_text(*opt));
        };
        put("d_h", d_h);
        put("d_v", d_v);
        put("k", k);
        put("l_r", l_r);
        put("r_g", r_g);
        put("iters", iters);
        put("damping", damping);
        put("temperature", temperature);
        put("weights", weights);
        put("lookup", lookup);
        put("threads", threads);
        if (cfg.threads > 0) hcv::set_num_threads(cfg.threads);
        return cfg;
    }

private:
    static std::string to_text(const std::string& s) { return s; }
    static std::string to_text(int v) { return std::to_string(v); }
    static std::string to_text(float v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
        return buf;
    }
};

// "WxH" -> {width, height}
std::pair<int, int> parse_size(const std::string& text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) throw hcv::InvalidArgument("size must look like WxH, got '" + text + "'");
    try {
        std::size_t used_w = 0, used_h = 0;
        const std::string ws = text.substr(0, x), hs = text.substr(x + 1);
        const int w = std::stoi(ws, &used_w), h = std::stoi(hs, &used_h);
        if (used_w != ws.size() || used_h != hs.size() || w < 1 || h < 1) throw std::invalid_argument("");
        return {w, h};
    } catch (const std::logic_error&) {
        throw hcv::InvalidArgument("size must look like WxH, got '" + text + "'");
    }
}

void print_plans(int height, int width, int levels, const hcv::RunConfig& cfg) {
    const hcv::MemoryPlan all1 = hcv::count_allpairs(height, width, 1);
    const hcv::MemoryPlan allL = hcv::count_allpairs(height, width, levels);
    const hcv::MemoryPlan hcvp = hcv::count_hcv(height, width, cfg);
    std::cout << "image " << width << "x" << height << "\n";
    std::cout << hcv::format_plan(all1);
    if (levels != 1) {
        std::cout << "levels " << levels << "\n" << hcv::format_plan(allL);
    }
    std::cout << hcv::format_plan(hcvp);
    std::printf("ratio_elements %.6f\nratio_bytes %.6f\n",
                static_cast<double>(hcvp.total_elements) / static_cast<double>(all1.total_elements),
                static_cast<double>(hcvp.total_bytes) / static_cast<double>(all1.total_bytes));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid cost volume optical flow"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate", "estimate flow between two PGM/PPM frames");
    std::string img1, img2, out_flo, viz;
    ConfigFlags est_flags;
    est->add_option("img1", img1)->required();
    est->add_option("img2", img2)->required();
    est->add_option("-o,--output", out_flo, ".flo output")->required();
    est->add_option("--viz", viz, "colour-coded flow (PPM)");
    est_flags.attach(*est);

    // synth
    auto* syn = app.add_subcommand("synth", "write a seeded synthetic pair with ground truth");
    std::vector<int> shift{0, 0};
    std::string syn_size = "256x256", syn_dir;
    std::uint64_t seed = 1;
    syn->add_option("--shift", shift, "DX DY")->expected(2)->required();
    syn->add_option("--size", syn_size, "WxH");
    syn->add_option("--seed", seed);
    syn->add_option("-o,--output", syn_dir, "output directory")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "compare a predicted .flo with ground truth");
    std::string pred_path, gt_path, mask_path;
    ev->add_option("pred", pred_path)->required();
    ev->add_option("gt", gt_path)->required();
    ev->add_option("--mask", mask_path, "PGM; nonzero pixels are evaluated");

    // bench-mem
    auto* bm = app.add_subcommand("bench-mem", "cost-volume memory model");
    std::string bm_size;
    int levels = 1;
    bool measure = false;
    std::int64_t cap = 0;
    ConfigFlags bm_flags;
    bm->add_option("--size", bm_size, "WxH")->required();
    bm->add_option("--levels", levels, "all-pairs pyramid levels")->check(CLI::Range(1, 16));
    bm->add_flag("--measure", measure, "also build the volumes and report peak bytes");
    bm->add_option("--cap", cap, "all-pairs allocation cap in bytes when measuring");
    bm_flags.attach(*bm);

    auto* sc = app.add_subcommand("selfcheck", "run the embedded oracle suites");
    std::optional<int> sc_threads;
    std::uint64_t sc_seed = 1234;
    sc->add_option("--threads", sc_threads, "worker threads (env HCV_THREADS)");
    sc->add_option("--seed", sc_seed, "oracle fixture seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*est) {
            const hcv::RunConfig cfg = est_flags.resolve();
            const hcv::Image a = hcv::read_image(img1);
            const hcv::Image b = hcv::read_image(img2);
            const hcv::EstimateResult r = hcv::estimate(a, b, cfg);
            hcv::write_flo(out_flo, r.flow);
            if (!viz.empty()) hcv::write_image(viz, hcv::flow_to_color(r.flow));
            for (const auto& [stage, ms] : r.stage_ms) std::printf("time %-14s %10.2f ms\n", stage.c_str(), ms);
            std::cout << hcv::format_plan(r.plan);
            return kExitOk;
        }
        if (*syn) {
            const auto [w, h] = parse_size(syn_size);
            const hcv::SyntheticPair p = hcv::make_synthetic_pair(w, h, shift[0], shift[1], seed);
            std::filesystem::create_directories(syn_dir);
            const std::filesystem::path dir(syn_dir);
            hcv::write_image(dir / "frame1.pgm", p.first);
            hcv::write_image(dir / "frame2.pgm", p.second);
            hcv::write_flo(dir / "gt.flo", p.gt);
            std::cout << "wrote " << (dir / "frame1.pgm").string() << ", " << (dir / "frame2.pgm").string()
                      << ", " << (dir / "gt.flo").string() << "\n";
            return kExitOk;
        }
        if (*ev) {
            const hcv::FlowField pred = hcv::read_flo(pred_path);
            const hcv::FlowField gt = hcv::read_flo(gt_path);
            std::vector<std::uint8_t> mask;
            if (!mask_path.empty()) {
                const hcv::Image m = hcv::read_image(mask_path);
                if (m.channels != 1) throw hcv::FormatError("mask must be a PGM");
                mask = m.data;
            }
            try {
                std::cout << hcv::format_report(hcv::evaluate(pred, gt, mask));
            } catch (const hcv::InvalidArgument& e) {
                std::cerr << "eval: " << e.what() << "\n";
                return kExitCheck;
            }
            return kExitOk;
        }
        if (*bm) {
            const hcv::RunConfig cfg = bm_flags.resolve();
            const auto [w, h] = parse_size(bm_size);
            print_plans(h, w, levels, cfg);
            if (measure) {
                hcv::PeakRequest req;
                req.image_h = h;
                req.image_w = w;
                req.cfg = cfg;
                req.scenario = hcv::Scenario::hcv;
                std::printf("measured_hcv_bytes %lld\n", static_cast<long long>(hcv::measure_peak(req)));
                req.scenario = hcv::Scenario::allpairs;
                req.cap_bytes = cap;
                try {
                    std::printf("measured_allpairs_bytes %lld\n",
                                static_cast<long long>(hcv::measure_peak(req)));
                } catch (const hcv::BudgetExceeded& e) {
                    std::printf("measured_allpairs_bytes budget-exceeded (%s)\n", e.what());
                }
            }
            return kExitOk;
        }
        if (*sc) {
            hcv::RunConfig cfg;
            if (const char* env = std::getenv("HCV_THREADS")) cfg.set("threads", env);
            if (sc_threads) cfg.set("threads", std::to_string(*sc_threads));
            if (cfg.threads > 0) hcv::set_num_threads(cfg.threads);
            return hcv::run_selfcheck(std::cout, sc_seed) ? kExitOk : kExitCheck;
        }
    } catch (const hcv::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const hcv::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheck;
    }
    return kExitUsage;
}
