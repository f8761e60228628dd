#include "hcv/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>

#include "hcv/errors.hpp"

namespace hcv {

namespace {

constexpr int kMaxDefaultDisp = 128;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw InvalidArgument("config: '" + key + "' expects an integer, got '" + value + "'");
    }
    return out;
}

float parse_float(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const float out = std::stof(value, &used);
        if (used == value.size()) return out;
    } catch (const std::exception&) {
    }
    throw InvalidArgument("config: '" + key + "' expects a number, got '" + value + "'");
}

}  // namespace

int RunConfig::resolved_d_h(int w16) const { return d_h > 0 ? d_h : std::min(w16, kMaxDefaultDisp); }

int RunConfig::resolved_d_v(int h16) const { return d_v > 0 ? d_v : std::min(h16, kMaxDefaultDisp); }

void RunConfig::validate(int h16, int w16) const {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw InvalidArgument("config: " + msg);
    };
    need(d_h >= 0 && d_v >= 0, "d_h and d_v must be positive (0 selects the default)");
    need(resolved_d_h(w16) >= 1 && resolved_d_v(h16) >= 1, "displacement range is empty");
    need(k >= 1, "k must be >= 1");
    need(k <= h16 && k <= w16, "k=" + std::to_string(k) + " exceeds the 1/16 grid (" +
                                   std::to_string(h16) + "x" + std::to_string(w16) + ")");
    need(l_r >= 1, "l_r must be >= 1");
    need(r_g >= 1, "r_g must be >= 1");
    need(iters >= 1, "iters must be >= 1");
    need(damping > 0.0f && damping <= 1.0f, "damping must lie in (0, 1]");
    need(temperature > 0.0f, "temperature must be positive");
    need(threads >= 0, "threads must be >= 0");
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "d_h") {
        d_h = parse_int(key, value);
    } else if (key == "d_v") {
        d_v = parse_int(key, value);
    } else if (key == "k") {
        k = parse_int(key, value);
    } else if (key == "l_r") {
        l_r = parse_int(key, value);
    } else if (key == "r_g") {
        r_g = parse_int(key, value);
    } else if (key == "iters") {
        iters = parse_int(key, value);
    } else if (key == "damping") {
        damping = parse_float(key, value);
    } else if (key == "temperature") {
        temperature = parse_float(key, value);
    } else if (key == "weights") {
        weights = value;
    } else if (key == "threads") {
        threads = parse_int(key, value);
    } else if (key == "lookup") {
        if (value == "recentred") {
            lookup = LocalLookup::recentred;
        } else if (value == "fixed") {
            lookup = LocalLookup::fixed;
        } else {
            throw InvalidArgument("config: lookup must be 'recentred' or 'fixed'");
        }
    } else {
        throw InvalidArgument("config: unknown key '" + key + "'");
    }
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("config: cannot open " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("config: line " + std::to_string(lineno) + " is not key = value");
        }
        base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

}  // namespace hcv
