#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>

#include "hcv/errors.hpp"
#include "hcv/flowio.hpp"
#include "oracles.hpp"

using namespace hcv;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint8_t b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
    std::uint8_t b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
}

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("hcv_test_" + std::to_string(::getpid()) + "_" + name);
}

// Middlebury wheel written out from the published segment lengths.
std::array<double, 3> wheel_colour(double u, double v) {
    static const int seg[6] = {15, 6, 4, 11, 13, 6};
    std::vector<std::array<double, 3>> w;
    for (int i = 0; i < seg[0]; ++i) w.push_back({255, std::floor(255.0 * i / seg[0]), 0});
    for (int i = 0; i < seg[1]; ++i) w.push_back({255 - std::floor(255.0 * i / seg[1]), 255, 0});
    for (int i = 0; i < seg[2]; ++i) w.push_back({0, 255, std::floor(255.0 * i / seg[2])});
    for (int i = 0; i < seg[3]; ++i) w.push_back({0, 255 - std::floor(255.0 * i / seg[3]), 255});
    for (int i = 0; i < seg[4]; ++i) w.push_back({std::floor(255.0 * i / seg[4]), 0, 255});
    for (int i = 0; i < seg[5]; ++i) w.push_back({255, 0, 255 - std::floor(255.0 * i / seg[5])});
    const int n = static_cast<int>(w.size());
    const double rad = std::hypot(u, v);
    const double a = std::atan2(-v, -u) / std::numbers::pi;
    const double fk = (a + 1) / 2 * (n - 1);
    const int k0 = static_cast<int>(std::floor(fk));
    const int k1 = (k0 + 1) % n;
    const double f = fk - k0;
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        double col = ((1 - f) * w[k0][c] + f * w[k1][c]) / 255.0;
        col = rad <= 1 ? 1 - rad * (1 - col) : col * 0.75;
        out[c] = std::floor(255 * col);
    }
    return out;
}

}  // namespace

TEST(Pnm, DecodeTinyGray) {
    std::vector<std::uint8_t> b = bytes_of("P5\n2 1\n255\n");
    b.push_back(0);
    b.push_back(255);
    const Image img = decode_pnm(b);
    EXPECT_EQ(img.width, 2);
    EXPECT_EQ(img.height, 1);
    EXPECT_EQ(img.channels, 1);
    EXPECT_EQ(img.data, (std::vector<std::uint8_t>{0, 255}));
}

TEST(Pnm, CommentsBetweenHeaderTokens) {
    std::vector<std::uint8_t> b = bytes_of("P6 # colour\n1 # width done\n 1\n# max next\n255\n");
    b.insert(b.end(), {10, 20, 30});
    const Image img = decode_pnm(b);
    EXPECT_EQ(img.channels, 3);
    EXPECT_EQ(img.data, (std::vector<std::uint8_t>{10, 20, 30}));
}

TEST(Pnm, RoundTripRandom) {
    std::mt19937 rng(1);
    for (int c : {1, 3}) {
        for (int trial = 0; trial < 5; ++trial) {
            const Image img = oracle::random_image(rng, 1 + trial * 7, 3 + trial, c);
            const auto enc = encode_pnm(img);
            EXPECT_EQ(decode_pnm(enc), img);
            EXPECT_EQ(encode_pnm(decode_pnm(enc)), enc);
        }
    }
    const Image img = oracle::random_image(rng, 17, 9, 3);
    const fs::path p = temp_path("rt.ppm");
    write_image(p, img);
    EXPECT_EQ(read_image(p), img);
    fs::remove(p);
}

TEST(Pnm, Errors) {
    EXPECT_THROW(decode_pnm(bytes_of("P3\n1 1\n255\n0 0 0")), FormatError);
    EXPECT_THROW(decode_pnm(bytes_of("P5\n2 2\n255\nab")), FormatError);
    EXPECT_THROW(decode_pnm(bytes_of("P5\n1 1\n65535\nab")), FormatError);
    EXPECT_THROW(decode_pnm(bytes_of("P5\n1")), FormatError);
    try {
        decode_pnm(bytes_of("P5\n1 1\n100\nx"));
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("maxval"), std::string::npos);
    }
    EXPECT_THROW(read_image(temp_path("missing.pgm")), FormatError);
}

TEST(Flo, SinglePixel) {
    std::vector<std::uint8_t> b = bytes_of("PIEH");
    put_i32(b, 1);
    put_i32(b, 1);
    put_f32(b, 3.0f);
    put_f32(b, 4.0f);
    const FlowField f = decode_flo(b);
    EXPECT_EQ(f.u.at(0, 0), 3.0f);
    EXPECT_EQ(f.v.at(0, 0), 4.0f);
    EXPECT_EQ(f.level, 1);
    float tag;
    std::memcpy(&tag, b.data(), 4);
    EXPECT_EQ(tag, 202021.25f);
}

TEST(Flo, HandAssembled2x2) {
    std::vector<std::uint8_t> b = bytes_of("PIEH");
    put_i32(b, 2);
    put_i32(b, 2);
    const float vals[8] = {1.0f, -1.0f, 0.5f, 2.0f, 1e10f, 0.0f, -3.25f, 7.0f};
    for (float v : vals) put_f32(b, v);
    const FlowField f = decode_flo(b);
    EXPECT_EQ(f.u.at(0, 1), 0.5f);
    EXPECT_EQ(f.v.at(0, 1), 2.0f);
    EXPECT_EQ(f.u.at(1, 1), -3.25f);
    EXPECT_EQ(f.v.at(1, 1), 7.0f);
    EXPECT_TRUE(f.is_valid(0, 0));
    EXPECT_FALSE(f.is_valid(1, 0));
    EXPECT_EQ(encode_flo(f), b);
}

TEST(Flo, RoundTripRandom) {
    std::mt19937 rng(2);
    std::normal_distribution<float> n(0.0f, 20.0f);
    for (int trial = 0; trial < 5; ++trial) {
        FlowField f(3 + trial, 5 + 2 * trial, 1);
        for (float& x : f.u.data()) x = n(rng);
        for (float& x : f.v.data()) x = n(rng);
        const auto enc = encode_flo(f);
        EXPECT_EQ(decode_flo(enc), f);
        EXPECT_EQ(encode_flo(decode_flo(enc)), enc);
        const fs::path p = temp_path("rt.flo");
        write_flo(p, f);
        EXPECT_EQ(read_flo(p), f);
        EXPECT_EQ(read_file_bytes(p), enc);
        fs::remove(p);
    }
}

TEST(Flo, Errors) {
    std::vector<std::uint8_t> b = bytes_of("PIEX");
    put_i32(b, 1);
    put_i32(b, 1);
    put_f32(b, 0.0f);
    put_f32(b, 0.0f);
    EXPECT_THROW(decode_flo(b), FormatError);
    b[3] = 'H';
    b.pop_back();
    EXPECT_THROW(decode_flo(b), FormatError);
    b = bytes_of("PIEH");
    put_i32(b, -1);
    put_i32(b, 1);
    EXPECT_THROW(decode_flo(b), FormatError);
}

TEST(FlowColor, ZeroFieldIsWhite) {
    const Image img = flow_to_color(FlowField(4, 5, 1));
    EXPECT_EQ(img.channels, 3);
    for (auto v : img.data) EXPECT_EQ(v, 255);
}

TEST(FlowColor, WheelAnchor) {
    const Image img = flow_to_color(FlowField(1, 1, 1, 6.0f, 0.0f), 6.0f);
    EXPECT_EQ(img.data, (std::vector<std::uint8_t>{255, 0, 0}));
    EXPECT_EQ(color_wheel().size(), 55u);
}

TEST(FlowColor, RotationalPatternMatchesOracle) {
    const int n = 41;
    FlowField f(n, n, 1);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            f.u.at(y, x) = static_cast<float>(x - n / 2);
            f.v.at(y, x) = static_cast<float>(y - n / 2);
        }
    // Off-integer scale: no pixel lands exactly on the rim, where the
    // encoding switches branch discontinuously.
    const float m = 15.5f;
    const Image img = flow_to_color(f, m);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const auto want = wheel_colour(f.u.at(y, x) / m, f.v.at(y, x) / m);
            for (int c = 0; c < 3; ++c)
                EXPECT_NEAR(img.at(x, y, c), want[static_cast<std::size_t>(c)], 1.0) << x << "," << y;
        }
}

TEST(FlowColor, ScaleNormalisationAndInvalidPixels) {
    std::mt19937 rng(3);
    FlowField f(6, 6, 1);
    std::uniform_real_distribution<float> u(-5.0f, 5.0f);
    for (float& x : f.u.data()) x = u(rng);
    for (float& x : f.v.data()) x = u(rng);
    FlowField g = f;
    for (float& x : g.u.data()) x *= 4.0f;
    for (float& x : g.v.data()) x *= 4.0f;
    EXPECT_EQ(flow_to_color(f, 3.0f), flow_to_color(g, 12.0f));
    f.u[0] = std::numeric_limits<float>::quiet_NaN();
    const Image img = flow_to_color(f);
    EXPECT_EQ(img.data[0], 0);
    EXPECT_EQ(img.data[1], 0);
    EXPECT_EQ(img.data[2], 0);
}
