#include "hcv/features.hpp"

#include <cmath>
#include <string>

#include "hcv/errors.hpp"
#include "hcv/numerics.hpp"
#include "hcv/parallel.hpp"

namespace hcv {

namespace {

constexpr int kMinExtent = 16;
constexpr double kFlatVariance = 1e-12;

// Row-major 3x3 neighbours without the centre.
constexpr int kNeighbourDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kNeighbourDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

}  // namespace

Tensor to_gray(const Image& image) {
    if (image.channels != 1 && image.channels != 3) {
        throw InvalidArgument("image must have 1 or 3 channels");
    }
    Tensor gray({1, image.height, image.width});
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            float g;
            if (image.channels == 1) {
                g = image.at(x, y);
            } else {
                g = 0.299f * image.at(x, y, 0) + 0.587f * image.at(x, y, 1) +
                    0.114f * image.at(x, y, 2);
            }
            gray.at(0, y, x) = g;
        }
    }
    return gray;
}

FeatureMap extract_features(const Image& image, int level) {
    if (level != 8 && level != 16) {
        throw InvalidArgument("feature level must be 8 or 16, got " + std::to_string(level));
    }
    if (image.width < kMinExtent || image.height < kMinExtent) {
        throw InvalidArgument("image " + std::to_string(image.width) + "x" +
                              std::to_string(image.height) + " is smaller than 16x16");
    }
    const Tensor pooled = avg_pool2d(to_gray(image), level);
    const int h = static_cast<int>(pooled.extent(1));
    const int w = static_cast<int>(pooled.extent(2));

    FeatureMap fm;
    fm.level = level;
    fm.data = Tensor({kFeatureChannels, h, w});

    auto px = [&](int y, int x) { return static_cast<double>(pooled.at(0, y, x)); };
    auto clamp_x = [&](int x) { return x < 0 ? 0 : (x >= w ? w - 1 : x); };
    auto clamp_y = [&](int y) { return y < 0 ? 0 : (y >= h ? h - 1 : y); };

    parallel_for(0, h, [&](std::int64_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            const double centre = px(y, x);
            double desc[kFeatureChannels] = {};

            // Window statistics from deviations against the centre, so that a
            // brightness offset cancels exactly.
            double sum_dev = 0.0, sum_sq = 0.0;
            int count = 1;
            for (int n = 0; n < 8; ++n) {
                const int nx = x + kNeighbourDx[n], ny = y + kNeighbourDy[n];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const double d = px(ny, nx) - centre;
                sum_dev += d;
                sum_sq += d * d;
                ++count;
                desc[kChanCensus + n] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            }
            const double mean_dev = sum_dev / count;
            const double var = sum_sq / count - mean_dev * mean_dev;
            if (var >= kFlatVariance) {
                const double sd = std::sqrt(var);
                desc[kChanIntensity] = -mean_dev / sd;
                desc[kChanGradX] = 0.5 * (px(y, clamp_x(x + 1)) - px(y, clamp_x(x - 1))) / sd;
                desc[kChanGradY] = 0.5 * (px(clamp_y(y + 1), x) - px(clamp_y(y - 1), x)) / sd;
            }

            double norm_sq = 0.0;
            for (double v : desc) norm_sq += v * v;
            const double inv = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;
            for (int c = 0; c < kFeatureChannels; ++c) {
                fm.data.at(c, y, x) = static_cast<float>(desc[c] * inv);
            }
        }
    });
    return fm;
}

std::pair<FeatureMap, FeatureMap> build_pyramid(const Image& image) {
    return {extract_features(image, 8), extract_features(image, 16)};
}

}  // namespace hcv
