#include "hcv/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "hcv/errors.hpp"
#include "rng.hpp"

namespace hcv {

namespace {

struct Octave {
    int cell;
    double amplitude;
};

// Coarse-to-fine value noise; the coarse octaves keep 1/8 and 1/16 grids textured.
constexpr Octave kOctaves[] = {{64, 1.0}, {32, 1.0}, {16, 0.9}, {8, 0.6}, {4, 0.35}};

}  // namespace

Image make_noise_texture(int width, int height, std::uint64_t seed) {
    if (width < 1 || height < 1) throw InvalidArgument("noise texture needs positive extents");
    detail::SplitMix64 rng(seed);
    std::vector<double> acc(static_cast<std::size_t>(width) * height, 0.0);
    double total_amp = 0.0;
    for (const Octave& oct : kOctaves) {
        const int gw = width / oct.cell + 2, gh = height / oct.cell + 2;
        std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
        for (double& g : grid) g = rng.uniform(-1.0, 1.0);
        for (int y = 0; y < height; ++y) {
            const double fy = static_cast<double>(y) / oct.cell;
            const int y0 = static_cast<int>(fy);
            double ty = fy - y0;
            ty = ty * ty * (3.0 - 2.0 * ty);
            for (int x = 0; x < width; ++x) {
                const double fx = static_cast<double>(x) / oct.cell;
                const int x0 = static_cast<int>(fx);
                double tx = fx - x0;
                tx = tx * tx * (3.0 - 2.0 * tx);
                auto g = [&](int gx, int gy) { return grid[static_cast<std::size_t>(gy) * gw + gx]; };
                const double top = g(x0, y0) * (1 - tx) + g(x0 + 1, y0) * tx;
                const double bot = g(x0, y0 + 1) * (1 - tx) + g(x0 + 1, y0 + 1) * tx;
                acc[static_cast<std::size_t>(y) * width + x] += oct.amplitude * (top * (1 - ty) + bot * ty);
            }
        }
        total_amp += oct.amplitude;
    }
    Image img(width, height, 1);
    for (std::size_t i = 0; i < acc.size(); ++i) {
        const double v = 128.0 + 200.0 * acc[i] / total_amp;
        img.data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return img;
}

SyntheticPair make_synthetic_pair(int width, int height, int shift_x, int shift_y,
                                  std::uint64_t seed) {
    if (width < 1 || height < 1) throw InvalidArgument("synthetic pair needs positive extents");
    if (std::abs(shift_x) >= width || std::abs(shift_y) >= height) {
        throw InvalidArgument("shift (" + std::to_string(shift_x) + ", " + std::to_string(shift_y) +
                              ") must be smaller than the frame " + std::to_string(width) + "x" +
                              std::to_string(height));
    }
    const Image canvas = make_noise_texture(width + std::abs(shift_x), height + std::abs(shift_y), seed);
    const int ox1 = std::max(shift_x, 0), oy1 = std::max(shift_y, 0);
    const int ox2 = ox1 - shift_x, oy2 = oy1 - shift_y;

    SyntheticPair pair{Image(width, height, 1), Image(width, height, 1),
                       FlowField(height, width, 1, static_cast<float>(shift_x),
                                 static_cast<float>(shift_y))};
    pair.gt.valid.assign(static_cast<std::size_t>(width) * height, 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            pair.first.at(x, y) = canvas.at(ox1 + x, oy1 + y);
            pair.second.at(x, y) = canvas.at(ox2 + x, oy2 + y);
            const int tx = x + shift_x, ty = y + shift_y;
            pair.gt.valid[static_cast<std::size_t>(y) * width + x] =
                tx >= 0 && tx < width && ty >= 0 && ty < height;
        }
    }
    return pair;
}

}  // namespace hcv
