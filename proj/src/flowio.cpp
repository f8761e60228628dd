#include "hcv/flowio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "byte_io.hpp"
#include "hcv/errors.hpp"

namespace hcv {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// PGM / PPM

namespace {

class PnmHeader {
public:
    explicit PnmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    // Skips whitespace and '#' comments, then reads one token.
    std::string token(const char* field) {
        for (;;) {
            while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
            if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
                continue;
            }
            break;
        }
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') ++pos_;
        if (start == pos_) throw FormatError(std::string("PNM: missing ") + field);
        return {bytes_.begin() + static_cast<std::ptrdiff_t>(start),
                bytes_.begin() + static_cast<std::ptrdiff_t>(pos_)};
    }

    int number(const char* field) {
        const std::string t = token(field);
        if (!std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }) ||
            t.size() > 9) {
            throw FormatError(std::string("PNM: bad ") + field + " '" + t + "'");
        }
        return std::stoi(t);
    }

    // The single whitespace byte that terminates the header.
    std::size_t data_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw FormatError("PNM: missing whitespace after maxval");
        }
        return pos_ + 1;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

Image decode_pnm(std::span<const std::uint8_t> bytes) {
    PnmHeader hdr(bytes);
    const std::string magic = hdr.token("magic");
    int channels;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw FormatError("PNM: bad magic '" + magic + "' (expected P5 or P6)");
    }
    const int width = hdr.number("width");
    const int height = hdr.number("height");
    if (width < 1 || height < 1) throw FormatError("PNM: width and height must be positive");
    const int maxval = hdr.number("maxval");
    if (maxval != 255) throw FormatError("PNM: maxval must be 255, got " + std::to_string(maxval));
    const std::size_t start = hdr.data_start();
    const std::size_t need = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() < start + need) throw FormatError("PNM: truncated pixel data");

    Image img(width, height, channels);
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), need, img.data.begin());
    return img;
}

std::vector<std::uint8_t> encode_pnm(const Image& image) {
    if (image.channels != 1 && image.channels != 3) {
        throw InvalidArgument("PNM images have 1 or 3 channels");
    }
    detail::ByteWriter out;
    out.put_text(std::string(image.channels == 1 ? "P5" : "P6") + "\n" +
                 std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n");
    out.put_bytes(image.data);
    return out.take();
}

Image read_image(const std::filesystem::path& path) { return decode_pnm(read_file_bytes(path)); }

void write_image(const std::filesystem::path& path, const Image& image) {
    write_file_bytes(path, encode_pnm(image));
}

// ---------------------------------------------------------------------------
// .flo

namespace {
constexpr float kFloTag = 202021.25f;
constexpr float kUnknownThreshold = 1e9f;
}  // namespace

FlowField decode_flo(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes, ".flo");
    if (in.get<float>("magic") != kFloTag) in.fail("bad magic (expected PIEH)");
    const auto width = in.get<std::int32_t>("width");
    const auto height = in.get<std::int32_t>("height");
    if (width < 1 || height < 1 || width > (1 << 20) || height > (1 << 20)) {
        in.fail("implausible extents " + std::to_string(width) + "x" + std::to_string(height));
    }
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (in.remaining() != n * 2 * sizeof(float)) {
        in.fail("size mismatch: expected " + std::to_string(n * 2 * sizeof(float)) +
                " data bytes, found " + std::to_string(in.remaining()));
    }
    FlowField flow(height, width, 1);
    bool any_invalid = false;
    std::vector<std::uint8_t> valid(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const float u = in.get<float>("u");
        const float v = in.get<float>("v");
        flow.u[i] = u;
        flow.v[i] = v;
        if (!(std::fabs(u) <= kUnknownThreshold && std::fabs(v) <= kUnknownThreshold)) {
            valid[i] = 0;
            any_invalid = true;
        }
    }
    if (any_invalid) flow.valid = std::move(valid);
    return flow;
}

std::vector<std::uint8_t> encode_flo(const FlowField& flow) {
    detail::ByteWriter out;
    out.put<float>(kFloTag);
    out.put<std::int32_t>(flow.width());
    out.put<std::int32_t>(flow.height());
    auto reads_unknown = [](float u, float v) {
        return !(std::fabs(u) <= kUnknownThreshold && std::fabs(v) <= kUnknownThreshold);
    };
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        const bool ok = flow.valid.empty() || flow.valid[i] != 0;
        // Masked pixels that already decode as unknown are kept verbatim so
        // that decode -> encode is byte-stable.
        const bool keep = ok || reads_unknown(flow.u[i], flow.v[i]);
        out.put<float>(keep ? flow.u[i] : kUnknownFlow);
        out.put<float>(keep ? flow.v[i] : kUnknownFlow);
    }
    return out.take();
}

FlowField read_flo(const std::filesystem::path& path) { return decode_flo(read_file_bytes(path)); }

void write_flo(const std::filesystem::path& path, const FlowField& flow) {
    write_file_bytes(path, encode_flo(flow));
}

// ---------------------------------------------------------------------------
// Colour wheel

const std::vector<std::array<float, 3>>& color_wheel() {
    static const std::vector<std::array<float, 3>> wheel = [] {
        constexpr int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
        std::vector<std::array<float, 3>> w;
        auto ramp = [](int i, int n) { return std::floor(255.0f * static_cast<float>(i) / static_cast<float>(n)); };
        for (int i = 0; i < RY; ++i) w.push_back({255.0f, ramp(i, RY), 0.0f});
        for (int i = 0; i < YG; ++i) w.push_back({255.0f - ramp(i, YG), 255.0f, 0.0f});
        for (int i = 0; i < GC; ++i) w.push_back({0.0f, 255.0f, ramp(i, GC)});
        for (int i = 0; i < CB; ++i) w.push_back({0.0f, 255.0f - ramp(i, CB), 255.0f});
        for (int i = 0; i < BM; ++i) w.push_back({ramp(i, BM), 0.0f, 255.0f});
        for (int i = 0; i < MR; ++i) w.push_back({255.0f, 0.0f, 255.0f - ramp(i, MR)});
        return w;
    }();
    return wheel;
}

Image flow_to_color(const FlowField& flow, std::optional<float> max_magnitude) {
    const int h = flow.height(), w = flow.width();
    const std::size_t n = flow.u.size();
    auto usable = [&](std::size_t i) {
        return std::isfinite(flow.u[i]) && std::isfinite(flow.v[i]) &&
               (flow.valid.empty() || flow.valid[i] != 0);
    };

    float scale = 0.0f;
    if (max_magnitude) {
        scale = *max_magnitude;
    } else {
        std::vector<float> mags;
        mags.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (usable(i)) mags.push_back(std::hypot(flow.u[i], flow.v[i]));
        }
        if (!mags.empty()) {
            const auto rank = static_cast<std::ptrdiff_t>(0.99 * static_cast<double>(mags.size() - 1));
            std::nth_element(mags.begin(), mags.begin() + rank, mags.end());
            scale = mags[static_cast<std::size_t>(rank)];
        }
    }
    if (!(scale > 0.0f) || !std::isfinite(scale)) scale = 1.0f;

    const auto& wheel = color_wheel();
    const int ncols = static_cast<int>(wheel.size());
    Image img(w, h, 3);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t* px = img.data.data() + i * 3;
        if (!usable(i)) {
            px[0] = px[1] = px[2] = 0;
            continue;
        }
        const float nu = flow.u[i] / scale, nv = flow.v[i] / scale;
        const float rad = std::sqrt(nu * nu + nv * nv);
        const float a = std::atan2(-nv, -nu) / std::numbers::pi_v<float>;
        const float fk = (a + 1.0f) / 2.0f * static_cast<float>(ncols - 1);
        int k0 = static_cast<int>(std::floor(fk));
        k0 = std::clamp(k0, 0, ncols - 1);
        const int k1 = k0 + 1 == ncols ? 0 : k0 + 1;
        const float f = fk - static_cast<float>(k0);
        for (int c = 0; c < 3; ++c) {
            const float c0 = wheel[static_cast<std::size_t>(k0)][static_cast<std::size_t>(c)] / 255.0f;
            const float c1 = wheel[static_cast<std::size_t>(k1)][static_cast<std::size_t>(c)] / 255.0f;
            float col = (1.0f - f) * c0 + f * c1;
            col = rad <= 1.0f ? 1.0f - rad * (1.0f - col) : col * 0.75f;
            px[c] = static_cast<std::uint8_t>(std::clamp(std::floor(255.0f * col), 0.0f, 255.0f));
        }
    }
    return img;
}

}  // namespace hcv
