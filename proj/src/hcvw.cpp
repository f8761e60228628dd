#include <string>

#include "byte_io.hpp"
#include "hcv/flowio.hpp"
#include "hcv/global_cost.hpp"

namespace hcv {

namespace {
constexpr std::uint32_t kHcvwVersion = 1;
constexpr std::size_t kMaxWeights = std::size_t{1} << 30;
}  // namespace

std::vector<std::uint8_t> encode_hcvw(const AggWeights& weights) {
    detail::ByteWriter out;
    out.put_text("HCVW");
    out.put<std::uint32_t>(kHcvwVersion);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(weights.layers.size()));
    for (const AggLayer& layer : weights.layers) {
        if (layer.weights.rank() != 5) throw InvalidArgument("HCVW layer weights must be rank 5");
        out.put<std::uint8_t>(static_cast<std::uint8_t>(layer.kind));
        out.put<std::uint8_t>(static_cast<std::uint8_t>(layer.activation));
        for (int s : layer.stride) out.put<std::uint32_t>(static_cast<std::uint32_t>(s));
        for (int p : layer.padding) out.put<std::uint32_t>(static_cast<std::uint32_t>(p));
        for (auto e : layer.weights.shape()) out.put<std::uint32_t>(static_cast<std::uint32_t>(e));
        for (float v : layer.weights.data()) out.put<float>(v);
        out.put<std::uint32_t>(static_cast<std::uint32_t>(layer.bias.size()));
        for (float v : layer.bias) out.put<float>(v);
    }
    return out.take();
}

AggWeights decode_hcvw(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes, "HCVW");
    const auto magic = in.get_bytes(4, "magic");
    if (std::string(magic.begin(), magic.end()) != "HCVW") in.fail("bad magic");
    const auto version = in.get<std::uint32_t>("version");
    if (version != kHcvwVersion) in.fail("unsupported version " + std::to_string(version));
    const auto count = in.get<std::uint32_t>("layer count");

    AggWeights w;
    for (std::uint32_t li = 0; li < count; ++li) {
        AggLayer layer;
        const auto kind = in.get<std::uint8_t>("layer kind");
        if (kind > 1) in.fail("layer " + std::to_string(li) + ": bad kind " + std::to_string(kind));
        layer.kind = static_cast<LayerKind>(kind);
        const auto act = in.get<std::uint8_t>("activation");
        if (act > 1) in.fail("layer " + std::to_string(li) + ": bad activation " + std::to_string(act));
        layer.activation = static_cast<Activation>(act);
        for (int& s : layer.stride) s = static_cast<int>(in.get<std::uint32_t>("stride"));
        for (int& p : layer.padding) p = static_cast<int>(in.get<std::uint32_t>("padding"));
        std::vector<std::int64_t> shape(5);
        std::size_t n = 1;
        for (auto& e : shape) {
            e = in.get<std::uint32_t>("weight extents");
            n *= static_cast<std::size_t>(e);
            if (n > kMaxWeights) in.fail("layer " + std::to_string(li) + ": weight tensor too large");
        }
        if (n * sizeof(float) > in.remaining()) in.fail("truncated weights");
        std::vector<float> data(n);
        for (float& v : data) v = in.get<float>("weights");
        layer.weights = Tensor(std::move(shape), std::move(data));
        const auto nb = in.get<std::uint32_t>("bias length");
        if (std::size_t{nb} * sizeof(float) > in.remaining()) in.fail("truncated biases");
        layer.bias.resize(nb);
        for (float& v : layer.bias) v = in.get<float>("biases");
        w.layers.push_back(std::move(layer));
    }
    if (in.remaining() != 0) in.fail("trailing bytes after last layer");
    return w;
}

AggWeights read_hcvw(const std::filesystem::path& path) {
    return decode_hcvw(read_file_bytes(path));
}

void write_hcvw(const std::filesystem::path& path, const AggWeights& weights) {
    write_file_bytes(path, encode_hcvw(weights));
}

}  // namespace hcv
