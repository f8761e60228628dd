#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "hcv/flow_field.hpp"
#include "hcv/image.hpp"

namespace hcv {

/// Binary PGM (P5) or PPM (P6) with maxval 255.
Image decode_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pnm(const Image& image);
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& image);

/// Middlebury .flo. Components with magnitude > 1e9 mark invalid pixels.
inline constexpr float kUnknownFlow = 1e10f;
FlowField decode_flo(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_flo(const FlowField& flow);
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

/// Middlebury colour-wheel rendering. Without `max_magnitude` the 99th
/// percentile of finite magnitudes is used.
Image flow_to_color(const FlowField& flow, std::optional<float> max_magnitude = std::nullopt);

/// The 55-entry wheel, RGB in [0, 255].
const std::vector<std::array<float, 3>>& color_wheel();

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace hcv
