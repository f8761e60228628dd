#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hcv {

/// Dense row-major float tensor of rank 1..5.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> shape, float fill = 0.0f);
    Tensor(std::vector<std::int64_t> shape, std::vector<float> data);

    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    template <typename... Idx>
    float& at(Idx... idx) { return data_[offset({static_cast<std::int64_t>(idx)...})]; }
    template <typename... Idx>
    float at(Idx... idx) const { return data_[offset({static_cast<std::int64_t>(idx)...})]; }

    std::size_t offset(std::initializer_list<std::int64_t> idx) const;

    std::string shape_string() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::int64_t> shape_;
    std::vector<float> data_;
};

std::string shape_string(const std::vector<std::int64_t>& shape);

}  // namespace hcv
