#include "hcv/tensor.hpp"

#include <numeric>
#include <sstream>

#include "hcv/errors.hpp"

namespace hcv {

namespace {

std::size_t element_count(const std::vector<std::int64_t>& shape) {
    if (shape.empty() || shape.size() > 5) {
        throw InvalidArgument("tensor rank must be in [1, 5]");
    }
    std::size_t n = 1;
    for (auto e : shape) {
        if (e < 0) throw InvalidArgument("negative tensor extent");
        n *= static_cast<std::size_t>(e);
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape, float fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::int64_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw InvalidArgument("tensor data length " + std::to_string(data_.size()) +
                              " does not match shape " + shape_string());
    }
}

std::size_t Tensor::offset(std::initializer_list<std::int64_t> idx) const {
    std::size_t off = 0;
    std::size_t axis = 0;
    for (auto i : idx) {
        off = off * static_cast<std::size_t>(shape_[axis]) + static_cast<std::size_t>(i);
        ++axis;
    }
    return off;
}

std::string Tensor::shape_string() const { return hcv::shape_string(shape_); }

std::string shape_string(const std::vector<std::int64_t>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ']';
    return os.str();
}

}  // namespace hcv
