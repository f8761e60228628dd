#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "hcv/errors.hpp"

namespace hcv::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class ByteWriter {
public:
    template <typename T>
    void put(T value) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }
    void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
    void put_text(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian reader; `what` names the field in errors.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string format)
        : bytes_(bytes), format_(std::move(format)) {}

    template <typename T>
    T get(const char* what) {
        require(sizeof(T), what);
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::span<const std::uint8_t> get_bytes(std::size_t n, const char* what) {
        require(n, what);
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError(format_ + ": " + msg);
    }

private:
    void require(std::size_t n, const char* what) const {
        if (remaining() < n) fail(std::string("truncated ") + what);
    }

    std::span<const std::uint8_t> bytes_;
    std::string format_;
    std::size_t pos_ = 0;
};

}  // namespace hcv::detail
