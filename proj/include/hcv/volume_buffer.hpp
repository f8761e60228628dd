#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <new>
#include <vector>

#include "hcv/errors.hpp"

namespace hcv {

/// Live/peak byte accounting for cost-volume storage. Only buffers allocated
/// through VolumeAllocator are counted.
class VolumeTracker {
public:
    static std::int64_t live_bytes();
    static std::int64_t peak_bytes();
    /// Sets peak to the current live count.
    static void reset_peak();
    /// 0 disables the cap.
    static void set_cap(std::int64_t bytes);
    static std::int64_t cap();

    static void on_allocate(std::size_t bytes);
    static void on_deallocate(std::size_t bytes);
};

template <typename T>
struct VolumeAllocator {
    using value_type = T;

    VolumeAllocator() = default;
    template <typename U>
    VolumeAllocator(const VolumeAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        VolumeTracker::on_allocate(n * sizeof(T));
        return static_cast<T*>(::operator new(n * sizeof(T)));
    }
    void deallocate(T* p, std::size_t n) noexcept {
        ::operator delete(p);
        VolumeTracker::on_deallocate(n * sizeof(T));
    }

    template <typename U>
    bool operator==(const VolumeAllocator<U>&) const noexcept { return true; }
};

template <typename T>
using VolumeVector = std::vector<T, VolumeAllocator<T>>;

/// Packed 1-bit-per-slot mask stored in tracked memory.
class VolumeMask {
public:
    VolumeMask() = default;
    explicit VolumeMask(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

    std::size_t size() const { return size_; }
    std::size_t storage_bytes() const { return words_.size() * sizeof(std::uint64_t); }

    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool on) {
        const std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (on) {
            words_[i >> 6] |= bit;
        } else {
            words_[i >> 6] &= ~bit;
        }
    }

    friend bool operator==(const VolumeMask&, const VolumeMask&) = default;

private:
    std::size_t size_ = 0;
    VolumeVector<std::uint64_t> words_;
};

}  // namespace hcv
