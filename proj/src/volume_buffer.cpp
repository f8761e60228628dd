#include "hcv/volume_buffer.hpp"

#include <string>

namespace hcv {

namespace {
std::atomic<std::int64_t> g_live{0};
std::atomic<std::int64_t> g_peak{0};
std::atomic<std::int64_t> g_cap{0};
}  // namespace

std::int64_t VolumeTracker::live_bytes() { return g_live.load(); }
std::int64_t VolumeTracker::peak_bytes() { return g_peak.load(); }
void VolumeTracker::reset_peak() { g_peak.store(g_live.load()); }
void VolumeTracker::set_cap(std::int64_t bytes) { g_cap.store(bytes); }
std::int64_t VolumeTracker::cap() { return g_cap.load(); }

void VolumeTracker::on_allocate(std::size_t bytes) {
    const auto n = static_cast<std::int64_t>(bytes);
    const std::int64_t cap = g_cap.load();
    const std::int64_t live = g_live.fetch_add(n) + n;
    if (cap > 0 && live > cap) {
        g_live.fetch_sub(n);
        throw BudgetExceeded("volume allocation of " + std::to_string(n) + " bytes exceeds the " +
                             std::to_string(cap) + "-byte cap");
    }
    std::int64_t peak = g_peak.load();
    while (live > peak && !g_peak.compare_exchange_weak(peak, live)) {
    }
}

void VolumeTracker::on_deallocate(std::size_t bytes) {
    g_live.fetch_sub(static_cast<std::int64_t>(bytes));
}

}  // namespace hcv
