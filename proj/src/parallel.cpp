#include "hcv/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hcv {

namespace {
std::atomic<int> g_threads{1};
}

int num_threads() { return g_threads.load(); }

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& body) {
    const std::int64_t n = end - begin;
    if (n <= 0) return;
    const std::int64_t workers = std::min<std::int64_t>(num_threads(), n);
    if (workers <= 1) {
        for (std::int64_t i = begin; i < end; ++i) body(i);
        return;
    }
    const std::int64_t chunk = (n + workers - 1) / workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (std::int64_t t = 0; t < workers; ++t) {
            const std::int64_t lo = begin + t * chunk;
            const std::int64_t hi = std::min(end, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([lo, hi, &body, &failure, &failure_mutex] {
                try {
                    for (std::int64_t i = lo; i < hi; ++i) body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace hcv
