#ifndef RELIEFSCAN_PARALLEL_HPP
#define RELIEFSCAN_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace reliefscan {

// Worker cap: RELIEFSCAN_THREADS env var if set, else hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("RELIEFSCAN_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Each index writes only to its own output slot,
// so results are identical regardless of scheduling.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn, int threads = 0) {
    if (threads <= 0) threads = worker_count();
    if (threads == 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    size_t pool = std::min<size_t>(static_cast<size_t>(threads), n);
    std::vector<std::thread> ts;
    ts.reserve(pool);
    for (size_t t = 0; t < pool; ++t) ts.emplace_back(worker);
    for (auto& t : ts) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace reliefscan

#endif
