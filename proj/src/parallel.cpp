#include "choquard/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace choquard {

int worker_count() {
    static const int cached = [] {
        int n = static_cast<int>(std::thread::hardware_concurrency());
        if (const char* env = std::getenv("CHOQUARD_THREADS")) {
            try {
                n = std::stoi(env);
            } catch (...) {
            }
        }
        return std::max(1, n);
    }();
    return cached;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    const auto workers = static_cast<std::size_t>(worker_count());
    // Small loops are not worth a thread launch.
    if (workers <= 1 || n < 256) {
        body(0, n);
        return;
    }
    const std::size_t chunks = std::min(workers, n);
    const std::size_t step = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    pool.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) {
        const std::size_t b = c * step;
        const std::size_t e = std::min(n, b + step);
        if (b < e) pool.emplace_back(body, b, e);
    }
    body(0, std::min(n, step));
    for (auto& t : pool) t.join();
}

}  // namespace choquard
