#include "topodim/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace topodim {

namespace {
std::atomic<unsigned> g_thread_budget{0};

unsigned effective_budget() {
    unsigned budget = g_thread_budget.load();
    if (budget == 0) budget = std::thread::hardware_concurrency();
    return std::max(1u, budget);
}
} // namespace

void set_thread_budget(unsigned n) { g_thread_budget.store(n); }

unsigned thread_budget() { return effective_budget(); }

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    if (count == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(effective_budget(), count);
    if (workers <= 1) {
        body(0, count);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : threads) t.join();
}

} // namespace topodim
