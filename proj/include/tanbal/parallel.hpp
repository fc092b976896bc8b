#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <future>
#include <thread>
#include <vector>

namespace tanbal {

// Thread budget shared by the drivers. Initialised from TANBAL_NUM_THREADS,
// falling back to the hardware concurrency. A budget of 1 is the
// deterministic single-threaded mode.
namespace detail {
inline int initial_thread_budget() {
    if (const char* env = std::getenv("TANBAL_NUM_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline std::atomic<int>& thread_budget_storage() {
    static std::atomic<int> budget{initial_thread_budget()};
    return budget;
}
}  // namespace detail

inline int thread_count() { return detail::thread_budget_storage().load(); }
inline void set_thread_count(int n) { detail::thread_budget_storage().store(std::max(1, n)); }

/// Runs two independent tasks, concurrently when the budget allows. Results
/// never depend on scheduling because the tasks share no output.
template <class F, class G>
void parallel_invoke(F&& f, G&& g) {
    if (thread_count() <= 1) {
        f();
        g();
        return;
    }
    auto other = std::async(std::launch::async, std::forward<G>(g));
    f();
    other.get();
}

/// Calls body(i) for i in [0, count). Each index must write only its own slot.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const auto workers = static_cast<std::size_t>(thread_count());
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const std::size_t chunks = std::min(workers, count);
    std::vector<std::future<void>> jobs;
    jobs.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        jobs.push_back(std::async(std::launch::async, [&, c] {
            for (std::size_t i = c; i < count; i += chunks) body(i);
        }));
    }
    for (auto& j : jobs) j.get();
}

}  // namespace tanbal
