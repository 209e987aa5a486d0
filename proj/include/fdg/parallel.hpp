#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fdg {

// Runs fn(i) for i in [0, count) across hardware threads. Work items must be
// independent and write only to their own slots; the first exception thrown
// by any item is rethrown after all threads join.
template <typename Fn>
void parallel_for(int count, Fn&& fn) {
    if (count <= 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    int workers = static_cast<int>(std::min<unsigned>(hw ? hw : 1, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fdg
