#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fdrp {

// Raised when every (G, model) combination collapsed on one projection.
struct ProjectionUnfitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised inside EM when a component weight drops below the safeguard.
struct FitDegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised on non-finite likelihoods or failed factorizations inside a fit.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void warn(const std::string& msg) {
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    std::cerr << "[warn] " << msg << "\n";
}

// Runs body(i) for i in [begin, end) on at most `threads` workers.
// Iterations must be independent; the first exception is rethrown after join.
inline void parallel_for(int begin, int end, int threads,
                         const std::function<void(int)>& body) {
    const int n = end - begin;
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    const int workers = std::min(threads, n);
    std::atomic<int> next{begin};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= end) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace fdrp
