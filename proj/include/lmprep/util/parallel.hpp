#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace lmprep::util {

inline int effective_workers(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : int(hc);
}

// Runs fn(index) for index in [0, count) on up to `workers` threads.
// Indices are dealt in fixed round-robin order so the assignment (and any
// per-index output slot) is independent of scheduling. The first exception
// thrown by any task is rethrown on the calling thread.
template <class Fn>
void parallel_for_index(size_t count, int workers, Fn&& fn) {
    workers = effective_workers(workers);
    if (count == 0) return;
    if (workers <= 1 || count == 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    size_t nthreads = std::min<size_t>(size_t(workers), count);
    std::vector<std::exception_ptr> errors(nthreads);
    std::vector<std::thread> threads;
    threads.reserve(nthreads);
    for (size_t t = 0; t < nthreads; ++t) {
        threads.emplace_back([&, t] {
            try {
                for (size_t i = t; i < count; i += nthreads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Maps fn over [0, count) and collects results in index order, so the
// output is deterministic regardless of worker count.
template <class R, class Fn>
std::vector<R> parallel_map(size_t count, int workers, Fn&& fn) {
    std::vector<R> results(count);
    parallel_for_index(count, workers, [&](size_t i) { results[i] = fn(i); });
    return results;
}

} // namespace lmprep::util
