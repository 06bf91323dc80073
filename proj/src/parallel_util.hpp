#pragma once

#include "spike/partition.hpp"

#include <functional>
#include <thread>
#include <vector>

namespace spike::detail {

/// Fork-join over nitems disjoint work items with at most max_threads
/// workers; runs inline when one worker suffices.
inline void parallel_for(int nitems, int max_threads, const std::function<void(int)>& fn) {
    if (nitems <= 0) return;
    const int workers = std::max(1, std::min(nitems, max_threads));
    if (workers == 1) {
        for (int i = 0; i < nitems; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    auto run = [&](int w) {
        for (int i = w; i < nitems; i += workers) fn(i);
    };
    for (int w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& t : pool) t.join();
}

/// One task per plan thread: solo partitions get (partition, role 0); dual
/// partitions get roles 0 and 1. Runs inline for a single-thread plan.
inline void run_partition_tasks(const PartitionPlan& plan,
                                const std::function<void(int, int)>& task) {
    if (plan.threads_used == 1) {
        for (int i = 0; i < plan.p; ++i) task(i, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(plan.threads_used);
    for (int i = 0; i < plan.p; ++i) {
        pool.emplace_back(task, i, 0);
        if (plan.kinds[i] == PartitionKind::InnerDual) pool.emplace_back(task, i, 1);
    }
    for (auto& t : pool) t.join();
}

} // namespace spike::detail
