#pragma once

#include <atomic>
#include <cstdint>

namespace afll::instr {

// Hot-path purity accounting. Decision and recording code marks itself as
// "hot"; every learning-side operation counts a violation if it runs while a
// hot-path scope is active on the same thread. A clean run keeps the
// violation counter at zero.
inline thread_local int hot_path_depth = 0;
inline std::atomic<std::uint64_t> learning_ops_total{0};
inline std::atomic<std::uint64_t> hot_path_violations{0};

inline void count_learning_op() {
    learning_ops_total.fetch_add(1, std::memory_order_relaxed);
    if (hot_path_depth > 0)
        hot_path_violations.fetch_add(1, std::memory_order_relaxed);
}

struct HotPathScope {
    HotPathScope() { ++hot_path_depth; }
    ~HotPathScope() { --hot_path_depth; }
    HotPathScope(const HotPathScope&) = delete;
    HotPathScope& operator=(const HotPathScope&) = delete;
};

inline void reset_counters() {
    learning_ops_total.store(0, std::memory_order_relaxed);
    hot_path_violations.store(0, std::memory_order_relaxed);
}

} // namespace afll::instr
