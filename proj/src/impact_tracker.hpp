#pragma once

#include "instrumentation.hpp"
#include "types.hpp"

#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace afll {

// Closed 100ms observation window.
struct ImpactWindow {
    std::int64_t window_start_ms = 0;
    std::array<std::int64_t, kMessageTypeCount> counts{};
    double delta_l = 0.0;
};

// Running sums over the retained window ring. Count sums stay in integers so
// add/remove is exact; the mixed sums are doubles.
struct StatsCache {
    std::array<std::int64_t, kMessageTypeCount> sum_c{};
    std::array<std::int64_t, kMessageTypeCount> sum_c2{};
    std::array<double, kMessageTypeCount> sum_cl{};
    double sum_dl = 0.0;
    std::int64_t window_count = 0;
};

struct LearningBatch {
    std::array<std::int64_t, kMessageTypeCount> counts{};
    double load_now = 0.0;  // raw load score at drain time
    double load_prev = 0.0; // raw load score at the previous drain
};

struct ImpactReportRow {
    MessageType msg_type = MessageType::Death;
    std::int64_t windows = 0;
    std::optional<double> slope; // empty when the regression is degenerate
    double mean_count = 0.0;
};

// Records per-type transmissions into the open window (wait-free) and keeps
// the incremental regression statistics over closed windows. Window rotation,
// eviction and draining belong to the learning side.
class ImpactTracker {
public:
    explicit ImpactTracker(int max_windows = 200);

    // Hot path: single relaxed increment, callable from any thread.
    void record_transmission(MessageType t) {
        instr::HotPathScope hot;
        open_counts_[index_of(t)].fetch_add(1, std::memory_order_relaxed);
    }

    // Learning side: close the open window, fold it into the cache and the
    // one-second accumulator.
    void rotate_window(std::int64_t window_start_ms, double delta_l);

    void add_window(const std::array<std::int64_t, kMessageTypeCount>& counts, double delta_l,
                    std::int64_t window_start_ms = 0);
    void remove_oldest_window();

    // Least-squares slope of window delta_l on per-window counts of `t`.
    std::optional<double> regression_coeff(MessageType t) const;

    LearningBatch drain_learning_batch(double current_raw_load);

    std::vector<ImpactReportRow> impact_report() const;

    const StatsCache& cache() const { return cache_; }
    const std::deque<ImpactWindow>& windows() const { return ring_; }
    std::array<std::int64_t, kMessageTypeCount> open_counts() const;
    int max_windows() const { return max_windows_; }

private:
    int max_windows_;
    std::array<std::atomic<std::int64_t>, kMessageTypeCount> open_counts_{};
    std::deque<ImpactWindow> ring_;
    StatsCache cache_;
    std::array<std::int64_t, kMessageTypeCount> accum_counts_{};
    double last_drain_load_ = 0.0;
};

} // namespace afll
