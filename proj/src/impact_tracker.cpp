#include "impact_tracker.hpp"

#include <stdexcept>
#include <vector>

namespace afll {

ImpactTracker::ImpactTracker(int max_windows) : max_windows_(max_windows) {
    if (max_windows < 1)
        throw std::invalid_argument("ImpactTracker: max_windows must be >= 1");
}

void ImpactTracker::rotate_window(std::int64_t window_start_ms, double delta_l) {
    std::array<std::int64_t, kMessageTypeCount> counts;
    for (int i = 0; i < kMessageTypeCount; ++i)
        counts[i] = open_counts_[i].exchange(0, std::memory_order_relaxed);
    add_window(counts, delta_l, window_start_ms);
    for (int i = 0; i < kMessageTypeCount; ++i)
        accum_counts_[i] += counts[i];
}

void ImpactTracker::add_window(const std::array<std::int64_t, kMessageTypeCount>& counts,
                               double delta_l, std::int64_t window_start_ms) {
    instr::count_learning_op();
    ImpactWindow w;
    w.window_start_ms = window_start_ms;
    w.counts = counts;
    w.delta_l = delta_l;
    ring_.push_back(w);
    for (int i = 0; i < kMessageTypeCount; ++i) {
        cache_.sum_c[i] += counts[i];
        cache_.sum_c2[i] += counts[i] * counts[i];
        cache_.sum_cl[i] += static_cast<double>(counts[i]) * delta_l;
    }
    cache_.sum_dl += delta_l;
    ++cache_.window_count;
    if (cache_.window_count > max_windows_) remove_oldest_window();
}

void ImpactTracker::remove_oldest_window() {
    instr::count_learning_op();
    if (ring_.empty())
        throw std::logic_error("remove_oldest_window: ring is empty");
    const ImpactWindow old = ring_.front();
    ring_.pop_front();
    for (int i = 0; i < kMessageTypeCount; ++i) {
        cache_.sum_c[i] -= old.counts[i];
        cache_.sum_c2[i] -= old.counts[i] * old.counts[i];
        cache_.sum_cl[i] -= static_cast<double>(old.counts[i]) * old.delta_l;
    }
    cache_.sum_dl -= old.delta_l;
    --cache_.window_count;
}

std::optional<double> ImpactTracker::regression_coeff(MessageType t) const {
    instr::count_learning_op();
    const int i = index_of(t);
    const std::int64_t n = cache_.window_count;
    if (n < 2) return std::nullopt;
    const std::int64_t den_int = n * cache_.sum_c2[i] - cache_.sum_c[i] * cache_.sum_c[i];
    if (den_int == 0) return std::nullopt;
    const double num =
        static_cast<double>(n) * cache_.sum_cl[i] -
        static_cast<double>(cache_.sum_c[i]) * cache_.sum_dl;
    return num / static_cast<double>(den_int);
}

LearningBatch ImpactTracker::drain_learning_batch(double current_raw_load) {
    instr::count_learning_op();
    LearningBatch batch;
    batch.counts = accum_counts_;
    batch.load_now = current_raw_load;
    batch.load_prev = last_drain_load_;
    accum_counts_.fill(0);
    last_drain_load_ = current_raw_load;
    return batch;
}

std::vector<ImpactReportRow> ImpactTracker::impact_report() const {
    std::vector<ImpactReportRow> rows;
    rows.reserve(kMessageTypeCount);
    for (MessageType t : all_message_types()) {
        ImpactReportRow row;
        row.msg_type = t;
        row.windows = cache_.window_count;
        row.slope = regression_coeff(t);
        row.mean_count =
            cache_.window_count == 0
                ? 0.0
                : static_cast<double>(cache_.sum_c[index_of(t)]) /
                      static_cast<double>(cache_.window_count);
        rows.push_back(row);
    }
    return rows;
}

std::array<std::int64_t, kMessageTypeCount> ImpactTracker::open_counts() const {
    std::array<std::int64_t, kMessageTypeCount> out;
    for (int i = 0; i < kMessageTypeCount; ++i)
        out[i] = open_counts_[i].load(std::memory_order_relaxed);
    return out;
}

} // namespace afll
