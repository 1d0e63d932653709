#pragma once

#include "seqlock.hpp"

#include <cstdint>

namespace afll {

// One load measurement. `score` is the clamped [0,1] value every control
// decision consumes; `raw_score` keeps the unclamped weighted sum, which is
// what the learner differences (queue blow-ups carry real signal there).
struct LoadSample {
    std::int64_t timestamp_ms = 0;
    std::int64_t queue_size = 0;
    double contention = 0.0;   // active workers / max workers
    double memory_ratio = 0.0; // simulated bytes / budget
    double score = 0.0;        // clamped to [0,1]
    double raw_score = 0.0;    // unclamped
};

// 0.6 * min(Q/100, 1) + 0.3 * T + 0.1 * M, clamped to [0,1].
double load_score(std::int64_t queue_size, double contention, double memory_ratio);

// Same weighted sum without the queue-term and final clamps.
double load_score_raw(std::int64_t queue_size, double contention, double memory_ratio);

double contention_rate(std::int64_t active_workers, std::int64_t max_workers);

// Latest-sample publisher. One producer, lock-free readers.
class LoadMonitor {
public:
    LoadMonitor() : cell_(LoadSample{}) {}

    LoadSample sample(std::int64_t timestamp_ms, std::int64_t queue_size, double contention,
                      double memory_ratio);
    void publish(const LoadSample& s) { cell_.store(s); }
    LoadSample latest() const { return cell_.load(); }

private:
    SnapshotCell<LoadSample> cell_;
};

} // namespace afll
