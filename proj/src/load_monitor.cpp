#include "load_monitor.hpp"

#include <algorithm>
#include <stdexcept>

namespace afll {

namespace {

void check_inputs(std::int64_t queue_size, double contention, double memory_ratio) {
    if (queue_size < 0)
        throw std::invalid_argument("load_score: queue_size must be >= 0");
    if (!(contention >= 0.0 && contention <= 1.0))
        throw std::invalid_argument("load_score: contention must be in [0,1]");
    if (!(memory_ratio >= 0.0 && memory_ratio <= 1.0))
        throw std::invalid_argument("load_score: memory_ratio must be in [0,1]");
}

} // namespace

double load_score(std::int64_t queue_size, double contention, double memory_ratio) {
    check_inputs(queue_size, contention, memory_ratio);
    const double queue_term = std::min(static_cast<double>(queue_size) / 100.0, 1.0);
    const double s = 0.6 * queue_term + 0.3 * contention + 0.1 * memory_ratio;
    return std::clamp(s, 0.0, 1.0);
}

double load_score_raw(std::int64_t queue_size, double contention, double memory_ratio) {
    check_inputs(queue_size, contention, memory_ratio);
    return 0.6 * static_cast<double>(queue_size) / 100.0 + 0.3 * contention +
           0.1 * memory_ratio;
}

double contention_rate(std::int64_t active_workers, std::int64_t max_workers) {
    if (max_workers < 1)
        throw std::invalid_argument("contention_rate: max_workers must be >= 1");
    if (active_workers < 0 || active_workers > max_workers)
        throw std::invalid_argument("contention_rate: require 0 <= active <= max");
    return static_cast<double>(active_workers) / static_cast<double>(max_workers);
}

LoadSample LoadMonitor::sample(std::int64_t timestamp_ms, std::int64_t queue_size,
                               double contention, double memory_ratio) {
    LoadSample s;
    s.timestamp_ms = timestamp_ms;
    s.queue_size = queue_size;
    s.contention = contention;
    s.memory_ratio = memory_ratio;
    s.score = load_score(queue_size, contention, memory_ratio);
    s.raw_score = load_score_raw(queue_size, contention, memory_ratio);
    publish(s);
    return s;
}

} // namespace afll
