#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace afll::stats {

double mean(std::span<const double> xs);
double median(std::span<const double> xs);
// Population standard deviation (divisor n).
double stddev_population(std::span<const double> xs);
// Sample standard deviation (divisor n-1).
double stddev_sample(std::span<const double> xs);

// Nearest-rank percentile, q in [0, 100].
double percentile(std::span<const double> xs, double q);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0; // two-sided
};

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

double cohens_d(std::span<const double> a, std::span<const double> b);

struct SpikeBucket {
    double threshold = 0.0;
    std::int64_t count = 0;
    double fraction = 0.0;
};

std::vector<SpikeBucket> spike_count(std::span<const double> series,
                                     std::span<const double> thresholds);

// 100 * population std / mean.
double coefficient_of_variation(std::span<const double> per_run_means);

} // namespace afll::stats
