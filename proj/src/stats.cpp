#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace afll::stats {

namespace {

void require_nonempty(std::span<const double> xs, const char* who) {
    if (xs.empty()) throw std::invalid_argument(std::string(who) + ": empty series");
}

double variance_sample(std::span<const double> xs) {
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

} // namespace

double mean(std::span<const double> xs) {
    require_nonempty(xs, "mean");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double median(std::span<const double> xs) {
    require_nonempty(xs, "median");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stddev_population(std::span<const double> xs) {
    require_nonempty(xs, "stddev");
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

double stddev_sample(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("stddev_sample: need >= 2 values");
    return std::sqrt(variance_sample(xs));
}

double percentile(std::span<const double> xs, double q) {
    require_nonempty(xs, "percentile");
    if (!(q >= 0.0 && q <= 100.0))
        throw std::invalid_argument("percentile: q must be in [0,100]");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
    if (rank < 1) rank = 1;
    if (rank > v.size()) rank = v.size();
    return v[rank - 1];
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("welch_t_test: both series need >= 2 values");
    const double ma = mean(a), mb = mean(b);
    const double va = variance_sample(a), vb = variance_sample(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double se2 = va / na + vb / nb;
    if (se2 == 0.0) {
        if (ma == mb) return {0.0, na + nb - 2.0, 1.0};
        throw std::invalid_argument("welch_t_test: zero variance in both series");
    }
    WelchResult r;
    r.t = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 /
           (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
    const boost::math::students_t dist(r.df);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
    return r;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("cohens_d: both series need >= 2 values");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = variance_sample(a), vb = variance_sample(b);
    const double pooled =
        std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
    if (pooled == 0.0) {
        if (mean(a) == mean(b)) return 0.0;
        throw std::invalid_argument("cohens_d: zero pooled standard deviation");
    }
    return (mean(a) - mean(b)) / pooled;
}

std::vector<SpikeBucket> spike_count(std::span<const double> series,
                                     std::span<const double> thresholds) {
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] < thresholds[i - 1])
            throw std::invalid_argument("spike_count: thresholds must be ascending");
    std::vector<SpikeBucket> out;
    out.reserve(thresholds.size());
    for (double thr : thresholds) {
        SpikeBucket b;
        b.threshold = thr;
        for (double x : series)
            if (x > thr) ++b.count;
        b.fraction = series.empty()
                         ? 0.0
                         : static_cast<double>(b.count) / static_cast<double>(series.size());
        out.push_back(b);
    }
    return out;
}

double coefficient_of_variation(std::span<const double> per_run_means) {
    if (per_run_means.size() < 2)
        throw std::invalid_argument("coefficient_of_variation: need >= 2 runs");
    const double m = mean(per_run_means);
    if (m == 0.0) throw std::invalid_argument("coefficient_of_variation: zero mean");
    return 100.0 * stddev_population(per_run_means) / m;
}

} // namespace afll::stats
