#include <doctest.h>

#include "load_monitor.hpp"
#include "rng.hpp"

#include <atomic>
#include <thread>

using namespace afll;

TEST_CASE("load score formula") {
    CHECK(load_score(0, 0.0, 0.0) == 0.0);
    // 0.6*0.5 + 0.3*0.5 + 0.1*0.2
    CHECK(load_score(50, 0.5, 0.2) == doctest::Approx(0.47));
    // queue term saturates at 1.0
    CHECK(load_score(1200, 0.5, 0.5) == doctest::Approx(0.80));
    CHECK(load_score(100, 1.0, 1.0) == 1.0);
    CHECK(load_score(1000000, 1.0, 1.0) == 1.0);
}

TEST_CASE("raw score keeps the unclamped sum") {
    CHECK(load_score_raw(1200, 0.5, 0.5) == doctest::Approx(0.6 * 12.0 + 0.15 + 0.05));
    CHECK(load_score_raw(50, 0.5, 0.2) == doctest::Approx(0.47));
}

TEST_CASE("load score contract violations") {
    CHECK_THROWS_AS(load_score(-1, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(load_score(0, -0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(load_score(0, 1.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(load_score(0, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("contention rate") {
    CHECK(contention_rate(0, 12) == 0.0);
    CHECK(contention_rate(12, 12) == 1.0);
    CHECK(contention_rate(8, 12) == doctest::Approx(0.6667).epsilon(1e-3));
    CHECK_THROWS_AS(contention_rate(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(contention_rate(13, 12), std::invalid_argument);
    CHECK_THROWS_AS(contention_rate(-1, 12), std::invalid_argument);
}

TEST_CASE("load score is monotone and bounded over random inputs") {
    Rng rng(20240811);
    for (int i = 0; i < 5000; ++i) {
        const std::int64_t q = rng.uniform_int(0, 4000);
        const double t = rng.uniform01();
        const double m = rng.uniform01();
        const double s = load_score(q, t, m);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        // monotone in each argument
        CHECK(load_score(q + 13, t, m) >= s);
        CHECK(load_score(q, std::min(1.0, t + 0.05), m) >= s);
        CHECK(load_score(q, t, std::min(1.0, m + 0.05)) >= s);
    }
    // saturation: independent of Q at and above 100
    Rng rng2(7);
    for (int i = 0; i < 200; ++i) {
        const double t = rng2.uniform01(), m = rng2.uniform01();
        CHECK(load_score(100, t, m) == load_score(100 + rng2.uniform_int(0, 100000), t, m));
    }
}

TEST_CASE("monitor publishes an atomic snapshot readable while writing") {
    LoadMonitor monitor;
    std::atomic<bool> stop{false};
    std::atomic<int> torn{0};
    std::thread reader([&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const LoadSample s = monitor.latest();
            // writer always publishes queue_size == timestamp; a torn read
            // would mix fields from different samples
            if (s.queue_size != s.timestamp_ms) torn.fetch_add(1);
        }
    });
    for (std::int64_t i = 0; i < 20000; ++i) {
        LoadSample s;
        s.timestamp_ms = i;
        s.queue_size = i;
        s.contention = 0.5;
        s.memory_ratio = 0.1;
        s.score = 0.3;
        s.raw_score = 0.3;
        monitor.publish(s);
    }
    stop.store(true);
    reader.join();
    CHECK(torn.load() == 0);
    CHECK(monitor.latest().timestamp_ms == 19999);
}
