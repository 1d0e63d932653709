#include <doctest.h>

#include "rng.hpp"
#include "throttler.hpp"

#include <cmath>

using namespace afll;

namespace {

const PolicyTable kPolicy = default_policy_table();

TransmitDecision decide(MessageType t, const LearningConfig& cfg, double weight,
                        double load, std::int64_t tsl_ms, std::int64_t queue, double u) {
    return should_transmit(kPolicy[index_of(t)], cfg, weight,
                           weight * cfg.epsilon_per_message, load, tsl_ms, queue, u);
}

} // namespace

TEST_CASE("step 0 protects critical messages at any load") {
    LearningConfig cfg;
    for (MessageType t : {MessageType::Death, MessageType::Damage}) {
        const TransmitDecision d = decide(t, cfg, 0.4, 0.99, 0, 1000000, 0.0);
        CHECK(d.allow);
        CHECK(d.step == DecisionStep::CriticalBypass);
    }
}

TEST_CASE("step 1 forces the minimum rate below extreme load") {
    LearningConfig cfg;
    // interval elapsed (60ms >= 50ms) and load 0.84 < 0.85
    const TransmitDecision d =
        decide(MessageType::Projectile, cfg, 0.45, 0.84, 60, 0, 0.99);
    CHECK(d.allow);
    CHECK(d.step == DecisionStep::MinFpsForce);

    // at extreme load the guarantee is off
    const TransmitDecision e =
        decide(MessageType::Projectile, cfg, 0.45, 0.85, 60, 0, 0.99);
    CHECK(e.step != DecisionStep::MinFpsForce);
}

TEST_CASE("step 2 allows when the cached prediction stays on target") {
    LearningConfig cfg; // epsilon 0.01
    // interval NOT elapsed, low load: 0.30 + 0.725*0.01 <= 0.70
    const TransmitDecision d =
        decide(MessageType::OwnState, cfg, 0.725, 0.30, 10, 0, 0.99);
    CHECK(d.allow);
    CHECK(d.step == DecisionStep::PredictedAllow);
}

TEST_CASE("blocking example: own-state at load 0.80 with queue 1200 blocks at 37%") {
    LearningConfig cfg;
    cfg.overload_basis = OverloadBasis::Current;
    // interval not elapsed so Steps 0..2 fall through (0.80 + eps > 0.70)
    const TransmitDecision d =
        decide(MessageType::OwnState, cfg, 0.85, 0.80, 10, 1200, 0.999);
    CHECK_FALSE(d.step == DecisionStep::CriticalBypass);
    CHECK_FALSE(d.step == DecisionStep::MinFpsForce);
    // P = min(0.85 * ((0.80-0.70)/0.30) * 1.2 + (1200-1000)/6666, 0.95)
    CHECK(d.block_probability == doctest::Approx(0.37).epsilon(0.005 / 0.37));
    CHECK(std::fabs(d.block_probability - 0.37) < 0.005);
}

TEST_CASE("queue penalty") {
    CHECK(queue_penalty(1000) == 0.0);
    CHECK(queue_penalty(500) == 0.0);
    CHECK(queue_penalty(0) == 0.0);
    CHECK(queue_penalty(1200) == doctest::Approx(200.0 / 6666.0));
    CHECK(queue_penalty(7666) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS_AS(queue_penalty(-1), std::invalid_argument);
}

TEST_CASE("blocking probability is monotone in weight, load and queue") {
    LearningConfig cfg;
    cfg.overload_basis = OverloadBasis::Current;
    auto p_block = [&](double w, double load, std::int64_t q) {
        // force Step 3 by keeping the interval fresh and load above target
        const TransmitDecision d = decide(MessageType::OwnState, cfg, w, load, 0, q, 2.0);
        return d.block_probability;
    };
    double last = -1.0;
    for (double w = 0.50; w <= 0.95; w += 0.05) {
        const double p = p_block(w, 0.80, 0);
        CHECK(p >= last);
        last = p;
    }
    last = -1.0;
    for (double load = 0.71; load <= 0.99; load += 0.02) {
        const double p = p_block(0.7, load, 0);
        CHECK(p >= last);
        last = p;
    }
    last = -1.0;
    for (std::int64_t q = 1000; q <= 8000; q += 500) {
        const double p = p_block(0.6, 0.75, q);
        CHECK(p >= last);
        last = p;
    }
}

TEST_CASE("blocked probability respects the per-type ceiling") {
    LearningConfig cfg;
    cfg.overload_basis = OverloadBasis::Current;
    const TransmitDecision d =
        decide(MessageType::OwnState, cfg, 0.95, 0.999, 0, 100000, 2.0);
    CHECK(d.block_probability <= 0.95 + 1e-12);
    const TransmitDecision e = decide(MessageType::Cone, cfg, 0.80, 0.999, 0, 100000, 2.0);
    CHECK(e.block_probability <= 0.80 + 1e-12);
}

TEST_CASE("predicted basis reaches step 3 below target load") {
    LearningConfig cfg;
    cfg.overload_basis = OverloadBasis::Predicted;
    cfg.epsilon_per_message = 1.0; // per-decision increment = w
    // load 0.30, w 0.95: L_pred = 1.25 -> over = (1.25-0.7)/0.3
    const TransmitDecision d =
        decide(MessageType::NearbyPlayers, cfg, 0.95, 0.30, 10, 0, 2.0);
    CHECK(d.step == DecisionStep::ProbabilisticAllow);
    CHECK(d.block_probability == doctest::Approx(0.95)); // capped by maxRate
}

TEST_CASE("step 3 empirical block rate matches its probability") {
    LearningConfig cfg;
    cfg.overload_basis = OverloadBasis::Current;
    // fixed inputs -> fixed P_block; interval fresh forces Step 3
    const TransmitDecision probe =
        decide(MessageType::OwnState, cfg, 0.85, 0.80, 10, 1200, 2.0);
    const double p = probe.block_probability;
    REQUIRE(p > 0.0);
    REQUIRE(p < 1.0);

    Rng rng(123456789);
    constexpr int kDraws = 100000;
    int blocked = 0;
    for (int i = 0; i < kDraws; ++i) {
        const TransmitDecision d =
            decide(MessageType::OwnState, cfg, 0.85, 0.80, 10, 1200, rng.uniform01());
        if (!d.allow) ++blocked;
    }
    const double expect = p * kDraws;
    const double sigma = std::sqrt(kDraws * p * (1.0 - p));
    CHECK(std::fabs(blocked - expect) <= 3.0 * sigma);
}

TEST_CASE("nearby kept fraction ramps from 1.0 to the floor") {
    LearningConfig cfg; // target 0.70, extreme 0.85, floor 0.20
    CHECK(nearby_kept_fraction(0.50, cfg) == 1.0);
    CHECK(nearby_kept_fraction(0.70, cfg) == 1.0);
    CHECK(nearby_kept_fraction(0.775, cfg) == doctest::Approx(0.60));
    CHECK(nearby_kept_fraction(0.85, cfg) == doctest::Approx(0.20));
    CHECK(nearby_kept_fraction(0.99, cfg) == doctest::Approx(0.20));
}

TEST_CASE("recipient selection keeps the nearest and is deterministic on ties") {
    LearningConfig cfg;
    auto make_visible = [](int n) {
        std::vector<VisibleEntry> v;
        for (int i = 0; i < n; ++i)
            v.push_back({i, static_cast<double>((i * 37) % 100)});
        return v;
    };

    SUBCASE("below target keeps everyone") {
        auto v = make_visible(100);
        const RecipientSelection sel = select_nearby_recipients(v, 0.50, cfg);
        CHECK(sel.visible_count == 100);
        CHECK(sel.transmitted_count == 100);
        CHECK(sel.fraction == 1.0);
    }
    SUBCASE("at extreme load keeps ceil(0.20 * n) nearest") {
        auto v = make_visible(100);
        const RecipientSelection sel = select_nearby_recipients(v, 0.85, cfg);
        CHECK(sel.transmitted_count == 20);
        CHECK(v.size() == 20);
    }
    SUBCASE("midpoint keeps 60") {
        auto v = make_visible(100);
        const RecipientSelection sel = select_nearby_recipients(v, 0.775, cfg);
        CHECK(sel.transmitted_count == 60);
    }
    SUBCASE("every omitted recipient is at least as far as every kept one") {
        std::vector<VisibleEntry> v;
        Rng rng(77);
        for (int i = 0; i < 61; ++i) v.push_back({i, rng.uniform(0.0, 500.0)});
        auto full = v;
        const RecipientSelection sel = select_nearby_recipients(v, 0.80, cfg);
        REQUIRE(sel.transmitted_count < sel.visible_count);
        double max_kept = 0.0;
        for (const auto& e : v) max_kept = std::max(max_kept, e.distance);
        int omitted = 0;
        for (const auto& e : full) {
            bool kept = false;
            for (const auto& k : v)
                if (k.player_id == e.player_id) kept = true;
            if (!kept) {
                ++omitted;
                CHECK(e.distance >= max_kept);
            }
        }
        CHECK(omitted == sel.visible_count - sel.transmitted_count);
    }
    SUBCASE("equal distances break ties by player id") {
        std::vector<VisibleEntry> v = {{9, 5.0}, {2, 5.0}, {7, 5.0}, {1, 5.0}};
        select_nearby_recipients(v, 0.80, cfg); // keeps ceil(f*4) in sorted order
        for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i - 1].player_id < v[i].player_id);
    }
    SUBCASE("negative distance is a contract violation") {
        std::vector<VisibleEntry> v = {{0, -1.0}};
        CHECK_THROWS_AS(select_nearby_recipients(v, 0.5, cfg), std::invalid_argument);
    }
}

TEST_CASE("decisions do no learning work") {
    instr::reset_counters();
    LearningConfig cfg;
    Rng rng(1);
    for (int i = 0; i < 10000; ++i)
        decide(MessageType::OwnState, cfg, 0.85, 0.80, 10, 1200, rng.uniform01());
    CHECK(instr::hot_path_violations.load() == 0);
}
