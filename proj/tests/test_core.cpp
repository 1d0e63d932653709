#include <doctest.h>

#include "config.hpp"
#include "types.hpp"

#include <filesystem>
#include <set>

using namespace afll;

TEST_CASE("default policy table matches the control-policy rows") {
    const PolicyTable t = default_policy_table();

    CHECK(t.size() == 6);
    std::set<int> indices;
    for (const auto& row : t) indices.insert(index_of(row.msg_type));
    CHECK(indices.size() == 6);

    const auto& own = t[index_of(MessageType::OwnState)];
    CHECK(own.weight_max == doctest::Approx(0.95));
    CHECK(own.min_interval_ms == 100);
    CHECK(own.importance == Importance::Low);

    const auto& death = t[index_of(MessageType::Death)];
    CHECK(death.importance == Importance::Critical);
    CHECK(death.min_interval_ms == 0); // immediate
    CHECK(death.weight_min == doctest::Approx(0.05));
    CHECK(death.weight_max == doctest::Approx(0.30));
    CHECK(death.max_block_rate == 0.0);

    const auto& damage = t[index_of(MessageType::Damage)];
    CHECK(damage.importance == Importance::Critical);
    CHECK(damage.max_block_rate == 0.0);
    CHECK(damage.weight_min == doctest::Approx(0.10));
    CHECK(damage.weight_max == doctest::Approx(0.40));

    CHECK(t[index_of(MessageType::Projectile)].min_interval_ms == 50);
    CHECK(t[index_of(MessageType::Projectile)].weight_min == doctest::Approx(0.20));
    CHECK(t[index_of(MessageType::Projectile)].weight_max == doctest::Approx(0.70));
    CHECK(t[index_of(MessageType::Cone)].min_interval_ms == 100);
    CHECK(t[index_of(MessageType::Cone)].weight_min == doctest::Approx(0.30));
    CHECK(t[index_of(MessageType::Cone)].weight_max == doctest::Approx(0.80));
    CHECK(t[index_of(MessageType::NearbyPlayers)].min_interval_ms == 200);
    CHECK(t[index_of(MessageType::NearbyPlayers)].weight_min == doctest::Approx(0.50));

    for (const auto& row : t) {
        CHECK(row.weight_min >= 0.0);
        CHECK(row.weight_min < row.weight_max);
        CHECK(row.weight_max <= 1.0);
    }
    CHECK_NOTHROW(validate_policy_table(t));
}

TEST_CASE("initial weights sit at the midpoint of each range with zero momentum") {
    const WeightState s = initial_weights(default_policy_table());
    CHECK(s.w[index_of(MessageType::OwnState)] == doctest::Approx(0.725));
    CHECK(s.w[index_of(MessageType::Death)] == doctest::Approx(0.175));
    CHECK(s.w[index_of(MessageType::Damage)] == doctest::Approx(0.25));
    CHECK(s.w[index_of(MessageType::Projectile)] == doctest::Approx(0.45));
    CHECK(s.w[index_of(MessageType::Cone)] == doctest::Approx(0.55));
    CHECK(s.w[index_of(MessageType::NearbyPlayers)] == doctest::Approx(0.725));
    for (double v : s.v) CHECK(v == 0.0);
    CHECK(s.version == 0);
}

TEST_CASE("policy table validation rejects broken rows") {
    PolicyTable t = default_policy_table();
    SUBCASE("critical type with nonzero block rate") {
        t[index_of(MessageType::Death)].max_block_rate = 0.5;
        CHECK_THROWS_AS(validate_policy_table(t), std::invalid_argument);
    }
    SUBCASE("inverted weight bounds") {
        t[2].weight_min = 0.9;
        CHECK_THROWS_AS(validate_policy_table(t), std::invalid_argument);
    }
    SUBCASE("weight above one") {
        t[3].weight_max = 1.2;
        CHECK_THROWS_AS(validate_policy_table(t), std::invalid_argument);
    }
}

TEST_CASE("config round-trips through the file format bit-exactly") {
    ExperimentConfig cfg;
    cfg.num_clients = 123;
    cfg.seed = 0xdeadbeefcafeull;
    cfg.move_prob = 0.2173913043478261; // awkward decimal expansion on purpose
    cfg.learning.alpha = 0.014999999999999999;
    cfg.learning.count_scale = 3.1e-05;
    cfg.policy_table[2].weight_max = 0.6999999999999999;

    const std::string text = to_json_text(cfg);
    const ExperimentConfig back = config_from_json_text(text);

    CHECK(back.num_clients == cfg.num_clients);
    CHECK(back.seed == cfg.seed);
    CHECK(back.move_prob == cfg.move_prob); // exact, not approximate
    CHECK(back.learning.alpha == cfg.learning.alpha);
    CHECK(back.learning.count_scale == cfg.learning.count_scale);
    for (int i = 0; i < kMessageTypeCount; ++i) {
        CHECK(back.policy_table[i].weight_min == cfg.policy_table[i].weight_min);
        CHECK(back.policy_table[i].weight_max == cfg.policy_table[i].weight_max);
        CHECK(back.policy_table[i].min_interval_ms == cfg.policy_table[i].min_interval_ms);
        CHECK(back.policy_table[i].importance == cfg.policy_table[i].importance);
        CHECK(back.policy_table[i].max_block_rate == cfg.policy_table[i].max_block_rate);
    }
    // serialize -> parse -> serialize is a fixed point
    CHECK(to_json_text(back) == text);
}

TEST_CASE("config file save/load") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "afll_test_config.json";
    ExperimentConfig cfg;
    cfg.duration_s = 42;
    save_config(cfg, path.string());
    const ExperimentConfig back = load_config(path.string());
    CHECK(back.duration_s == 42);
    fs::remove(path);

    CHECK_THROWS(load_config("/nonexistent/afll.json"));
}

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    SUBCASE("zero clients is a legal degenerate world") {
        cfg.num_clients = 0;
        CHECK_NOTHROW(validate(cfg));
    }
    SUBCASE("negative clients rejected") {
        cfg.num_clients = -1;
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    }
    SUBCASE("alpha bounds") {
        cfg.learning.alpha = 1.0;
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    }
    SUBCASE("target below extreme") {
        cfg.learning.target_load = 0.9;
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    }
    SUBCASE("probability out of range") {
        cfg.fire_prob = 1.5;
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    }
    SUBCASE("bad json text") {
        CHECK_THROWS_AS(config_from_json_text("{not json"), std::invalid_argument);
    }
}
