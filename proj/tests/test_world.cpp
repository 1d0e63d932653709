#include <doctest.h>

#include "experiment.hpp"
#include "world.hpp"

#include <cmath>

using namespace afll;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.num_clients = 40;
    cfg.duration_s = 20;
    cfg.burst_start_s = 5;
    cfg.seed = 1234;
    return cfg;
}

SimPlayer make_player(std::uint64_t seed) {
    SimPlayer p;
    p.id = 0;
    p.alive = true;
    p.hp = 100;
    p.exo_rng = Rng(seed);
    p.endo_rng = Rng(seed + 1);
    return p;
}

} // namespace

TEST_CASE("client tick with all probabilities forced to one emits six inputs") {
    ExperimentConfig cfg;
    cfg.move_prob = 1.0;
    cfg.fire_prob = 1.0;
    cfg.cone_prob = 1.0;
    SimPlayer p = make_player(7);
    std::vector<ClientInput> out;
    const int n = client_tick(p, cfg, 0, out);
    CHECK(n == 6); // 4 moves + fire + cone
    int moves = 0, fires = 0, cones = 0;
    for (const auto& in : out) {
        moves += in.kind == InputKind::Move;
        fires += in.kind == InputKind::Fire;
        cones += in.kind == InputKind::Cone;
    }
    CHECK(moves == 4);
    CHECK(fires == 1);
    CHECK(cones == 1);
}

TEST_CASE("client tick with zero probabilities and no reactions emits nothing") {
    ExperimentConfig cfg;
    cfg.move_prob = 0.0;
    cfg.fire_prob = 0.0;
    cfg.cone_prob = 0.0;
    SimPlayer p = make_player(9);
    std::vector<ClientInput> out;
    CHECK(client_tick(p, cfg, 0, out) == 0);
    CHECK(out.empty());
}

TEST_CASE("fire frequency stays within 3 sigma of its probability") {
    ExperimentConfig cfg; // fire_prob 0.20
    SimPlayer p = make_player(20250809);
    std::vector<ClientInput> out;
    constexpr int kTicks = 100000;
    int fires = 0;
    for (int i = 0; i < kTicks; ++i) {
        out.clear();
        client_tick(p, cfg, i, out);
        for (const auto& in : out) fires += in.kind == InputKind::Fire;
    }
    const double expect = cfg.fire_prob * kTicks;
    const double sigma = std::sqrt(kTicks * cfg.fire_prob * (1.0 - cfg.fire_prob));
    CHECK(std::fabs(fires - expect) <= 3.0 * sigma);
}

TEST_CASE("due reactions are drained by the next tick") {
    ExperimentConfig cfg;
    cfg.move_prob = cfg.fire_prob = cfg.cone_prob = 0.0;
    cfg.return_fire_prob = 1.0;
    SimPlayer p = make_player(3);
    p.pending_reactions.push_back({150, 10, false});
    p.pending_reactions.push_back({160, 10, true});
    p.pending_reactions.push_back({900, 10, false});
    std::vector<ClientInput> out;
    CHECK(client_tick(p, cfg, 100, out) == 0); // nothing due yet
    CHECK(client_tick(p, cfg, 200, out) == 2);
    CHECK(out[0].kind == InputKind::Reaction);
    CHECK(out[1].kind == InputKind::ReactionFire);
    CHECK(out[0].cycle_start_ms == 10);
    CHECK(p.pending_reactions.size() == 1);
}

TEST_CASE("feedback: nearby entries react per entry with p_react") {
    ExperimentConfig cfg;
    cfg.p_react = 1.0;
    SimPlayer p = make_player(11);
    ServerMessage msg;
    msg.msg_type = MessageType::NearbyPlayers;
    msg.entries = 10;
    msg.enqueue_ms = 1000;
    feedback_on_receive(p, msg, cfg, 1100);
    CHECK(p.pending_reactions.size() == 10);
    for (const auto& r : p.pending_reactions) {
        CHECK(r.due_ms >= 1100 + cfg.reaction_delay_min_ms);
        CHECK(r.due_ms <= 1100 + cfg.reaction_delay_max_ms);
        CHECK(r.cycle_start_ms == 1000);
        CHECK_FALSE(r.combat);
    }
}

TEST_CASE("feedback: death and damage are one-time events") {
    ExperimentConfig cfg;
    cfg.p_react = 1.0;
    cfg.p_react_combat = 1.0;
    SimPlayer p = make_player(12);
    ServerMessage msg;
    msg.msg_type = MessageType::Death;
    feedback_on_receive(p, msg, cfg, 0);
    msg.msg_type = MessageType::Damage;
    feedback_on_receive(p, msg, cfg, 0);
    CHECK(p.pending_reactions.empty());

    msg.msg_type = MessageType::Projectile;
    feedback_on_receive(p, msg, cfg, 0);
    CHECK(p.pending_reactions.size() == 1);
    CHECK(p.pending_reactions[0].combat);
}

TEST_CASE("feedback respects the pending-reaction cap") {
    ExperimentConfig cfg;
    cfg.p_react = 1.0;
    cfg.pending_reaction_cap = 8;
    SimPlayer p = make_player(13);
    ServerMessage msg;
    msg.msg_type = MessageType::NearbyPlayers;
    msg.entries = 100;
    feedback_on_receive(p, msg, cfg, 0);
    CHECK(p.pending_reactions.size() == 8);
}

TEST_CASE("contention surcharge") {
    ExperimentConfig cfg; // gamma 8, knee 0.70
    CHECK(contention_multiplier(0.0, cfg) == 1.0);
    CHECK(contention_multiplier(0.70, cfg) == 1.0);
    CHECK(contention_multiplier(1.0, cfg) == doctest::Approx(1.72));
    CHECK(contention_multiplier(0.85, cfg) == doctest::Approx(1.0 + 8.0 * 0.15 * 0.15));
}

TEST_CASE("100 mutually visible players produce 9900 pairwise transmissions per cycle") {
    ExperimentConfig cfg;
    cfg.num_clients = 100;
    cfg.duration_s = 2;
    cfg.burst_start_s = 1000; // stay calm
    cfg.world_size = 1000.0;
    cfg.visibility_radius = 750.0; // torus diameter is ~707, so everyone sees everyone
    cfg.throttling_enabled = false;
    cfg.learning_enabled = false;
    cfg.move_prob = cfg.fire_prob = cfg.cone_prob = 0.0;
    cfg.p_react = cfg.p_react_combat = 0.0;
    const RunOutput run = run_simulation(cfg);
    REQUIRE(run.records.size() == 2);
    // second 1 is phase-locked: every player builds its digest 5 times
    const auto& rec = run.records[1];
    const int nearby = index_of(MessageType::NearbyPlayers);
    CHECK(rec.attempted[nearby] == 5 * 9900);
    CHECK(rec.sent[nearby] == 5 * 9900);
    CHECK(rec.blocked[nearby] == 0);
    CHECK(rec.visible_mean == doctest::Approx(99.0));
}

TEST_CASE("one player alone produces no nearby traffic; two see each other") {
    ExperimentConfig cfg;
    cfg.duration_s = 2;
    cfg.move_prob = cfg.fire_prob = cfg.cone_prob = 0.0;
    cfg.throttling_enabled = false;
    SUBCASE("single player") {
        cfg.num_clients = 1;
        const RunOutput run = run_simulation(cfg);
        CHECK(run.totals.attempted[index_of(MessageType::NearbyPlayers)] == 0);
    }
    SUBCASE("two players in range") {
        cfg.num_clients = 2;
        cfg.visibility_radius = 1500.0;
        const RunOutput run = run_simulation(cfg);
        const auto& rec = run.records[1];
        // symmetric: both digests carry exactly one entry per build
        CHECK(rec.attempted[index_of(MessageType::NearbyPlayers)] == 10);
        CHECK(rec.visible_mean == doctest::Approx(1.0));
    }
}

TEST_CASE("zero clients leave the world silent") {
    ExperimentConfig cfg;
    cfg.num_clients = 0;
    cfg.duration_s = 3;
    const RunOutput run = run_simulation(cfg);
    REQUIRE(run.records.size() == 3);
    for (const auto& rec : run.records) {
        CHECK(rec.processing_cost == 0.0);
        CHECK(rec.load_mean == 0.0);
        for (std::int64_t a : rec.attempted) CHECK(a == 0);
    }
}

TEST_CASE("same seed and config give identical record streams") {
    const ExperimentConfig cfg = small_config();
    const RunOutput a = run_simulation(cfg);
    const RunOutput b = run_simulation(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].processing_cost == b.records[i].processing_cost);
        CHECK(a.records[i].load_mean == b.records[i].load_mean);
        CHECK(a.records[i].attempted == b.records[i].attempted);
        CHECK(a.records[i].sent == b.records[i].sent);
        CHECK(a.records[i].weights == b.records[i].weights);
    }
    CHECK(a.final_weights == b.final_weights);
}

TEST_CASE("learning disabled keeps the initial weights for the whole run") {
    ExperimentConfig cfg = small_config();
    cfg.learning_enabled = false;
    const RunOutput run = run_simulation(cfg);
    const WeightState init = initial_weights(cfg.policy_table);
    for (const auto& rec : run.records)
        for (int i = 0; i < kMessageTypeCount; ++i)
            CHECK(rec.weights[i] == init.w[i]);
}

TEST_CASE("exogenous input streams are identical across control conditions") {
    ExperimentConfig on = small_config();
    ExperimentConfig off = small_config();
    off.learning_enabled = false;
    off.throttling_enabled = false;
    const RunOutput a = run_simulation(on);
    const RunOutput b = run_simulation(off);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].exo_moves == b.records[i].exo_moves);
        CHECK(a.records[i].exo_fires == b.records[i].exo_fires);
        CHECK(a.records[i].exo_cones == b.records[i].exo_cones);
    }
}

TEST_CASE("the unthrottled feedback loop amplifies load") {
    ExperimentConfig throttled = small_config();
    ExperimentConfig open = small_config();
    open.throttling_enabled = false;
    open.learning_enabled = false;
    const RunOutput a = run_simulation(throttled);
    const RunOutput b = run_simulation(open);
    double mean_throttled = 0.0, mean_open = 0.0;
    for (const auto& r : a.records) mean_throttled += r.load_mean;
    for (const auto& r : b.records) mean_open += r.load_mean;
    mean_throttled /= static_cast<double>(a.records.size());
    mean_open /= static_cast<double>(b.records.size());
    CHECK(mean_open > mean_throttled);
}

TEST_CASE("run invariants hold on a normal run") {
    const ExperimentConfig cfg = small_config();
    const RunOutput run = run_simulation(cfg);
    const auto failures = check_run_invariants(cfg, run);
    for (const auto& f : failures) MESSAGE(f);
    CHECK(failures.empty());
    // combat actually happened
    CHECK(run.totals.deaths > 0);
    CHECK(run.totals.reactions > 0);
}

TEST_CASE("critical messages are never blocked, even at forced extreme load") {
    ExperimentConfig cfg = small_config();
    cfg.load_override = 0.99;
    const RunOutput run = run_simulation(cfg);
    for (MessageType t : {MessageType::Death, MessageType::Damage}) {
        const int i = index_of(t);
        CHECK(run.totals.attempted[i] > 0);
        CHECK(run.totals.sent[i] == run.totals.attempted[i]);
        CHECK(run.totals.blocked[i] == 0);
    }
}

TEST_CASE("non-deterministic mode preserves invariants") {
    ExperimentConfig cfg = small_config();
    cfg.deterministic = false;
    const RunOutput run = run_simulation(cfg);
    const auto failures = check_run_invariants(cfg, run);
    for (const auto& f : failures) MESSAGE(f);
    CHECK(failures.empty());
    CHECK(run.totals.hot_path_violations == 0);
}
