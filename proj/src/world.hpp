#pragma once

#include "config.hpp"
#include "impact_tracker.hpp"
#include "learning_engine.hpp"
#include "load_monitor.hpp"
#include "rng.hpp"
#include "throttler.hpp"
#include "types.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace afll {

struct PendingReaction {
    std::int64_t due_ms = 0;
    std::int64_t cycle_start_ms = 0; // enqueue time of the triggering delivery
    bool combat = false;
};

struct SimPlayer {
    std::int64_t id = 0;
    double x = 0.0;
    double y = 0.0;
    bool alive = true;
    int hp = 0;
    Rng exo_rng;  // exogenous behaviour; identical across control conditions
    Rng endo_rng; // feedback behaviour (reaction sampling, delays)
    std::deque<PendingReaction> pending_reactions;
    std::int64_t next_nearby_ms = 0;
};

enum class InputKind : int { Move = 0, Fire = 1, Cone = 2, Reaction = 3, ReactionFire = 4 };

struct ClientInput {
    InputKind kind = InputKind::Move;
    int direction = -1;               // move inputs: 0..3
    std::int64_t cycle_start_ms = -1; // reaction inputs: loop start
};

struct ServerMessage {
    MessageType msg_type = MessageType::Death;
    std::int64_t sender = -1;
    std::vector<std::int32_t> recipients;
    std::int32_t entries = 0; // NEARBY_PLAYERS payload entries
    std::int64_t payload_bytes = 0;
    std::int64_t enqueue_ms = 0;
};

// One client tick: independent draws for the four movement directions, fire
// and cone, plus any due reactions. Returns the number of inputs emitted.
int client_tick(SimPlayer& player, const ExperimentConfig& cfg, std::int64_t now_ms,
                std::vector<ClientInput>& out);

// Schedules reactions for a delivered message. NEARBY entries react with
// p_react each, projectile/cone receipts with p_react_combat; death and
// damage notifications are one-time and trigger nothing.
void feedback_on_receive(SimPlayer& player, const ServerMessage& msg,
                         const ExperimentConfig& cfg, std::int64_t receive_ms);

// Contention surcharge applied to processing cost: 1 + gamma*max(0, T-knee)^2.
double contention_multiplier(double contention, const ExperimentConfig& cfg);

// Per-second metrics row.
struct ExperimentRecord {
    std::int64_t t = 0;
    double processing_cost = 0.0;
    double load_mean = 0.0;
    double load_raw_mean = 0.0;
    double contention_mean = 0.0;
    std::int64_t queue_max = 0;
    double mem_ratio_mean = 0.0;
    std::array<std::int64_t, kMessageTypeCount> attempted{};
    std::array<std::int64_t, kMessageTypeCount> sent{};
    std::array<std::int64_t, kMessageTypeCount> blocked{};
    std::array<double, kMessageTypeCount> weights{};
    std::int64_t clients_active = 0;
    double visible_mean = 0.0;
    double transmitted_nearby_mean = 0.0;
    std::array<std::int64_t, 5> step_outcomes{}; // by DecisionStep index
    std::int64_t shed = 0;
    std::int64_t reactions = 0;
    std::int64_t deaths = 0;
    std::int64_t exo_moves = 0;
    std::int64_t exo_fires = 0;
    std::int64_t exo_cones = 0;
    std::optional<double> cycle_latency_mean_ms;
};

struct RunTotals {
    std::array<std::int64_t, kMessageTypeCount> attempted{};
    std::array<std::int64_t, kMessageTypeCount> sent{};
    std::array<std::int64_t, kMessageTypeCount> blocked{};
    std::array<std::int64_t, kMessageTypeCount> enqueued{};
    std::array<std::int64_t, kMessageTypeCount> processed{};
    std::array<std::int64_t, kMessageTypeCount> still_queued{};
    std::int64_t inputs_enqueued = 0;
    std::int64_t inputs_processed = 0;
    std::int64_t inputs_still_queued = 0;
    std::int64_t shed = 0;
    std::int64_t reactions = 0;
    std::int64_t deaths = 0;
    double cycle_latency_sum_ms = 0.0;
    std::int64_t cycle_latency_count = 0;
    std::uint64_t hot_path_violations = 0;
};

struct RunOutput {
    std::vector<ExperimentRecord> records;
    std::vector<LearnLogRow> learn_log;
    std::vector<std::pair<std::int64_t, std::vector<ImpactReportRow>>> impact_log;
    std::array<double, kMessageTypeCount> final_weights{};
    RunTotals totals;
};

// Runs the full simulation in 100 ms steps of simulated time. Deterministic
// for a fixed config and seed when cfg.deterministic is set; otherwise the
// learning tick runs on a background thread and worker threads share the
// processing work.
RunOutput run_simulation(const ExperimentConfig& cfg);

} // namespace afll
