#pragma once

#include "types.hpp"

#include <cstdint>
#include <string>

namespace afll {

enum class OverloadBasis : int {
    Current = 0,   // Step 3 overload ratio computed from the live load score
    Predicted = 1, // Step 3 overload ratio computed from the Step-2 prediction
};

std::string_view to_string(OverloadBasis b);
OverloadBasis overload_basis_from_string(std::string_view name);

struct LearningConfig {
    double alpha = 0.03;               // learning rate
    double beta = 0.9;                 // momentum coefficient
    std::int64_t learning_interval_ms = 1000;
    std::int64_t window_size_ms = 100;
    int max_windows = 200;
    double target_load = 0.70;
    double extreme_load = 0.85;
    double block_scale = 1.2;
    std::int64_t queue_penalty_knee = 1000;
    std::int64_t queue_penalty_divisor = 6666;
    double epsilon_per_message = 0.01; // per-decision load increment scale
    // Multiplier applied to batch counts before the forward/backward pass.
    // 1.0 keeps the update rule verbatim; small values express counts in
    // load units when raw volumes dwarf observed load changes.
    double count_scale = 1.0;
    OverloadBasis overload_basis = OverloadBasis::Current;
    // Kept fraction of NEARBY_PLAYERS recipients at or above extreme load.
    double nearby_fraction_min = 0.20;
};

void validate(const LearningConfig& cfg);

struct ExperimentConfig {
    // population and schedule
    std::int64_t num_clients = 100;
    std::int64_t duration_s = 300;
    std::int64_t burst_start_s = 30;
    double burst_rate_hz = 60.0;
    double calm_rate_hz = 10.0;
    std::uint64_t seed = 42;
    bool learning_enabled = true;
    bool throttling_enabled = true;
    bool deterministic = true;

    // client behaviour model
    double move_prob = 0.30;
    double fire_prob = 0.20;
    double cone_prob = 0.10;
    double p_react = 0.15;
    double p_react_combat = 0.30;
    double return_fire_prob = 0.50;
    std::int64_t reaction_delay_min_ms = 100;
    std::int64_t reaction_delay_max_ms = 200;
    std::int64_t link_latency_ms = 75;

    // world model
    double world_size = 1000.0;
    double visibility_radius = 300.0;
    double combat_radius = 120.0;
    double move_step = 5.0;
    int max_hp = 100;
    int projectile_damage = 12;
    int cone_damage = 6;
    int cone_targets = 3;
    double p_hit = 0.25;

    // server model
    std::int64_t worker_threads = 12;        // simulated pool width
    double worker_units_per_s = 3000.0;      // per-worker processing rate
    double contention_gamma = 8.0;
    double contention_knee = 0.70;
    double cost_per_input = 1.0;
    double cost_per_recipient = 1.0;
    double cost_per_entry = 0.20;
    std::int64_t memory_budget_bytes = 256ll * 1024 * 1024;
    std::int64_t queue_hard_cap = 200000;    // broadcast shedding threshold
    int pending_reaction_cap = 64;

    // reporting
    std::array<double, 3> spike_thresholds{20000.0, 25000.0, 30000.0};
    double load_override = -1.0;             // >= 0 pins the published load score

    LearningConfig learning{};
    PolicyTable policy_table = default_policy_table();
};

void validate(const ExperimentConfig& cfg);

// Structured-text persistence (JSON with `experiment`, `learning` and
// `policy` sections). Round-trips every field losslessly.
std::string to_json_text(const ExperimentConfig& cfg);
ExperimentConfig config_from_json_text(const std::string& text);
void save_config(const ExperimentConfig& cfg, const std::string& path);
ExperimentConfig load_config(const std::string& path);

} // namespace afll
