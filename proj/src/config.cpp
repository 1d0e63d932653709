#include "config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace afll {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(OverloadBasis b) {
    return b == OverloadBasis::Current ? "current" : "predicted";
}

OverloadBasis overload_basis_from_string(std::string_view name) {
    if (name == "current") return OverloadBasis::Current;
    if (name == "predicted") return OverloadBasis::Predicted;
    throw std::invalid_argument("unknown overload_basis: " + std::string(name));
}

void validate(const LearningConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("learning.alpha must be in (0,1)");
    if (!(cfg.beta >= 0.0 && cfg.beta < 1.0))
        throw std::invalid_argument("learning.beta must be in [0,1)");
    if (cfg.learning_interval_ms <= 0 || cfg.window_size_ms <= 0)
        throw std::invalid_argument("learning intervals must be positive");
    if (cfg.learning_interval_ms % cfg.window_size_ms != 0)
        throw std::invalid_argument("learning_interval must be a multiple of window_size");
    if (cfg.max_windows < 1)
        throw std::invalid_argument("learning.max_windows must be >= 1");
    if (!(cfg.target_load > 0.0 && cfg.target_load < cfg.extreme_load && cfg.extreme_load <= 1.0))
        throw std::invalid_argument("require 0 < target_load < extreme_load <= 1");
    if (cfg.block_scale <= 0.0)
        throw std::invalid_argument("learning.block_scale must be positive");
    if (cfg.queue_penalty_divisor <= 0)
        throw std::invalid_argument("learning.queue_penalty_divisor must be positive");
    if (cfg.queue_penalty_knee < 0)
        throw std::invalid_argument("learning.queue_penalty_knee must be >= 0");
    if (cfg.epsilon_per_message < 0.0)
        throw std::invalid_argument("learning.epsilon_per_message must be >= 0");
    if (cfg.count_scale <= 0.0)
        throw std::invalid_argument("learning.count_scale must be positive");
    if (!(cfg.nearby_fraction_min >= 0.0 && cfg.nearby_fraction_min <= 1.0))
        throw std::invalid_argument("learning.nearby_fraction_min must be in [0,1]");
}

namespace {

void require_prob(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(name) + " must be in [0,1]");
}

} // namespace

void validate(const ExperimentConfig& cfg) {
    if (cfg.num_clients < 0)
        throw std::invalid_argument("experiment.num_clients must be >= 0");
    if (cfg.duration_s < 1)
        throw std::invalid_argument("experiment.duration must be >= 1 s");
    if (cfg.burst_start_s < 0)
        throw std::invalid_argument("experiment.burst_start must be >= 0");
    if (cfg.burst_rate_hz <= 0.0 || cfg.calm_rate_hz <= 0.0)
        throw std::invalid_argument("client tick rates must be positive");
    require_prob(cfg.move_prob, "experiment.move_prob");
    require_prob(cfg.fire_prob, "experiment.fire_prob");
    require_prob(cfg.cone_prob, "experiment.cone_prob");
    require_prob(cfg.p_react, "experiment.p_react");
    require_prob(cfg.p_react_combat, "experiment.p_react_combat");
    require_prob(cfg.return_fire_prob, "experiment.return_fire_prob");
    require_prob(cfg.p_hit, "experiment.p_hit");
    if (cfg.reaction_delay_min_ms < 0 || cfg.reaction_delay_max_ms < cfg.reaction_delay_min_ms)
        throw std::invalid_argument("reaction delay range must satisfy 0 <= min <= max");
    if (cfg.link_latency_ms < 0)
        throw std::invalid_argument("experiment.link_latency_ms must be >= 0");
    if (cfg.world_size <= 0.0 || cfg.visibility_radius < 0.0 || cfg.combat_radius < 0.0)
        throw std::invalid_argument("world geometry must be positive");
    if (cfg.worker_threads < 1)
        throw std::invalid_argument("experiment.worker_threads must be >= 1");
    if (cfg.worker_units_per_s <= 0.0)
        throw std::invalid_argument("experiment.worker_units_per_s must be positive");
    if (cfg.contention_gamma < 0.0)
        throw std::invalid_argument("experiment.contention_gamma must be >= 0");
    if (!(cfg.contention_knee >= 0.0 && cfg.contention_knee <= 1.0))
        throw std::invalid_argument("experiment.contention_knee must be in [0,1]");
    if (cfg.memory_budget_bytes <= 0)
        throw std::invalid_argument("experiment.memory_budget_bytes must be positive");
    if (cfg.queue_hard_cap < 1)
        throw std::invalid_argument("experiment.queue_hard_cap must be >= 1");
    if (cfg.pending_reaction_cap < 0)
        throw std::invalid_argument("experiment.pending_reaction_cap must be >= 0");
    if (cfg.max_hp < 1 || cfg.projectile_damage < 0 || cfg.cone_damage < 0 || cfg.cone_targets < 0)
        throw std::invalid_argument("combat parameters out of range");
    for (std::size_t i = 1; i < cfg.spike_thresholds.size(); ++i)
        if (cfg.spike_thresholds[i] < cfg.spike_thresholds[i - 1])
            throw std::invalid_argument("experiment.spike_thresholds must be ascending");
    if (cfg.load_override >= 0.0 && cfg.load_override > 1.0)
        throw std::invalid_argument("experiment.load_override must be in [0,1] or negative");
    validate(cfg.learning);
    validate_policy_table(cfg.policy_table);
}

namespace {

ordered_json policy_to_json(const PolicyTable& table) {
    ordered_json rows = ordered_json::array();
    for (const MessageTypePolicy& row : table) {
        rows.push_back({{"msg_type", std::string(to_string(row.msg_type))},
                        {"min_interval", row.min_interval_ms},
                        {"weight_min", row.weight_min},
                        {"weight_max", row.weight_max},
                        {"importance", std::string(to_string(row.importance))},
                        {"max_block_rate", row.max_block_rate}});
    }
    return rows;
}

PolicyTable policy_from_json(const ordered_json& rows) {
    if (!rows.is_array() || rows.size() != kMessageTypeCount)
        throw std::invalid_argument("policy section must list exactly 6 rows");
    PolicyTable table{};
    std::array<bool, kMessageTypeCount> seen{};
    for (const auto& r : rows) {
        MessageTypePolicy row;
        row.msg_type = message_type_from_string(r.at("msg_type").get<std::string>());
        row.min_interval_ms = r.at("min_interval").get<std::int64_t>();
        row.weight_min = r.at("weight_min").get<double>();
        row.weight_max = r.at("weight_max").get<double>();
        row.importance = importance_from_string(r.at("importance").get<std::string>());
        row.max_block_rate = r.at("max_block_rate").get<double>();
        int idx = index_of(row.msg_type);
        if (seen[idx]) throw std::invalid_argument("duplicate policy row");
        seen[idx] = true;
        table[idx] = row;
    }
    return table;
}

} // namespace

std::string to_json_text(const ExperimentConfig& cfg) {
    ordered_json j;
    j["experiment"] = {
        {"num_clients", cfg.num_clients},
        {"duration", cfg.duration_s},
        {"burst_start", cfg.burst_start_s},
        {"burst_rate", cfg.burst_rate_hz},
        {"calm_rate", cfg.calm_rate_hz},
        {"seed", cfg.seed},
        {"learning_enabled", cfg.learning_enabled},
        {"throttling_enabled", cfg.throttling_enabled},
        {"deterministic", cfg.deterministic},
        {"move_prob", cfg.move_prob},
        {"fire_prob", cfg.fire_prob},
        {"cone_prob", cfg.cone_prob},
        {"p_react", cfg.p_react},
        {"p_react_combat", cfg.p_react_combat},
        {"return_fire_prob", cfg.return_fire_prob},
        {"reaction_delay_min_ms", cfg.reaction_delay_min_ms},
        {"reaction_delay_max_ms", cfg.reaction_delay_max_ms},
        {"link_latency_ms", cfg.link_latency_ms},
        {"world_size", cfg.world_size},
        {"visibility_radius", cfg.visibility_radius},
        {"combat_radius", cfg.combat_radius},
        {"move_step", cfg.move_step},
        {"max_hp", cfg.max_hp},
        {"projectile_damage", cfg.projectile_damage},
        {"cone_damage", cfg.cone_damage},
        {"cone_targets", cfg.cone_targets},
        {"p_hit", cfg.p_hit},
        {"worker_threads", cfg.worker_threads},
        {"worker_units_per_s", cfg.worker_units_per_s},
        {"contention_gamma", cfg.contention_gamma},
        {"contention_knee", cfg.contention_knee},
        {"cost_per_input", cfg.cost_per_input},
        {"cost_per_recipient", cfg.cost_per_recipient},
        {"cost_per_entry", cfg.cost_per_entry},
        {"memory_budget_bytes", cfg.memory_budget_bytes},
        {"queue_hard_cap", cfg.queue_hard_cap},
        {"pending_reaction_cap", cfg.pending_reaction_cap},
        {"spike_thresholds", cfg.spike_thresholds},
        {"load_override", cfg.load_override},
    };
    j["learning"] = {
        {"alpha", cfg.learning.alpha},
        {"beta", cfg.learning.beta},
        {"learning_interval", cfg.learning.learning_interval_ms},
        {"window_size", cfg.learning.window_size_ms},
        {"max_windows", cfg.learning.max_windows},
        {"target_load", cfg.learning.target_load},
        {"extreme_load", cfg.learning.extreme_load},
        {"block_scale", cfg.learning.block_scale},
        {"queue_penalty_knee", cfg.learning.queue_penalty_knee},
        {"queue_penalty_divisor", cfg.learning.queue_penalty_divisor},
        {"epsilon_per_message", cfg.learning.epsilon_per_message},
        {"count_scale", cfg.learning.count_scale},
        {"overload_basis", std::string(to_string(cfg.learning.overload_basis))},
        {"nearby_fraction_min", cfg.learning.nearby_fraction_min},
    };
    j["policy"] = policy_to_json(cfg.policy_table);
    return j.dump(2) + "\n";
}

ExperimentConfig config_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    const auto& e = j.at("experiment");
    cfg.num_clients = e.at("num_clients").get<std::int64_t>();
    cfg.duration_s = e.at("duration").get<std::int64_t>();
    cfg.burst_start_s = e.at("burst_start").get<std::int64_t>();
    cfg.burst_rate_hz = e.at("burst_rate").get<double>();
    cfg.calm_rate_hz = e.at("calm_rate").get<double>();
    cfg.seed = e.at("seed").get<std::uint64_t>();
    cfg.learning_enabled = e.at("learning_enabled").get<bool>();
    cfg.throttling_enabled = e.at("throttling_enabled").get<bool>();
    cfg.deterministic = e.at("deterministic").get<bool>();
    cfg.move_prob = e.at("move_prob").get<double>();
    cfg.fire_prob = e.at("fire_prob").get<double>();
    cfg.cone_prob = e.at("cone_prob").get<double>();
    cfg.p_react = e.at("p_react").get<double>();
    cfg.p_react_combat = e.at("p_react_combat").get<double>();
    cfg.return_fire_prob = e.at("return_fire_prob").get<double>();
    cfg.reaction_delay_min_ms = e.at("reaction_delay_min_ms").get<std::int64_t>();
    cfg.reaction_delay_max_ms = e.at("reaction_delay_max_ms").get<std::int64_t>();
    cfg.link_latency_ms = e.at("link_latency_ms").get<std::int64_t>();
    cfg.world_size = e.at("world_size").get<double>();
    cfg.visibility_radius = e.at("visibility_radius").get<double>();
    cfg.combat_radius = e.at("combat_radius").get<double>();
    cfg.move_step = e.at("move_step").get<double>();
    cfg.max_hp = e.at("max_hp").get<int>();
    cfg.projectile_damage = e.at("projectile_damage").get<int>();
    cfg.cone_damage = e.at("cone_damage").get<int>();
    cfg.cone_targets = e.at("cone_targets").get<int>();
    cfg.p_hit = e.at("p_hit").get<double>();
    cfg.worker_threads = e.at("worker_threads").get<std::int64_t>();
    cfg.worker_units_per_s = e.at("worker_units_per_s").get<double>();
    cfg.contention_gamma = e.at("contention_gamma").get<double>();
    cfg.contention_knee = e.at("contention_knee").get<double>();
    cfg.cost_per_input = e.at("cost_per_input").get<double>();
    cfg.cost_per_recipient = e.at("cost_per_recipient").get<double>();
    cfg.cost_per_entry = e.at("cost_per_entry").get<double>();
    cfg.memory_budget_bytes = e.at("memory_budget_bytes").get<std::int64_t>();
    cfg.queue_hard_cap = e.at("queue_hard_cap").get<std::int64_t>();
    cfg.pending_reaction_cap = e.at("pending_reaction_cap").get<int>();
    {
        auto v = e.at("spike_thresholds").get<std::vector<double>>();
        if (v.size() != cfg.spike_thresholds.size())
            throw std::invalid_argument("experiment.spike_thresholds must list 3 values");
        std::copy(v.begin(), v.end(), cfg.spike_thresholds.begin());
    }
    cfg.load_override = e.at("load_override").get<double>();

    const auto& l = j.at("learning");
    cfg.learning.alpha = l.at("alpha").get<double>();
    cfg.learning.beta = l.at("beta").get<double>();
    cfg.learning.learning_interval_ms = l.at("learning_interval").get<std::int64_t>();
    cfg.learning.window_size_ms = l.at("window_size").get<std::int64_t>();
    cfg.learning.max_windows = l.at("max_windows").get<int>();
    cfg.learning.target_load = l.at("target_load").get<double>();
    cfg.learning.extreme_load = l.at("extreme_load").get<double>();
    cfg.learning.block_scale = l.at("block_scale").get<double>();
    cfg.learning.queue_penalty_knee = l.at("queue_penalty_knee").get<std::int64_t>();
    cfg.learning.queue_penalty_divisor = l.at("queue_penalty_divisor").get<std::int64_t>();
    cfg.learning.epsilon_per_message = l.at("epsilon_per_message").get<double>();
    cfg.learning.count_scale = l.at("count_scale").get<double>();
    cfg.learning.overload_basis =
        overload_basis_from_string(l.at("overload_basis").get<std::string>());
    cfg.learning.nearby_fraction_min = l.at("nearby_fraction_min").get<double>();

    cfg.policy_table = policy_from_json(j.at("policy"));
    validate(cfg);
    return cfg;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open config for writing: " + path);
    out << to_json_text(cfg);
    if (!out) throw std::runtime_error("failed writing config: " + path);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

} // namespace afll
