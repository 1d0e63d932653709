#include "throttler.hpp"

#include <algorithm>
#include <cmath>

namespace afll {

std::string_view to_string(DecisionStep s) {
    switch (s) {
    case DecisionStep::CriticalBypass: return "critical_bypass";
    case DecisionStep::MinFpsForce: return "min_fps_force";
    case DecisionStep::PredictedAllow: return "predicted_allow";
    case DecisionStep::ProbabilisticAllow: return "probabilistic_allow";
    case DecisionStep::ProbabilisticBlock: return "probabilistic_block";
    }
    return "?";
}

double queue_penalty(std::int64_t queue_size, std::int64_t knee, std::int64_t divisor) {
    if (queue_size < 0)
        throw std::invalid_argument("queue_penalty: queue_size must be >= 0");
    const double over = static_cast<double>(queue_size - knee);
    return std::max(0.0, over / static_cast<double>(divisor));
}

TransmitDecision should_transmit(const MessageTypePolicy& policy, const LearningConfig& cfg,
                                 double weight, double cached_increment, double load_now,
                                 std::int64_t time_since_last_ms, std::int64_t queue_size,
                                 double u) {
    instr::HotPathScope hot;
    TransmitDecision d;

    // Step 0: critical messages always pass.
    if (policy.importance == Importance::Critical) {
        d.allow = true;
        d.step = DecisionStep::CriticalBypass;
        return d;
    }

    // Step 1: minimum-rate guarantee while below the extreme threshold.
    if (time_since_last_ms >= policy.min_interval_ms && load_now < cfg.extreme_load) {
        d.allow = true;
        d.step = DecisionStep::MinFpsForce;
        return d;
    }

    // Step 2: allow when the cached per-message prediction stays on target.
    const double load_pred = load_now + cached_increment;
    if (load_pred <= cfg.target_load) {
        d.allow = true;
        d.step = DecisionStep::PredictedAllow;
        return d;
    }

    // Step 3: probabilistic blocking.
    const double basis =
        cfg.overload_basis == OverloadBasis::Predicted ? load_pred : load_now;
    const double overload = (basis - cfg.target_load) / (1.0 - cfg.target_load);
    const double p_raw = weight * overload * cfg.block_scale +
                         queue_penalty(queue_size, cfg.queue_penalty_knee,
                                       cfg.queue_penalty_divisor);
    const double p_block = std::min(p_raw, policy.max_block_rate);
    d.block_probability = std::clamp(p_block, 0.0, 1.0);
    d.allow = u > p_block;
    d.step = d.allow ? DecisionStep::ProbabilisticAllow : DecisionStep::ProbabilisticBlock;
    return d;
}

double nearby_kept_fraction(double load, const LearningConfig& cfg) {
    if (load <= cfg.target_load) return 1.0;
    if (load >= cfg.extreme_load) return cfg.nearby_fraction_min;
    const double x = (load - cfg.target_load) / (cfg.extreme_load - cfg.target_load);
    return 1.0 + x * (cfg.nearby_fraction_min - 1.0);
}

RecipientSelection select_nearby_recipients(std::vector<VisibleEntry>& visible, double load,
                                            const LearningConfig& cfg) {
    instr::HotPathScope hot;
    for (const VisibleEntry& e : visible)
        if (e.distance < 0.0)
            throw std::invalid_argument("select_nearby_recipients: distances must be >= 0");
    std::sort(visible.begin(), visible.end(), [](const VisibleEntry& a, const VisibleEntry& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.player_id < b.player_id;
    });
    RecipientSelection sel;
    sel.visible_count = static_cast<std::int64_t>(visible.size());
    sel.fraction = nearby_kept_fraction(load, cfg);
    sel.transmitted_count = static_cast<std::int64_t>(
        std::ceil(sel.fraction * static_cast<double>(sel.visible_count)));
    sel.transmitted_count = std::min(sel.transmitted_count, sel.visible_count);
    visible.resize(static_cast<std::size_t>(sel.transmitted_count));
    return sel;
}

} // namespace afll
