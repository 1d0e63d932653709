#include "learning_engine.hpp"

#include <algorithm>

namespace afll {

double forward_predict(std::span<const double, kMessageTypeCount> w,
                       std::span<const double, kMessageTypeCount> c) {
    double sum = 0.0;
    for (int i = 0; i < kMessageTypeCount; ++i) sum += w[i] * c[i];
    return sum;
}

LearningEngine::LearningEngine(const LearningConfig& cfg, const PolicyTable& policy)
    : cfg_(cfg), policy_(policy), state_(initial_weights(policy)) {
    validate(cfg);
    publish();
}

void LearningEngine::reset(const WeightState& state) {
    state_ = state;
    publish();
}

LearnLogRow LearningEngine::learning_tick(const LearningBatch& batch, std::int64_t t_ms) {
    instr::count_learning_op();

    // Express counts in load units. count_scale = 1 keeps raw counts.
    std::array<double, kMessageTypeCount> c;
    for (int i = 0; i < kMessageTypeCount; ++i)
        c[i] = cfg_.count_scale * static_cast<double>(batch.counts[i]);

    const double dl_pred = forward_predict(state_.w, c);
    // No range check on the observed loads: the learner consumes whatever the
    // monitor measured, including unclamped spikes.
    const double dl_actual = batch.load_now - batch.load_prev;
    const double err = dl_actual - dl_pred;

    for (int i = 0; i < kMessageTypeCount; ++i) {
        const double grad = -err * c[i];
        state_.v[i] = cfg_.beta * state_.v[i] - cfg_.alpha * grad;
        state_.w[i] = std::clamp(state_.w[i] + state_.v[i], policy_[i].weight_min,
                                 policy_[i].weight_max);
    }
    ++state_.version;
    publish();

    LearnLogRow row;
    row.t_ms = t_ms;
    row.w = state_.w;
    row.v = state_.v;
    row.dl_pred = dl_pred;
    row.dl_actual = dl_actual;
    row.err = err;
    return row;
}

void LearningEngine::publish() {
    instr::count_learning_op();
    WeightSnapshot snap;
    snap.w = state_.w;
    for (int i = 0; i < kMessageTypeCount; ++i)
        snap.cached_increment[i] = state_.w[i] * cfg_.epsilon_per_message;
    snap.version = state_.version;
    snapshot_.store(snap);
}

} // namespace afll
