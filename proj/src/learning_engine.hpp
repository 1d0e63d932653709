#pragma once

#include "config.hpp"
#include "impact_tracker.hpp"
#include "seqlock.hpp"
#include "types.hpp"

#include <array>
#include <cstdint>
#include <span>

namespace afll {

// Weights plus the per-type prediction increments, published together so hot
// readers always see a matching pair.
struct WeightSnapshot {
    std::array<double, kMessageTypeCount> w{};
    std::array<double, kMessageTypeCount> cached_increment{};
    std::uint64_t version = 0;
};

struct LearnLogRow {
    std::int64_t t_ms = 0;
    std::array<double, kMessageTypeCount> w{};
    std::array<double, kMessageTypeCount> v{};
    double dl_pred = 0.0;
    double dl_actual = 0.0;
    double err = 0.0;
};

// Dot product of weights and (scaled) counts.
double forward_predict(std::span<const double, kMessageTypeCount> w,
                       std::span<const double, kMessageTypeCount> c);

// Momentum gradient-descent update over per-type weights. Runs on the
// background learning cadence; the hot path only ever reads the published
// snapshot.
class LearningEngine {
public:
    LearningEngine(const LearningConfig& cfg, const PolicyTable& policy);

    // One backward pass: predict, difference the observed loads, update
    // weights with momentum, clamp to the policy ranges and republish.
    LearnLogRow learning_tick(const LearningBatch& batch, std::int64_t t_ms = 0);

    // Hot-path reads.
    double get_weight(MessageType t) const { return snapshot_.load().w[index_of(t)]; }
    double cached_increment(MessageType t) const {
        return snapshot_.load().cached_increment[index_of(t)];
    }
    WeightSnapshot snapshot() const { return snapshot_.load(); }

    const WeightState& state() const { return state_; }
    void reset(const WeightState& state);

private:
    void publish();

    LearningConfig cfg_;
    PolicyTable policy_;
    WeightState state_;
    SnapshotCell<WeightSnapshot> snapshot_;
};

} // namespace afll
