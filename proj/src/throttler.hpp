#pragma once

#include "config.hpp"
#include "instrumentation.hpp"
#include "types.hpp"

#include <cstdint>
#include <vector>

namespace afll {

enum class DecisionStep : int {
    CriticalBypass = 0,
    MinFpsForce = 1,
    PredictedAllow = 2,
    ProbabilisticAllow = 3,
    ProbabilisticBlock = 4,
};

std::string_view to_string(DecisionStep s);

struct TransmitDecision {
    bool allow = false;
    DecisionStep step = DecisionStep::ProbabilisticBlock;
    double block_probability = 0.0; // populated for Step-3 outcomes
};

// max(0, (Q - knee) / divisor)
double queue_penalty(std::int64_t queue_size, std::int64_t knee = 1000,
                     std::int64_t divisor = 6666);

// The 4-step transmission decision. `weight` and `cached_increment` come
// from the published learning snapshot; `time_since_last_ms` is the caller's
// per-(recipient, type) bookkeeping; `u` is a uniform [0,1) draw consumed
// only when Step 3 is reached.
TransmitDecision should_transmit(const MessageTypePolicy& policy, const LearningConfig& cfg,
                                 double weight, double cached_increment, double load_now,
                                 std::int64_t time_since_last_ms, std::int64_t queue_size,
                                 double u);

struct VisibleEntry {
    std::int64_t player_id = 0;
    double distance = 0.0;
};

struct RecipientSelection {
    std::int64_t visible_count = 0;
    std::int64_t transmitted_count = 0; // entries kept for the per-entry decision
    double fraction = 1.0;
};

// Kept fraction of NEARBY_PLAYERS entries as a function of load: 1.0 up to
// the target, linear down to `nearby_fraction_min` at the extreme threshold.
double nearby_kept_fraction(double load, const LearningConfig& cfg);

// Sorts `visible` by (distance, player_id) ascending in place and truncates
// it to the kept prefix. Returns the selection accounting.
RecipientSelection select_nearby_recipients(std::vector<VisibleEntry>& visible, double load,
                                            const LearningConfig& cfg);

} // namespace afll
