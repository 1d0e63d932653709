#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace afll {

// Message taxonomy. Indices are stable and used everywhere counts or
// weights are stored as arrays.
enum class MessageType : int {
    Death = 0,
    Damage = 1,
    Projectile = 2,
    Cone = 3,
    OwnState = 4,
    NearbyPlayers = 5,
};

inline constexpr int kMessageTypeCount = 6;

constexpr int index_of(MessageType t) { return static_cast<int>(t); }

constexpr std::array<MessageType, kMessageTypeCount> all_message_types() {
    return {MessageType::Death,    MessageType::Damage, MessageType::Projectile,
            MessageType::Cone,     MessageType::OwnState,
            MessageType::NearbyPlayers};
}

std::string_view to_string(MessageType t);
MessageType message_type_from_string(std::string_view name);

enum class Importance : int {
    Critical = 0,
    Normal = 1,
    Low = 2,
};

std::string_view to_string(Importance i);
Importance importance_from_string(std::string_view name);

// Static per-type control policy row.
struct MessageTypePolicy {
    MessageType msg_type = MessageType::Death;
    std::int64_t min_interval_ms = 0;
    double weight_min = 0.0;
    double weight_max = 1.0;
    Importance importance = Importance::Normal;
    double max_block_rate = 0.0;
};

using PolicyTable = std::array<MessageTypePolicy, kMessageTypeCount>;

// The default policy table. Critical types can never be blocked.
PolicyTable default_policy_table();

void validate_policy_table(const PolicyTable& table);

// Per-type weights and momentum velocities.
struct WeightState {
    std::array<double, kMessageTypeCount> w{};
    std::array<double, kMessageTypeCount> v{};
    std::uint64_t version = 0;
};

// Weights start at the midpoint of each type's range, velocities at zero.
WeightState initial_weights(const PolicyTable& table);

} // namespace afll
