#include "types.hpp"

namespace afll {

std::string_view to_string(MessageType t) {
    switch (t) {
    case MessageType::Death: return "death";
    case MessageType::Damage: return "damage";
    case MessageType::Projectile: return "projectile";
    case MessageType::Cone: return "cone";
    case MessageType::OwnState: return "own_state";
    case MessageType::NearbyPlayers: return "nearby_players";
    }
    throw std::invalid_argument("unknown MessageType");
}

MessageType message_type_from_string(std::string_view name) {
    for (MessageType t : all_message_types()) {
        if (to_string(t) == name) return t;
    }
    throw std::invalid_argument("unknown message type: " + std::string(name));
}

std::string_view to_string(Importance i) {
    switch (i) {
    case Importance::Critical: return "critical";
    case Importance::Normal: return "normal";
    case Importance::Low: return "low";
    }
    throw std::invalid_argument("unknown Importance");
}

Importance importance_from_string(std::string_view name) {
    if (name == "critical") return Importance::Critical;
    if (name == "normal") return Importance::Normal;
    if (name == "low") return Importance::Low;
    throw std::invalid_argument("unknown importance: " + std::string(name));
}

PolicyTable default_policy_table() {
    PolicyTable t{};
    t[0] = {MessageType::Death, 0, 0.05, 0.30, Importance::Critical, 0.0};
    t[1] = {MessageType::Damage, 0, 0.10, 0.40, Importance::Critical, 0.0};
    t[2] = {MessageType::Projectile, 50, 0.20, 0.70, Importance::Normal, 0.80};
    t[3] = {MessageType::Cone, 100, 0.30, 0.80, Importance::Normal, 0.80};
    t[4] = {MessageType::OwnState, 100, 0.50, 0.95, Importance::Low, 0.95};
    t[5] = {MessageType::NearbyPlayers, 200, 0.50, 0.95, Importance::Low, 0.95};
    return t;
}

void validate_policy_table(const PolicyTable& table) {
    for (int i = 0; i < kMessageTypeCount; ++i) {
        const MessageTypePolicy& row = table[i];
        if (index_of(row.msg_type) != i)
            throw std::invalid_argument("policy table rows must be ordered by type index");
        if (!(row.weight_min >= 0.0 && row.weight_min < row.weight_max && row.weight_max <= 1.0))
            throw std::invalid_argument("policy weight bounds must satisfy 0 <= min < max <= 1");
        if (row.min_interval_ms < 0)
            throw std::invalid_argument("policy min_interval must be >= 0");
        if (!(row.max_block_rate >= 0.0 && row.max_block_rate <= 1.0))
            throw std::invalid_argument("policy max_block_rate must be in [0,1]");
        if (row.importance == Importance::Critical && row.max_block_rate != 0.0)
            throw std::invalid_argument("critical types must have max_block_rate = 0");
    }
}

WeightState initial_weights(const PolicyTable& table) {
    validate_policy_table(table);
    WeightState s;
    for (int i = 0; i < kMessageTypeCount; ++i) {
        s.w[i] = 0.5 * (table[i].weight_min + table[i].weight_max);
        s.v[i] = 0.0;
    }
    s.version = 0;
    return s;
}

} // namespace afll
