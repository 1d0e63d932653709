#include "world.hpp"

#include "instrumentation.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

namespace afll {

namespace {

constexpr std::int64_t kStepMs = 100;

std::int64_t payload_bytes_for(MessageType t, std::int32_t entries) {
    switch (t) {
    case MessageType::Death: return 96;
    case MessageType::Damage: return 96;
    case MessageType::Projectile: return 192;
    case MessageType::Cone: return 192;
    case MessageType::OwnState: return 256;
    case MessageType::NearbyPlayers: return 128 + 64ll * entries;
    }
    return 64;
}

constexpr std::int64_t kInputBytes = 160;

} // namespace

int client_tick(SimPlayer& player, const ExperimentConfig& cfg, std::int64_t now_ms,
                std::vector<ClientInput>& out) {
    int emitted = 0;
    // Exogenous draws happen unconditionally so the stream is identical no
    // matter what the server delivered.
    for (int dir = 0; dir < 4; ++dir) {
        const bool move = player.exo_rng.bernoulli(cfg.move_prob);
        if (move && player.alive) {
            out.push_back({InputKind::Move, dir, -1});
            ++emitted;
        }
    }
    if (player.exo_rng.bernoulli(cfg.fire_prob) && player.alive) {
        out.push_back({InputKind::Fire, -1, -1});
        ++emitted;
    }
    if (player.exo_rng.bernoulli(cfg.cone_prob) && player.alive) {
        out.push_back({InputKind::Cone, -1, -1});
        ++emitted;
    }
    while (!player.pending_reactions.empty() &&
           player.pending_reactions.front().due_ms <= now_ms) {
        const PendingReaction r = player.pending_reactions.front();
        player.pending_reactions.pop_front();
        InputKind kind = InputKind::Reaction;
        if (r.combat && player.endo_rng.bernoulli(cfg.return_fire_prob))
            kind = InputKind::ReactionFire;
        out.push_back({kind, -1, r.cycle_start_ms});
        ++emitted;
    }
    return emitted;
}

void feedback_on_receive(SimPlayer& player, const ServerMessage& msg,
                         const ExperimentConfig& cfg, std::int64_t receive_ms) {
    auto schedule = [&](bool combat) {
        if (static_cast<int>(player.pending_reactions.size()) >= cfg.pending_reaction_cap)
            return;
        PendingReaction r;
        r.due_ms = receive_ms +
                   player.endo_rng.uniform_int(cfg.reaction_delay_min_ms,
                                               cfg.reaction_delay_max_ms);
        r.cycle_start_ms = msg.enqueue_ms;
        r.combat = combat;
        player.pending_reactions.push_back(r);
    };
    switch (msg.msg_type) {
    case MessageType::NearbyPlayers:
        for (std::int32_t i = 0; i < msg.entries; ++i)
            if (player.endo_rng.bernoulli(cfg.p_react)) schedule(false);
        break;
    case MessageType::Projectile:
    case MessageType::Cone:
        if (player.endo_rng.bernoulli(cfg.p_react_combat)) schedule(true);
        break;
    case MessageType::Death:
    case MessageType::Damage:
        break; // one-time notifications
    case MessageType::OwnState:
        break;
    }
    // Reactions scheduled out of order are emitted in due order.
    std::sort(player.pending_reactions.begin(), player.pending_reactions.end(),
              [](const PendingReaction& a, const PendingReaction& b) {
                  return a.due_ms < b.due_ms;
              });
}

double contention_multiplier(double contention, const ExperimentConfig& cfg) {
    const double over = std::max(0.0, contention - cfg.contention_knee);
    return 1.0 + cfg.contention_gamma * over * over;
}

namespace {

struct WorkItem {
    enum class Kind : int { ClientInput = 0, Delivery = 1 };
    Kind kind = Kind::ClientInput;
    InputKind input = InputKind::Move;
    std::int64_t actor = -1;
    std::int64_t cycle_start_ms = -1;
    ServerMessage message;
    double cost_units = 0.0;
    std::int64_t bytes = 0;
};

struct SecondAccum {
    double processing_cost = 0.0;
    double load_sum = 0.0;
    double load_raw_sum = 0.0;
    double contention_sum = 0.0;
    double mem_sum = 0.0;
    int samples = 0;
    std::int64_t queue_max = 0;
    std::array<std::int64_t, kMessageTypeCount> attempted{};
    std::array<std::int64_t, kMessageTypeCount> sent{};
    std::array<std::int64_t, kMessageTypeCount> blocked{};
    std::array<std::int64_t, 5> step_outcomes{};
    std::int64_t shed = 0;
    std::int64_t reactions = 0;
    std::int64_t deaths = 0;
    std::int64_t exo_moves = 0;
    std::int64_t exo_fires = 0;
    std::int64_t exo_cones = 0;
    double visible_sum = 0.0;
    std::int64_t visible_builds = 0;
    double nearby_entries_sent = 0.0;
    std::int64_t nearby_messages = 0;
    double cycle_latency_sum = 0.0;
    std::int64_t cycle_latency_count = 0;
};

// Background learner used outside deterministic mode: the simulation thread
// hands over a batch and continues; weights land whenever the tick finishes.
class AsyncLearner {
public:
    explicit AsyncLearner(LearningEngine& engine) : engine_(engine) {
        thread_ = std::thread([this] { loop(); });
    }
    ~AsyncLearner() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        thread_.join();
    }
    void submit(const LearningBatch& batch, std::int64_t t_ms) {
        {
            std::lock_guard<std::mutex> lk(mu_);
            pending_.push_back({batch, t_ms});
        }
        cv_.notify_one();
    }
    std::vector<LearnLogRow> drain_log() {
        std::lock_guard<std::mutex> lk(mu_);
        return std::move(log_);
    }
    void wait_idle() {
        std::unique_lock<std::mutex> lk(mu_);
        idle_cv_.wait(lk, [this] { return pending_.empty() && !busy_; });
    }

private:
    void loop() {
        std::unique_lock<std::mutex> lk(mu_);
        for (;;) {
            cv_.wait(lk, [this] { return stop_ || !pending_.empty(); });
            if (stop_ && pending_.empty()) return;
            auto [batch, t_ms] = pending_.front();
            pending_.pop_front();
            busy_ = true;
            lk.unlock();
            LearnLogRow row = engine_.learning_tick(batch, t_ms);
            lk.lock();
            log_.push_back(row);
            busy_ = false;
            idle_cv_.notify_all();
        }
    }

    LearningEngine& engine_;
    std::thread thread_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<std::pair<LearningBatch, std::int64_t>> pending_;
    std::vector<LearnLogRow> log_;
    bool busy_ = false;
    bool stop_ = false;
};

class SimulationRun {
public:
    explicit SimulationRun(const ExperimentConfig& cfg)
        : cfg_(cfg), tracker_(cfg.learning.max_windows),
          engine_(cfg.learning, cfg.policy_table),
          throttle_rng_(derive_seed(cfg.seed, 0xB10Cull)),
          combat_rng_(derive_seed(cfg.seed, 0xC0DEull)) {
        validate(cfg_);
        setup_players();
        last_send_.assign(static_cast<std::size_t>(cfg_.num_clients) * kMessageTypeCount,
                          -1000000);
    }

    RunOutput run() {
        std::unique_ptr<AsyncLearner> learner;
        if (!cfg_.deterministic && cfg_.learning_enabled)
            learner = std::make_unique<AsyncLearner>(engine_);

        const std::int64_t total_steps = cfg_.duration_s * (1000 / kStepMs);
        const std::int64_t steps_per_tick =
            std::max<std::int64_t>(1, cfg_.learning.learning_interval_ms / kStepMs);
        const std::int64_t steps_per_window =
            std::max<std::int64_t>(1, cfg_.learning.window_size_ms / kStepMs);

        double prev_window_raw = 0.0;
        for (std::int64_t step = 0; step < total_steps; ++step) {
            now_ms_ = step * kStepMs;
            phase_clients();
            phase_broadcasts();
            phase_process();
            const LoadSample s = phase_monitor();

            if ((step + 1) % steps_per_window == 0) {
                tracker_.rotate_window(now_ms_ - cfg_.learning.window_size_ms + kStepMs,
                                       s.raw_score - prev_window_raw);
                prev_window_raw = s.raw_score;
            }
            if ((step + 1) % steps_per_tick == 0) {
                const LearningBatch batch = tracker_.drain_learning_batch(s.raw_score);
                if (cfg_.learning_enabled) {
                    if (learner) {
                        learner->submit(batch, now_ms_ + kStepMs);
                    } else {
                        out_.learn_log.push_back(
                            engine_.learning_tick(batch, now_ms_ + kStepMs));
                    }
                    out_.impact_log.emplace_back(now_ms_ + kStepMs,
                                                 tracker_.impact_report());
                }
            }
            if ((step + 1) % (1000 / kStepMs) == 0) emit_record((step + 1) / 10 - 1);
        }

        if (learner) {
            learner->wait_idle();
            auto rows = learner->drain_log();
            out_.learn_log.insert(out_.learn_log.end(), rows.begin(), rows.end());
        }
        finalize_totals();
        return std::move(out_);
    }

private:
    // ---- setup -----------------------------------------------------------

    void setup_players() {
        Rng world_rng(derive_seed(cfg_.seed, 0xA11Dull));
        players_.resize(static_cast<std::size_t>(cfg_.num_clients));
        for (std::int64_t i = 0; i < cfg_.num_clients; ++i) {
            SimPlayer& p = players_[static_cast<std::size_t>(i)];
            p.id = i;
            p.x = world_rng.uniform(0.0, cfg_.world_size);
            p.y = world_rng.uniform(0.0, cfg_.world_size);
            p.alive = true;
            p.hp = cfg_.max_hp;
            p.exo_rng = Rng(derive_seed(cfg_.seed, 0xE0ull + static_cast<std::uint64_t>(i), 0));
            p.endo_rng = Rng(derive_seed(cfg_.seed, 0xE0ull + static_cast<std::uint64_t>(i), 1));
            p.next_nearby_ms =
                (i * cfg_.policy_table[index_of(MessageType::NearbyPlayers)].min_interval_ms) /
                std::max<std::int64_t>(1, cfg_.num_clients);
        }
    }

    // ---- geometry --------------------------------------------------------

    double torus_dist2(const SimPlayer& a, const SimPlayer& b) const {
        double dx = std::fabs(a.x - b.x);
        double dy = std::fabs(a.y - b.y);
        if (dx > cfg_.world_size * 0.5) dx = cfg_.world_size - dx;
        if (dy > cfg_.world_size * 0.5) dy = cfg_.world_size - dy;
        return dx * dx + dy * dy;
    }

    void move_player(SimPlayer& p, int dir) {
        const double d = cfg_.move_step;
        switch (dir & 3) {
        case 0: p.x += d; break;
        case 1: p.x -= d; break;
        case 2: p.y += d; break;
        case 3: p.y -= d; break;
        }
        p.x = std::fmod(p.x + cfg_.world_size, cfg_.world_size);
        p.y = std::fmod(p.y + cfg_.world_size, cfg_.world_size);
    }

    void collect_within(const SimPlayer& center, double radius,
                        std::vector<VisibleEntry>& out) const {
        out.clear();
        const double r2 = radius * radius;
        for (const SimPlayer& q : players_) {
            if (q.id == center.id) continue;
            const double d2 = torus_dist2(center, q);
            if (d2 <= r2) out.push_back({q.id, std::sqrt(d2)});
        }
    }

    // ---- throttled sends -------------------------------------------------

    std::int64_t& last_send(std::int64_t recipient, MessageType t) {
        return last_send_[static_cast<std::size_t>(recipient) * kMessageTypeCount +
                          static_cast<std::size_t>(index_of(t))];
    }

    // Runs one per-recipient decision, with counters. Returns true to send.
    bool decide(MessageType t, std::int64_t recipient, std::int64_t decision_ms) {
        acc_.attempted[index_of(t)]++;
        if (!cfg_.throttling_enabled) {
            acc_.sent[index_of(t)]++;
            acc_.step_outcomes[0]++;
            last_send(recipient, t) = decision_ms;
            tracker_.record_transmission(t);
            return true;
        }
        const WeightSnapshot snap = engine_.snapshot();
        const LoadSample load = monitor_.latest();
        const double score =
            cfg_.load_override >= 0.0 ? cfg_.load_override : load.score;
        const std::int64_t tsl = decision_ms - last_send(recipient, t);
        const TransmitDecision d = should_transmit(
            cfg_.policy_table[index_of(t)], cfg_.learning, snap.w[index_of(t)],
            snap.cached_increment[index_of(t)], score, tsl,
            static_cast<std::int64_t>(queue_.size()), throttle_rng_.uniform01());
        acc_.step_outcomes[static_cast<int>(d.step)]++;
        if (d.allow) {
            acc_.sent[index_of(t)]++;
            last_send(recipient, t) = decision_ms;
            tracker_.record_transmission(t);
        } else {
            acc_.blocked[index_of(t)]++;
        }
        return d.allow;
    }

    void enqueue_input(InputKind kind, std::int64_t actor, std::int64_t cycle_start_ms) {
        if (static_cast<std::int64_t>(queue_.size()) >= cfg_.queue_hard_cap) {
            acc_.shed++;
            return;
        }
        WorkItem item;
        item.kind = WorkItem::Kind::ClientInput;
        item.input = kind;
        item.actor = actor;
        item.cycle_start_ms = cycle_start_ms;
        item.cost_units = cfg_.cost_per_input;
        item.bytes = kInputBytes;
        queue_bytes_ += item.bytes;
        queue_units_ += item.cost_units;
        totals_.inputs_enqueued++;
        queue_.push_back(std::move(item));
    }

    void enqueue_delivery(MessageType t, std::int64_t sender,
                          std::vector<std::int32_t>&& recipients, std::int32_t entries) {
        if (recipients.empty()) return;
        if (static_cast<std::int64_t>(queue_.size()) >= cfg_.queue_hard_cap) {
            acc_.shed++;
            return;
        }
        WorkItem item;
        item.kind = WorkItem::Kind::Delivery;
        item.message.msg_type = t;
        item.message.sender = sender;
        item.message.recipients = std::move(recipients);
        item.message.entries = entries;
        item.message.payload_bytes = payload_bytes_for(t, entries);
        item.message.enqueue_ms = now_ms_;
        item.cost_units =
            cfg_.cost_per_recipient * static_cast<double>(item.message.recipients.size()) +
            cfg_.cost_per_entry * static_cast<double>(entries);
        item.bytes = item.message.payload_bytes;
        queue_bytes_ += item.bytes;
        queue_units_ += item.cost_units;
        totals_.enqueued[index_of(t)]++;
        queue_.push_back(std::move(item));
    }

    // ---- step phases -----------------------------------------------------

    double tick_rate() const {
        return now_ms_ >= cfg_.burst_start_s * 1000 ? cfg_.burst_rate_hz : cfg_.calm_rate_hz;
    }

    void phase_clients() {
        const double rate = tick_rate();
        tick_phase_ += rate * (static_cast<double>(kStepMs) / 1000.0);
        int ticks = static_cast<int>(tick_phase_);
        tick_phase_ -= ticks;
        if (ticks <= 0) return;
        scratch_inputs_.clear();
        for (SimPlayer& p : players_) {
            for (int k = 0; k < ticks; ++k) {
                const std::int64_t sub_ms = now_ms_ + (k * kStepMs) / ticks;
                scratch_inputs_.clear();
                client_tick(p, cfg_, sub_ms, scratch_inputs_);
                for (const ClientInput& in : scratch_inputs_) {
                    switch (in.kind) {
                    case InputKind::Move:
                        acc_.exo_moves++;
                        move_player(p, in.direction);
                        enqueue_input(InputKind::Move, p.id, -1);
                        break;
                    case InputKind::Fire:
                        acc_.exo_fires++;
                        enqueue_input(InputKind::Fire, p.id, -1);
                        break;
                    case InputKind::Cone:
                        acc_.exo_cones++;
                        enqueue_input(InputKind::Cone, p.id, -1);
                        break;
                    case InputKind::Reaction:
                    case InputKind::ReactionFire:
                        acc_.reactions++;
                        if (in.cycle_start_ms >= 0) {
                            acc_.cycle_latency_sum += static_cast<double>(
                                sub_ms + cfg_.link_latency_ms - in.cycle_start_ms);
                            acc_.cycle_latency_count++;
                        }
                        enqueue_input(in.kind, p.id, in.cycle_start_ms);
                        break;
                    }
                }
                // Own-state sync attempt follows every client tick.
                if (decide(MessageType::OwnState, p.id, sub_ms)) {
                    std::vector<std::int32_t> rcpt{static_cast<std::int32_t>(p.id)};
                    enqueue_delivery(MessageType::OwnState, p.id, std::move(rcpt), 0);
                }
            }
        }
    }

    void phase_broadcasts() {
        const std::int64_t interval =
            cfg_.policy_table[index_of(MessageType::NearbyPlayers)].min_interval_ms;
        for (SimPlayer& p : players_) {
            if (now_ms_ < p.next_nearby_ms) continue;
            p.next_nearby_ms = now_ms_ + std::max<std::int64_t>(interval, kStepMs);
            collect_within(p, cfg_.visibility_radius, scratch_visible_);
            acc_.visible_sum += static_cast<double>(scratch_visible_.size());
            acc_.visible_builds++;
            if (scratch_visible_.empty()) continue;
            const LoadSample load = monitor_.latest();
            const double score =
                cfg_.load_override >= 0.0 ? cfg_.load_override : load.score;
            if (cfg_.throttling_enabled)
                select_nearby_recipients(scratch_visible_, score, cfg_.learning);
            std::int32_t entries = 0;
            for (const VisibleEntry& e : scratch_visible_)
                if (decide(MessageType::NearbyPlayers, p.id, now_ms_)) ++entries;
            acc_.nearby_messages++;
            acc_.nearby_entries_sent += static_cast<double>(entries);
            if (entries > 0) {
                std::vector<std::int32_t> rcpt{static_cast<std::int32_t>(p.id)};
                enqueue_delivery(MessageType::NearbyPlayers, p.id, std::move(rcpt), entries);
            }
        }
    }

    void broadcast_combat(MessageType t, std::int64_t sender,
                          const std::vector<VisibleEntry>& witnesses) {
        std::vector<std::int32_t> allowed;
        for (const VisibleEntry& w : witnesses)
            if (decide(t, w.player_id, now_ms_))
                allowed.push_back(static_cast<std::int32_t>(w.player_id));
        if (!allowed.empty()) enqueue_delivery(t, sender, std::move(allowed), 0);
    }

    void resolve_hit(SimPlayer& victim, int damage) {
        victim.hp -= damage;
        collect_within(victim, cfg_.combat_radius, scratch_witnesses_);
        if (victim.hp <= 0) {
            acc_.deaths++;
            scratch_witnesses_.push_back({victim.id, 0.0});
            broadcast_combat(MessageType::Death, victim.id, scratch_witnesses_);
            victim.hp = cfg_.max_hp;
            victim.x = combat_rng_.uniform(0.0, cfg_.world_size);
            victim.y = combat_rng_.uniform(0.0, cfg_.world_size);
        } else {
            scratch_witnesses_.push_back({victim.id, 0.0});
            broadcast_combat(MessageType::Damage, victim.id, scratch_witnesses_);
        }
    }

    void process_fire(SimPlayer& shooter) {
        collect_within(shooter, cfg_.combat_radius, scratch_witnesses_);
        if (scratch_witnesses_.empty()) return;
        std::sort(scratch_witnesses_.begin(), scratch_witnesses_.end(),
                  [](const VisibleEntry& a, const VisibleEntry& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      return a.player_id < b.player_id;
                  });
        broadcast_combat(MessageType::Projectile, shooter.id, scratch_witnesses_);
        if (combat_rng_.bernoulli(cfg_.p_hit)) {
            SimPlayer& victim = players_[static_cast<std::size_t>(scratch_witnesses_[0].player_id)];
            resolve_hit(victim, cfg_.projectile_damage);
        }
    }

    void process_cone(SimPlayer& shooter) {
        collect_within(shooter, cfg_.combat_radius, scratch_witnesses_);
        if (scratch_witnesses_.empty()) return;
        std::sort(scratch_witnesses_.begin(), scratch_witnesses_.end(),
                  [](const VisibleEntry& a, const VisibleEntry& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      return a.player_id < b.player_id;
                  });
        broadcast_combat(MessageType::Cone, shooter.id, scratch_witnesses_);
        const int targets =
            std::min<int>(cfg_.cone_targets, static_cast<int>(scratch_witnesses_.size()));
        std::array<std::int64_t, 16> hit_ids{};
        const int n_hits = std::min<int>(targets, 16);
        for (int i = 0; i < n_hits; ++i) hit_ids[i] = scratch_witnesses_[i].player_id;
        // resolve_hit reuses the witness buffer, so targets are pinned first
        for (int i = 0; i < n_hits; ++i)
            resolve_hit(players_[static_cast<std::size_t>(hit_ids[i])], cfg_.cone_damage);
    }

    void process_item(const WorkItem& item) {
        if (item.kind == WorkItem::Kind::ClientInput) {
            totals_.inputs_processed++;
            SimPlayer& actor = players_[static_cast<std::size_t>(item.actor)];
            switch (item.input) {
            case InputKind::Fire:
            case InputKind::ReactionFire:
                process_fire(actor);
                break;
            case InputKind::Cone:
                process_cone(actor);
                break;
            case InputKind::Move:
            case InputKind::Reaction:
                break; // state bookkeeping cost only
            }
            return;
        }
        totals_.processed[index_of(item.message.msg_type)]++;
        for (std::int32_t r : item.message.recipients) {
            SimPlayer& p = players_[static_cast<std::size_t>(r)];
            feedback_on_receive(p, item.message, cfg_,
                                now_ms_ + cfg_.link_latency_ms);
        }
    }

    void phase_process() {
        const double per_worker = cfg_.worker_units_per_s * 0.1;
        const double capacity = per_worker * static_cast<double>(cfg_.worker_threads);
        const double pending = queue_units_;
        const double planned = std::min(pending, capacity);
        std::int64_t active = 0;
        if (planned > 0.0)
            active = std::min<std::int64_t>(
                cfg_.worker_threads,
                static_cast<std::int64_t>(std::ceil(planned / per_worker)));
        step_contention_ = contention_rate(active, cfg_.worker_threads);
        const double mult = contention_multiplier(step_contention_, cfg_);

        double budget = capacity;
        while (!queue_.empty() && budget > 0.0) {
            WorkItem item = std::move(queue_.front());
            queue_.pop_front();
            queue_bytes_ -= item.bytes;
            queue_units_ -= item.cost_units;
            const double charged = item.cost_units * mult;
            budget -= charged;
            acc_.processing_cost += charged;
            process_item(item);
        }
    }

    LoadSample phase_monitor() {
        const double mem = std::min(
            1.0, static_cast<double>(queue_bytes_) /
                     static_cast<double>(cfg_.memory_budget_bytes));
        LoadSample s = monitor_.sample(now_ms_ + kStepMs,
                                       static_cast<std::int64_t>(queue_.size()),
                                       step_contention_, mem);
        if (cfg_.load_override >= 0.0) {
            s.score = cfg_.load_override;
            s.raw_score = cfg_.load_override;
            monitor_.publish(s);
        }
        acc_.load_sum += s.score;
        acc_.load_raw_sum += s.raw_score;
        acc_.contention_sum += s.contention;
        acc_.mem_sum += s.memory_ratio;
        acc_.samples++;
        acc_.queue_max = std::max(acc_.queue_max, s.queue_size);
        return s;
    }

    void emit_record(std::int64_t second) {
        ExperimentRecord rec;
        rec.t = second;
        rec.processing_cost = acc_.processing_cost;
        const double n = std::max(1, acc_.samples);
        rec.load_mean = acc_.load_sum / n;
        rec.load_raw_mean = acc_.load_raw_sum / n;
        rec.contention_mean = acc_.contention_sum / n;
        rec.mem_ratio_mean = acc_.mem_sum / n;
        rec.queue_max = acc_.queue_max;
        rec.attempted = acc_.attempted;
        rec.sent = acc_.sent;
        rec.blocked = acc_.blocked;
        rec.weights = engine_.snapshot().w;
        rec.clients_active = cfg_.num_clients;
        rec.visible_mean =
            acc_.visible_builds ? acc_.visible_sum / static_cast<double>(acc_.visible_builds)
                                : 0.0;
        rec.transmitted_nearby_mean =
            acc_.nearby_messages
                ? acc_.nearby_entries_sent / static_cast<double>(acc_.nearby_messages)
                : 0.0;
        rec.step_outcomes = acc_.step_outcomes;
        rec.shed = acc_.shed;
        rec.reactions = acc_.reactions;
        rec.deaths = acc_.deaths;
        rec.exo_moves = acc_.exo_moves;
        rec.exo_fires = acc_.exo_fires;
        rec.exo_cones = acc_.exo_cones;
        if (acc_.cycle_latency_count > 0)
            rec.cycle_latency_mean_ms =
                acc_.cycle_latency_sum / static_cast<double>(acc_.cycle_latency_count);

        for (int i = 0; i < kMessageTypeCount; ++i) {
            totals_.attempted[i] += acc_.attempted[i];
            totals_.sent[i] += acc_.sent[i];
            totals_.blocked[i] += acc_.blocked[i];
        }
        totals_.shed += acc_.shed;
        totals_.reactions += acc_.reactions;
        totals_.deaths += acc_.deaths;
        totals_.cycle_latency_sum_ms += acc_.cycle_latency_sum;
        totals_.cycle_latency_count += acc_.cycle_latency_count;

        out_.records.push_back(std::move(rec));
        acc_ = SecondAccum{};
    }

    void finalize_totals() {
        for (const WorkItem& item : queue_) {
            if (item.kind == WorkItem::Kind::ClientInput)
                totals_.inputs_still_queued++;
            else
                totals_.still_queued[index_of(item.message.msg_type)]++;
        }
        totals_.hot_path_violations =
            instr::hot_path_violations.load(std::memory_order_relaxed);
        out_.totals = totals_;
        out_.final_weights = engine_.snapshot().w;
    }

    // ---- state -----------------------------------------------------------

    ExperimentConfig cfg_;
    std::vector<SimPlayer> players_;
    std::vector<std::int64_t> last_send_;
    std::deque<WorkItem> queue_;
    std::int64_t queue_bytes_ = 0;
    double queue_units_ = 0.0;
    double tick_phase_ = 0.0;
    std::int64_t now_ms_ = 0;
    double step_contention_ = 0.0;

    ImpactTracker tracker_;
    LearningEngine engine_;
    LoadMonitor monitor_;
    Rng throttle_rng_;
    Rng combat_rng_;

    SecondAccum acc_;
    RunTotals totals_;
    RunOutput out_;

    std::vector<ClientInput> scratch_inputs_;
    std::vector<VisibleEntry> scratch_visible_;
    std::vector<VisibleEntry> scratch_witnesses_;
};

} // namespace

RunOutput run_simulation(const ExperimentConfig& cfg) {
    SimulationRun run(cfg);
    return run.run();
}

} // namespace afll
