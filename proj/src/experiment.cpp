#include "experiment.hpp"

#include "csvio.hpp"
#include "stats.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace afll {

namespace fs = std::filesystem;

std::uint64_t derived_seed(std::uint64_t master, int repetition) {
    return derive_seed(master, 0x5EEDull, static_cast<std::uint64_t>(repetition));
}

RunSummary summarize(const ExperimentConfig& cfg, const RunOutput& run) {
    RunSummary s;
    s.seconds = static_cast<std::int64_t>(run.records.size());
    if (run.records.empty()) return s;

    std::vector<double> cost, contention, load;
    cost.reserve(run.records.size());
    std::int64_t full_contention = 0;
    std::int64_t attempted = 0, blocked = 0;
    for (const ExperimentRecord& r : run.records) {
        cost.push_back(r.processing_cost);
        contention.push_back(r.contention_mean);
        load.push_back(r.load_mean);
        if (r.contention_mean >= 1.0) ++full_contention;
        for (int i = 0; i < kMessageTypeCount; ++i) {
            attempted += r.attempted[i];
            blocked += r.blocked[i];
        }
    }
    s.cost_mean = stats::mean(cost);
    s.cost_median = stats::median(cost);
    s.cost_std = stats::stddev_population(cost);
    s.cost_p95 = stats::percentile(cost, 95.0);
    s.cost_p99 = stats::percentile(cost, 99.0);
    s.contention_mean = stats::mean(contention);
    s.contention_median = stats::median(contention);
    s.pct_contention_100 =
        100.0 * static_cast<double>(full_contention) / static_cast<double>(run.records.size());
    s.load_mean = stats::mean(load);
    s.blocking_rate =
        attempted == 0 ? 0.0
                       : 100.0 * static_cast<double>(blocked) / static_cast<double>(attempted);
    auto buckets = stats::spike_count(
        cost, std::span<const double>(cfg.spike_thresholds.data(), cfg.spike_thresholds.size()));
    for (const auto& b : buckets) {
        s.spike_counts.push_back(b.count);
        s.spike_fractions.push_back(b.fraction);
    }
    s.final_weights = run.final_weights;
    return s;
}

std::vector<std::string> records_csv_header() {
    std::vector<std::string> h = {"t",
                                  "processing_cost",
                                  "load_mean",
                                  "load_raw_mean",
                                  "contention_mean",
                                  "queue_max",
                                  "mem_ratio_mean"};
    for (const char* prefix : {"attempted_", "sent_", "blocked_"})
        for (MessageType t : all_message_types())
            h.push_back(prefix + std::string(to_string(t)));
    for (MessageType t : all_message_types()) h.push_back("w_" + std::string(to_string(t)));
    h.insert(h.end(), {"clients_active", "visible_mean", "transmitted_nearby_mean",
                       "allowed_step0", "allowed_step1", "allowed_step2", "allowed_step3",
                       "blocked_step3", "shed", "reactions", "deaths", "exo_moves",
                       "exo_fires", "exo_cones", "cycle_latency_mean_ms"});
    return h;
}

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records) {
    csv::Writer w(path, records_csv_header());
    for (const ExperimentRecord& r : records) {
        w.begin_row();
        w.field(r.t);
        w.field(r.processing_cost);
        w.field(r.load_mean);
        w.field(r.load_raw_mean);
        w.field(r.contention_mean);
        w.field(r.queue_max);
        w.field(r.mem_ratio_mean);
        for (std::int64_t v : r.attempted) w.field(v);
        for (std::int64_t v : r.sent) w.field(v);
        for (std::int64_t v : r.blocked) w.field(v);
        for (double v : r.weights) w.field(v);
        w.field(r.clients_active);
        w.field(r.visible_mean);
        w.field(r.transmitted_nearby_mean);
        for (std::int64_t v : r.step_outcomes) w.field(v);
        w.field(r.shed);
        w.field(r.reactions);
        w.field(r.deaths);
        w.field(r.exo_moves);
        w.field(r.exo_fires);
        w.field(r.exo_cones);
        w.field(r.cycle_latency_mean_ms);
        w.end_row();
    }
    w.flush();
}

std::vector<std::string> learn_csv_header() {
    std::vector<std::string> h = {"t"};
    for (MessageType t : all_message_types()) h.push_back("w_" + std::string(to_string(t)));
    for (MessageType t : all_message_types()) h.push_back("v_" + std::string(to_string(t)));
    h.insert(h.end(), {"dl_pred", "dl_actual", "err"});
    return h;
}

void write_learn_csv(const std::string& path, const std::vector<LearnLogRow>& rows) {
    csv::Writer w(path, learn_csv_header());
    for (const LearnLogRow& r : rows) {
        w.begin_row();
        w.field(r.t_ms);
        for (double v : r.w) w.field(v);
        for (double v : r.v) w.field(v);
        w.field(r.dl_pred);
        w.field(r.dl_actual);
        w.field(r.err);
        w.end_row();
    }
    w.flush();
}

std::vector<std::string> impact_csv_header() {
    return {"t", "type", "windows", "slope", "mean_count"};
}

void write_impact_csv(
    const std::string& path,
    const std::vector<std::pair<std::int64_t, std::vector<ImpactReportRow>>>& log) {
    csv::Writer w(path, impact_csv_header());
    for (const auto& [t_ms, rows] : log) {
        for (const ImpactReportRow& r : rows) {
            w.begin_row();
            w.field(t_ms);
            w.field(std::string(to_string(r.msg_type)));
            w.field(r.windows);
            w.field(r.slope);
            w.field(r.mean_count);
            w.end_row();
        }
    }
    w.flush();
}

std::string summary_json(const ExperimentResult& result) {
    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::parse(to_json_text(result.config));
    j["repetitions"] = result.summaries.size();
    j["seeds"] = result.seeds;
    nlohmann::ordered_json reps = nlohmann::ordered_json::array();
    for (const RunSummary& s : result.summaries) {
        nlohmann::ordered_json r;
        r["seconds"] = s.seconds;
        r["cost_mean"] = s.cost_mean;
        r["cost_median"] = s.cost_median;
        r["cost_std"] = s.cost_std;
        r["cost_p95"] = s.cost_p95;
        r["cost_p99"] = s.cost_p99;
        r["contention_mean"] = s.contention_mean;
        r["contention_median"] = s.contention_median;
        r["pct_contention_100"] = s.pct_contention_100;
        r["load_mean"] = s.load_mean;
        r["blocking_rate"] = s.blocking_rate;
        r["spike_counts"] = s.spike_counts;
        r["spike_fractions"] = s.spike_fractions;
        r["final_weights"] = s.final_weights;
        reps.push_back(r);
    }
    j["runs"] = reps;
    if (result.summaries.size() >= 2) {
        std::vector<double> means;
        for (const RunSummary& s : result.summaries) means.push_back(s.cost_mean);
        j["cost_mean_cv_percent"] = stats::coefficient_of_variation(means);
    }
    return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int repetitions,
                                const std::string& out_dir) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    validate(cfg);
    ExperimentResult result;
    result.config = cfg;
    if (!out_dir.empty()) fs::create_directories(out_dir);
    for (int k = 0; k < repetitions; ++k) {
        ExperimentConfig rep_cfg = cfg;
        rep_cfg.seed = derived_seed(cfg.seed, k);
        result.seeds.push_back(rep_cfg.seed);
        RunOutput run = run_simulation(rep_cfg);
        result.summaries.push_back(summarize(rep_cfg, run));
        if (!out_dir.empty()) {
            const fs::path rep_dir = fs::path(out_dir) / ("rep" + std::to_string(k));
            fs::create_directories(rep_dir);
            write_records_csv((rep_dir / "records.csv").string(), run.records);
            write_learn_csv((rep_dir / "learn.csv").string(), run.learn_log);
            write_impact_csv((rep_dir / "impact.csv").string(), run.impact_log);
        }
        result.runs.push_back(std::move(run));
    }
    if (!out_dir.empty()) {
        std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write summary.json in " + out_dir);
        out << summary_json(result);
    }
    return result;
}

std::vector<std::string> check_run_invariants(const ExperimentConfig& cfg,
                                              const RunOutput& run) {
    std::vector<std::string> failures;
    const RunTotals& t = run.totals;

    for (MessageType mt : {MessageType::Death, MessageType::Damage}) {
        const int i = index_of(mt);
        if (t.sent[i] != t.attempted[i])
            failures.push_back("critical type " + std::string(to_string(mt)) +
                               " was blocked: sent " + std::to_string(t.sent[i]) + " of " +
                               std::to_string(t.attempted[i]));
    }
    for (int i = 0; i < kMessageTypeCount; ++i) {
        if (t.sent[i] + t.blocked[i] != t.attempted[i])
            failures.push_back("sent+blocked != attempted for type " + std::to_string(i));
        if (t.processed[i] + t.still_queued[i] != t.enqueued[i])
            failures.push_back("queue conservation violated for type " + std::to_string(i));
    }
    if (t.inputs_processed + t.inputs_still_queued != t.inputs_enqueued)
        failures.push_back("queue conservation violated for client inputs");
    if (t.hot_path_violations != 0)
        failures.push_back("learning ops executed on the hot path: " +
                           std::to_string(t.hot_path_violations));
    for (const ExperimentRecord& r : run.records) {
        for (int i = 0; i < kMessageTypeCount; ++i) {
            const MessageTypePolicy& p = cfg.policy_table[i];
            if (r.weights[i] < p.weight_min - 1e-12 || r.weights[i] > p.weight_max + 1e-12) {
                failures.push_back("weight out of policy bounds at t=" + std::to_string(r.t));
                break;
            }
        }
    }
    return failures;
}

} // namespace afll
