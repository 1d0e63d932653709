#pragma once

#include "config.hpp"
#include "world.hpp"

#include <string>
#include <vector>

namespace afll {

struct RunSummary {
    double cost_mean = 0.0;
    double cost_median = 0.0;
    double cost_std = 0.0;
    double cost_p95 = 0.0;
    double cost_p99 = 0.0;
    double contention_mean = 0.0;
    double contention_median = 0.0;
    double pct_contention_100 = 0.0; // share of seconds at full contention, in %
    double load_mean = 0.0;
    double blocking_rate = 0.0;      // blocked / attempted over all types, in %
    std::vector<std::int64_t> spike_counts;
    std::vector<double> spike_fractions;
    std::array<double, kMessageTypeCount> final_weights{};
    std::int64_t seconds = 0;
};

RunSummary summarize(const ExperimentConfig& cfg, const RunOutput& run);

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<RunOutput> runs;      // one per repetition
    std::vector<RunSummary> summaries;
    std::vector<std::uint64_t> seeds; // derived per repetition
};

// Executes `repetitions` runs with derived seeds. When out_dir is non-empty,
// writes rep<k>/records.csv, rep<k>/learn.csv, rep<k>/impact.csv and a
// top-level summary.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int repetitions,
                                const std::string& out_dir = "");

std::uint64_t derived_seed(std::uint64_t master, int repetition);

// CSV schemas (fixed column order).
std::vector<std::string> records_csv_header();
std::vector<std::string> learn_csv_header();
std::vector<std::string> impact_csv_header();

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records);
void write_learn_csv(const std::string& path, const std::vector<LearnLogRow>& rows);
void write_impact_csv(
    const std::string& path,
    const std::vector<std::pair<std::int64_t, std::vector<ImpactReportRow>>>& log);
std::string summary_json(const ExperimentResult& result);

// Post-run invariant checks (critical delivery, counter conservation, weight
// bounds, hot-path purity). Returns human-readable failures; empty means ok.
std::vector<std::string> check_run_invariants(const ExperimentConfig& cfg, const RunOutput& run);

} // namespace afll
