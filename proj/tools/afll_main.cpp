// afll — experiment driver for the adaptive feedback-loop load control
// library. Wraps the C API: runs simulations, compares result directories
// and exports plot-ready series.

#include <afll/afll.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitCheckFailure = 3;

struct ConfigHandle {
    afll_config* cfg = nullptr;
    ~ConfigHandle() { afll_config_free(cfg); }
};

struct RunHandle {
    afll_run* run = nullptr;
    ~RunHandle() { afll_run_free(run); }
};

int config_fail(const std::string& what) {
    std::fprintf(stderr, "config error: %s: %s\n", what.c_str(), afll_last_error());
    return kExitConfigError;
}

bool apply_set(afll_config* cfg, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) return false;
    const std::string key = spec.substr(0, eq);
    const std::string val = spec.substr(eq + 1);
    if (val == "true" || val == "false")
        return afll_config_set_bool(cfg, key.c_str(), val == "true") == AFLL_OK;
    char* end = nullptr;
    const double d = std::strtod(val.c_str(), &end);
    if (end && *end == '\0' && end != val.c_str()) {
        if (val.find_first_of(".eE") == std::string::npos)
            return afll_config_set_i64(cfg, key.c_str(), static_cast<int64_t>(d)) == AFLL_OK;
        return afll_config_set_f64(cfg, key.c_str(), d) == AFLL_OK;
    }
    return afll_config_set_str(cfg, key.c_str(), val.c_str()) == AFLL_OK;
}

void print_summary(const afll_run_summary& s, int rep) {
    std::printf("rep %d (seed %llu): cost mean %.1f median %.1f std %.1f p95 %.1f p99 %.1f\n",
                rep, static_cast<unsigned long long>(s.seed), s.cost_mean, s.cost_median,
                s.cost_std, s.cost_p95, s.cost_p99);
    std::printf("        contention mean %.4f median %.4f at-100%% %.2f%% | load %.4f | "
                "blocked %.2f%%\n",
                s.contention_mean, s.contention_median, s.pct_contention_100, s.load_mean,
                s.blocking_rate);
    std::printf("        weights");
    for (double w : s.final_weights) std::printf(" %.4f", w);
    std::printf("\n");
    for (int i = 0; i < s.spike_threshold_count; ++i)
        std::printf("        spikes > %.0f: %lld (%.2f%%)\n", s.spike_thresholds[i],
                    static_cast<long long>(s.spike_counts[i]), 100.0 * s.spike_fractions[i]);
}

std::vector<double> load_dir_series(const std::string& dir, const std::string& column) {
    std::vector<double> out;
    std::vector<fs::path> reps;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() && entry.path().filename().string().rfind("rep", 0) == 0)
            reps.push_back(entry.path());
    std::sort(reps.begin(), reps.end());
    if (reps.empty() && fs::exists(fs::path(dir) / "records.csv")) reps.push_back(dir);
    for (const fs::path& rep : reps) {
        afll_series* s = afll_series_load((rep / "records.csv").string().c_str(),
                                          column.c_str());
        if (!s) throw std::runtime_error(std::string("cannot load series: ") + afll_last_error());
        out.insert(out.end(), afll_series_data(s), afll_series_data(s) + afll_series_len(s));
        afll_series_free(s);
    }
    if (out.empty()) throw std::runtime_error("no records found under " + dir);
    return out;
}

double vec_mean(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double vec_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n == 0 ? 0.0 : (n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
}

double vec_std(const std::vector<double>& v) {
    const double m = vec_mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return v.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(v.size()));
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets,
            int learning, long long clients, long long duration, long long seed, int reps,
            const std::string& out_dir, bool deterministic, bool check) {
    ConfigHandle c;
    c.cfg = config_path.empty() ? afll_config_default() : afll_config_load(config_path.c_str());
    if (!c.cfg) return config_fail("load");

    if (clients >= 0 &&
        afll_config_set_i64(c.cfg, "/experiment/num_clients", clients) != AFLL_OK)
        return config_fail("--clients");
    if (duration >= 0 &&
        afll_config_set_i64(c.cfg, "/experiment/duration", duration) != AFLL_OK)
        return config_fail("--duration");
    if (seed >= 0 && afll_config_set_i64(c.cfg, "/experiment/seed", seed) != AFLL_OK)
        return config_fail("--seed");
    if (learning >= 0) {
        // "off" is the uncontrolled baseline: no learning and no throttling.
        if (afll_config_set_bool(c.cfg, "/experiment/learning_enabled", learning) != AFLL_OK ||
            afll_config_set_bool(c.cfg, "/experiment/throttling_enabled", learning) != AFLL_OK)
            return config_fail("--learning");
    }
    if (deterministic &&
        afll_config_set_bool(c.cfg, "/experiment/deterministic", 1) != AFLL_OK)
        return config_fail("--deterministic");
    for (const std::string& s : sets)
        if (!apply_set(c.cfg, s)) return config_fail("--set " + s);

    RunHandle r;
    r.run = afll_run_execute(c.cfg, reps, out_dir.empty() ? nullptr : out_dir.c_str());
    if (!r.run) {
        std::fprintf(stderr, "run failed: %s\n", afll_last_error());
        return 1;
    }
    for (int k = 0; k < afll_run_rep_count(r.run); ++k) {
        afll_run_summary s;
        if (afll_run_summary_get(r.run, k, &s) == AFLL_OK) print_summary(s, k);
    }
    if (!out_dir.empty()) std::printf("results written to %s\n", out_dir.c_str());
    if (check) {
        char report[4096];
        if (afll_run_check(r.run, report, sizeof(report)) != AFLL_OK) {
            std::fprintf(stderr, "invariant check FAILED:\n%s", report);
            return kExitCheckFailure;
        }
        std::printf("invariant check passed\n");
    }
    return 0;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b,
                const std::string& metric) {
    std::vector<double> a, b;
    try {
        a = load_dir_series(dir_a, metric);
        b = load_dir_series(dir_b, metric);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "compare: %s\n", e.what());
        return 1;
    }
    auto pct = [](const std::vector<double>& v, double q) {
        double out = 0.0;
        afll_percentile(v.data(), v.size(), q, &out);
        return out;
    };
    std::printf("%-12s %14s %14s %12s\n", "metric", "A", "B", "change");
    auto row = [](const char* name, double va, double vb) {
        const double change = va == 0.0 ? 0.0 : 100.0 * (vb - va) / va;
        std::printf("%-12s %14.2f %14.2f %+11.1f%%\n", name, va, vb, change);
    };
    row("mean", vec_mean(a), vec_mean(b));
    row("median", vec_median(a), vec_median(b));
    row("std", vec_std(a), vec_std(b));
    row("p95", pct(a, 95.0), pct(b, 95.0));
    row("p99", pct(a, 99.0), pct(b, 99.0));
    double t = 0.0, p = 0.0, d = 0.0;
    if (afll_welch_t_test(a.data(), a.size(), b.data(), b.size(), &t, &p) != AFLL_OK) {
        std::fprintf(stderr, "welch t-test: %s\n", afll_last_error());
        return 1;
    }
    if (afll_cohens_d(b.data(), b.size(), a.data(), a.size(), &d) != AFLL_OK) {
        std::fprintf(stderr, "cohen's d: %s\n", afll_last_error());
        return 1;
    }
    std::printf("welch t = %.4f, two-sided p = %.6g\n", t, p);
    std::printf("cohen's d (B vs A) = %.4f\n", d);
    return 0;
}

int cmd_plotdata(const std::string& in_dir, const std::string& series,
                 const std::string& out_path) {
    std::vector<std::string> columns;
    if (series == "cpu") {
        columns = {"processing_cost"};
    } else if (series == "contention") {
        columns = {"contention_mean"};
    } else if (series == "weights") {
        columns = {"w_death", "w_damage", "w_projectile", "w_cone", "w_own_state",
                   "w_nearby_players"};
    } else if (series == "nearby") {
        columns = {"visible_mean", "transmitted_nearby_mean"};
    } else {
        std::fprintf(stderr, "unknown series: %s\n", series.c_str());
        return kExitConfigError;
    }

    std::FILE* out = out_path.empty() ? stdout : std::fopen(out_path.c_str(), "wb");
    if (!out) {
        std::fprintf(stderr, "cannot open %s\n", out_path.c_str());
        return 1;
    }
    std::fprintf(out, "rep,t,series,value\n");
    int rep_index = 0;
    std::vector<fs::path> reps;
    for (const auto& entry : fs::directory_iterator(in_dir))
        if (entry.is_directory() && entry.path().filename().string().rfind("rep", 0) == 0)
            reps.push_back(entry.path());
    std::sort(reps.begin(), reps.end());
    if (reps.empty() && fs::exists(fs::path(in_dir) / "records.csv")) reps.push_back(in_dir);
    for (const fs::path& rep : reps) {
        const std::string path = (rep / "records.csv").string();
        for (const std::string& col : columns) {
            afll_series* s = afll_series_load(path.c_str(), col.c_str());
            if (!s) {
                std::fprintf(stderr, "plotdata: %s\n", afll_last_error());
                if (out != stdout) std::fclose(out);
                return 1;
            }
            const double* xs = afll_series_data(s);
            for (size_t i = 0; i < afll_series_len(s); ++i)
                std::fprintf(out, "%d,%zu,%s,%.17g\n", rep_index, i, col.c_str(), xs[i]);
            afll_series_free(s);
        }
        ++rep_index;
    }
    if (out != stdout) std::fclose(out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive feedback-loop load control experiments"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run an experiment");
    std::string config_path, out_dir, learning_str;
    std::vector<std::string> sets;
    long long clients = -1, duration = -1, seed = -1;
    int reps = 1;
    bool deterministic = false, check = false;
    run->add_option("--config", config_path, "config file (JSON)");
    run->add_option("--learning", learning_str, "on|off (off disables all control)")
        ->check(CLI::IsMember({"on", "off"}));
    run->add_option("--clients", clients, "override number of clients");
    run->add_option("--duration", duration, "override duration in seconds");
    run->add_option("--seed", seed, "override master seed");
    run->add_option("--reps", reps, "repetitions with derived seeds")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "output directory for CSV results");
    run->add_option("--set", sets, "override a config field, e.g. /learning/alpha=0.05");
    run->add_flag("--deterministic", deterministic, "force single-threaded deterministic mode");
    run->add_flag("--check", check, "verify run invariants; exit 3 on failure");

    // compare
    auto* compare = app.add_subcommand("compare", "compare two result directories");
    std::string dir_a, dir_b, metric = "processing_cost";
    compare->add_option("--a", dir_a, "baseline directory")->required();
    compare->add_option("--b", dir_b, "treatment directory")->required();
    compare->add_option("--metric", metric, "records.csv column to compare");

    // plotdata
    auto* plot = app.add_subcommand("plotdata", "export tidy series for plotting");
    std::string in_dir, series = "cpu", plot_out;
    plot->add_option("--in", in_dir, "result directory")->required();
    plot->add_option("--series", series, "cpu|contention|weights|nearby");
    plot->add_option("--out", plot_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitConfigError : 0;
    }

    if (run->parsed())
        return cmd_run(config_path, sets, learning_str.empty() ? -1 : learning_str == "on",
                       clients, duration, seed, reps, out_dir, deterministic, check);
    if (compare->parsed()) return cmd_compare(dir_a, dir_b, metric);
    if (plot->parsed()) return cmd_plotdata(in_dir, series, plot_out);
    return kExitConfigError;
}
