#include "afll/afll.h"

#include "config.hpp"
#include "experiment.hpp"
#include "load_monitor.hpp"
#include "stats.hpp"
#include "throttler.hpp"
#include "csvio.hpp"

#include <cstring>
#include <string>

#include <json.hpp>

namespace {

constexpr int kVersionMajor = 0;
constexpr int kVersionMinor = 2;
constexpr int kVersionPatch = 0;

thread_local std::string tl_error;

void set_error(const std::string& msg) { tl_error = msg; }

afll_status fail(afll_status st, const std::string& msg) {
    set_error(msg);
    return st;
}

// Exceptions never cross the C boundary.
template <typename Fn>
afll_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        return fail(AFLL_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::logic_error& e) {
        return fail(AFLL_ERR_PRECONDITION, e.what());
    } catch (const std::exception& e) {
        return fail(AFLL_ERR_INTERNAL, e.what());
    }
}

} // namespace

struct afll_config {
    afll::ExperimentConfig cfg;
};

struct afll_run {
    afll::ExperimentResult result;
};

struct afll_series {
    std::vector<double> values;
};

extern "C" {

const char* afll_status_str(afll_status status) {
    switch (status) {
    case AFLL_OK: return "ok";
    case AFLL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case AFLL_ERR_PARSE: return "parse error";
    case AFLL_ERR_IO: return "io error";
    case AFLL_ERR_PRECONDITION: return "precondition violated";
    case AFLL_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* afll_last_error(void) { return tl_error.c_str(); }

void afll_version(int* major, int* minor, int* patch) {
    if (major) *major = kVersionMajor;
    if (minor) *minor = kVersionMinor;
    if (patch) *patch = kVersionPatch;
}

afll_config* afll_config_default(void) { return new afll_config{afll::ExperimentConfig{}}; }

afll_config* afll_config_load(const char* path) {
    if (!path) {
        set_error("null path");
        return nullptr;
    }
    try {
        return new afll_config{afll::load_config(path)};
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return nullptr;
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

afll_config* afll_config_parse(const char* json_text) {
    if (!json_text) {
        set_error("null config text");
        return nullptr;
    }
    try {
        return new afll_config{afll::config_from_json_text(json_text)};
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

afll_status afll_config_save(const afll_config* cfg, const char* path) {
    if (!cfg || !path) return fail(AFLL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        try {
            afll::save_config(cfg->cfg, path);
        } catch (const std::runtime_error& e) {
            return fail(AFLL_ERR_IO, e.what());
        }
        return AFLL_OK;
    });
}

char* afll_config_dump(const afll_config* cfg) {
    if (!cfg) {
        set_error("null config");
        return nullptr;
    }
    const std::string text = afll::to_json_text(cfg->cfg);
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!out) {
        set_error("out of memory");
        return nullptr;
    }
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

void afll_string_free(char* s) { std::free(s); }

void afll_config_free(afll_config* cfg) { delete cfg; }

} // extern "C"

namespace {

// Applies one field edit through the JSON form so every key the file format
// knows is addressable, then revalidates.
template <typename V>
afll_status config_set(afll_config* cfg, const char* key, const V& value) {
    if (!cfg || !key) return fail(AFLL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        nlohmann::ordered_json j =
            nlohmann::ordered_json::parse(afll::to_json_text(cfg->cfg));
        nlohmann::ordered_json::json_pointer ptr{key};
        if (!j.contains(ptr)) return fail(AFLL_ERR_INVALID_ARGUMENT,
                                          std::string("unknown config key: ") + key);
        j[ptr] = value;
        cfg->cfg = afll::config_from_json_text(j.dump());
        return AFLL_OK;
    });
}

} // namespace

extern "C" {

afll_status afll_config_set_f64(afll_config* cfg, const char* key, double value) {
    return config_set(cfg, key, value);
}

afll_status afll_config_set_i64(afll_config* cfg, const char* key, int64_t value) {
    return config_set(cfg, key, value);
}

afll_status afll_config_set_bool(afll_config* cfg, const char* key, int value) {
    return config_set(cfg, key, value != 0);
}

afll_status afll_config_set_str(afll_config* cfg, const char* key, const char* value) {
    if (!value) return fail(AFLL_ERR_INVALID_ARGUMENT, "null value");
    return config_set(cfg, key, std::string(value));
}

afll_status afll_config_get_f64(const afll_config* cfg, const char* key, double* out) {
    if (!cfg || !key || !out) return fail(AFLL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        nlohmann::ordered_json j =
            nlohmann::ordered_json::parse(afll::to_json_text(cfg->cfg));
        nlohmann::ordered_json::json_pointer ptr{key};
        if (!j.contains(ptr))
            return fail(AFLL_ERR_INVALID_ARGUMENT, std::string("unknown config key: ") + key);
        *out = j[ptr].get<double>();
        return AFLL_OK;
    });
}

afll_status afll_config_get_i64(const afll_config* cfg, const char* key, int64_t* out) {
    if (!cfg || !key || !out) return fail(AFLL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        nlohmann::ordered_json j =
            nlohmann::ordered_json::parse(afll::to_json_text(cfg->cfg));
        nlohmann::ordered_json::json_pointer ptr{key};
        if (!j.contains(ptr))
            return fail(AFLL_ERR_INVALID_ARGUMENT, std::string("unknown config key: ") + key);
        *out = j[ptr].get<int64_t>();
        return AFLL_OK;
    });
}

afll_status afll_load_score(int64_t queue_size, double contention, double memory_ratio,
                            double* out) {
    if (!out) return fail(AFLL_ERR_INVALID_ARGUMENT, "null out");
    return guarded([&] {
        try {
            *out = afll::load_score(queue_size, contention, memory_ratio);
        } catch (const std::invalid_argument& e) {
            return fail(AFLL_ERR_PRECONDITION, e.what());
        }
        return AFLL_OK;
    });
}

afll_status afll_queue_penalty(int64_t queue_size, int64_t knee, int64_t divisor,
                               double* out) {
    if (!out) return fail(AFLL_ERR_INVALID_ARGUMENT, "null out");
    if (divisor <= 0) return fail(AFLL_ERR_INVALID_ARGUMENT, "divisor must be positive");
    return guarded([&] {
        try {
            *out = afll::queue_penalty(queue_size, knee, divisor);
        } catch (const std::invalid_argument& e) {
            return fail(AFLL_ERR_PRECONDITION, e.what());
        }
        return AFLL_OK;
    });
}

afll_run* afll_run_execute(const afll_config* cfg, int repetitions, const char* out_dir) {
    if (!cfg) {
        set_error("null config");
        return nullptr;
    }
    if (repetitions < 1) {
        set_error("repetitions must be >= 1");
        return nullptr;
    }
    try {
        return new afll_run{
            afll::run_experiment(cfg->cfg, repetitions, out_dir ? out_dir : "")};
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

int afll_run_rep_count(const afll_run* run) {
    return run ? static_cast<int>(run->result.summaries.size()) : 0;
}

afll_status afll_run_summary_get(const afll_run* run, int rep, afll_run_summary* out) {
    if (!run || !out) return fail(AFLL_ERR_INVALID_ARGUMENT, "null argument");
    if (rep < 0 || rep >= static_cast<int>(run->result.summaries.size()))
        return fail(AFLL_ERR_INVALID_ARGUMENT, "repetition index out of range");
    const afll::RunSummary& s = run->result.summaries[static_cast<std::size_t>(rep)];
    afll_run_summary o{};
    o.cost_mean = s.cost_mean;
    o.cost_median = s.cost_median;
    o.cost_std = s.cost_std;
    o.cost_p95 = s.cost_p95;
    o.cost_p99 = s.cost_p99;
    o.contention_mean = s.contention_mean;
    o.contention_median = s.contention_median;
    o.pct_contention_100 = s.pct_contention_100;
    o.load_mean = s.load_mean;
    o.blocking_rate = s.blocking_rate;
    for (int i = 0; i < AFLL_MESSAGE_TYPE_COUNT; ++i) o.final_weights[i] = s.final_weights[i];
    o.spike_threshold_count =
        static_cast<int>(std::min<std::size_t>(s.spike_counts.size(), AFLL_MAX_SPIKE_THRESHOLDS));
    for (int i = 0; i < o.spike_threshold_count; ++i) {
        o.spike_thresholds[i] = run->result.config.spike_thresholds[static_cast<std::size_t>(i)];
        o.spike_counts[i] = s.spike_counts[static_cast<std::size_t>(i)];
        o.spike_fractions[i] = s.spike_fractions[static_cast<std::size_t>(i)];
    }
    o.seconds = s.seconds;
    o.seed = run->result.seeds[static_cast<std::size_t>(rep)];
    *out = o;
    return AFLL_OK;
}

afll_status afll_run_check(const afll_run* run, char* report, size_t report_cap) {
    if (!run) return fail(AFLL_ERR_INVALID_ARGUMENT, "null run");
    return guarded([&] {
        std::string all;
        bool ok = true;
        for (std::size_t k = 0; k < run->result.runs.size(); ++k) {
            auto failures =
                afll::check_run_invariants(run->result.config, run->result.runs[k]);
            for (const std::string& f : failures) {
                ok = false;
                all += "rep" + std::to_string(k) + ": " + f + "\n";
            }
        }
        if (report && report_cap > 0) {
            const std::size_t n = std::min(report_cap - 1, all.size());
            std::memcpy(report, all.data(), n);
            report[n] = '\0';
        }
        if (!ok) return fail(AFLL_ERR_PRECONDITION, "run invariants violated");
        return AFLL_OK;
    });
}

void afll_run_free(afll_run* run) { delete run; }

afll_status afll_percentile(const double* xs, size_t n, double q, double* out) {
    if (!xs || !out) return fail(AFLL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = afll::stats::percentile({xs, n}, q);
        return AFLL_OK;
    });
}

afll_status afll_welch_t_test(const double* a, size_t na, const double* b, size_t nb,
                              double* t, double* p) {
    if (!a || !b || !t || !p) return fail(AFLL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto r = afll::stats::welch_t_test({a, na}, {b, nb});
        *t = r.t;
        *p = r.p;
        return AFLL_OK;
    });
}

afll_status afll_cohens_d(const double* a, size_t na, const double* b, size_t nb, double* d) {
    if (!a || !b || !d) return fail(AFLL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *d = afll::stats::cohens_d({a, na}, {b, nb});
        return AFLL_OK;
    });
}

afll_status afll_cv_percent(const double* xs, size_t n, double* out) {
    if (!xs || !out) return fail(AFLL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = afll::stats::coefficient_of_variation({xs, n});
        return AFLL_OK;
    });
}

afll_series* afll_series_load(const char* csv_path, const char* column) {
    if (!csv_path || !column) {
        set_error("null argument");
        return nullptr;
    }
    try {
        const auto table = afll::csv::read_table(csv_path);
        return new afll_series{table.column_as_double(column)};
    } catch (const std::exception& e) {
        set_error(e.what());
        return nullptr;
    }
}

size_t afll_series_len(const afll_series* s) { return s ? s->values.size() : 0; }

const double* afll_series_data(const afll_series* s) {
    return s && !s->values.empty() ? s->values.data() : nullptr;
}

void afll_series_free(afll_series* s) { delete s; }

} // extern "C"
