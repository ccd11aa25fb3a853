#include "qkdrisk/qkdrisk.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "qkdrisk/errors.hpp"
#include "qkdrisk/pipeline.hpp"
#include "qkdrisk/series.hpp"

struct qkdrisk_config {
    qkdrisk::PipelineConfig cfg;
};

struct qkdrisk_series {
    qkdrisk::QberSeries series;
};

namespace {

thread_local std::string g_last_error;

qkdrisk_status set_error(qkdrisk_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

// Maps the C++ error taxonomy onto status codes; OK clears the message.
template <typename Fn>
qkdrisk_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return QKDRISK_OK;
    } catch (const qkdrisk::ConfigError& e) {
        return set_error(QKDRISK_ERR_CONFIG, e.what());
    } catch (const qkdrisk::DataError& e) {
        return set_error(QKDRISK_ERR_DATA, e.what());
    } catch (const qkdrisk::IoError& e) {
        return set_error(QKDRISK_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return set_error(QKDRISK_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(QKDRISK_ERR_INTERNAL, "unknown error");
    }
}

}  // namespace

extern "C" {

const char* qkdrisk_version(void) {
    return "0.1.0";
}

const char* qkdrisk_last_error(void) {
    return g_last_error.c_str();
}

qkdrisk_status qkdrisk_config_default(qkdrisk_config** out) {
    if (!out) return set_error(QKDRISK_ERR_INVALID, "null out pointer");
    return guarded([&] { *out = new qkdrisk_config{qkdrisk::PipelineConfig::defaults()}; });
}

qkdrisk_status qkdrisk_config_load(const char* path, qkdrisk_config** out) {
    if (!path || !out) return set_error(QKDRISK_ERR_INVALID, "null argument");
    return guarded([&] { *out = new qkdrisk_config{qkdrisk::PipelineConfig::load(path)}; });
}

qkdrisk_status qkdrisk_config_set(qkdrisk_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return set_error(QKDRISK_ERR_INVALID, "null argument");
    return guarded([&] { cfg->cfg.set(key, value); });
}

void qkdrisk_config_free(qkdrisk_config* cfg) {
    delete cfg;
}

qkdrisk_status qkdrisk_series_load_csv(const char* path, qkdrisk_series** out) {
    if (!path || !out) return set_error(QKDRISK_ERR_INVALID, "null argument");
    return guarded([&] { *out = new qkdrisk_series{qkdrisk::load_qber_csv(path)}; });
}

qkdrisk_status qkdrisk_series_save_csv(const qkdrisk_series* series, const char* path) {
    if (!series || !path) return set_error(QKDRISK_ERR_INVALID, "null argument");
    return guarded([&] { qkdrisk::save_qber_csv(series->series, path); });
}

qkdrisk_status qkdrisk_series_resolve(const qkdrisk_config* cfg, qkdrisk_series** out) {
    if (!cfg || !out) return set_error(QKDRISK_ERR_INVALID, "null argument");
    return guarded([&] { *out = new qkdrisk_series{qkdrisk::resolve_input_series(cfg->cfg)}; });
}

size_t qkdrisk_series_size(const qkdrisk_series* series) {
    return series ? series->series.size() : 0;
}

double qkdrisk_series_qber(const qkdrisk_series* series, size_t index) {
    if (!series || index >= series->series.size()) return std::nan("");
    return series->series.samples[index].qber;
}

int qkdrisk_series_attacked(const qkdrisk_series* series, size_t index) {
    if (!series || index >= series->series.size()) return 0;
    const auto& lbl = series->series.samples[index].attack_label;
    return lbl && *lbl ? 1 : 0;
}

size_t qkdrisk_series_labeled_count(const qkdrisk_series* series) {
    return series ? series->series.labeled_count() : 0;
}

void qkdrisk_series_free(qkdrisk_series* series) {
    delete series;
}

qkdrisk_status qkdrisk_run_simulate(const qkdrisk_config* cfg) {
    if (!cfg) return set_error(QKDRISK_ERR_INVALID, "null config");
    return guarded([&] { qkdrisk::run_simulate(cfg->cfg); });
}

qkdrisk_status qkdrisk_run_train(const qkdrisk_config* cfg) {
    if (!cfg) return set_error(QKDRISK_ERR_INVALID, "null config");
    return guarded([&] { qkdrisk::run_train(cfg->cfg); });
}

qkdrisk_status qkdrisk_run_test(const qkdrisk_config* cfg) {
    if (!cfg) return set_error(QKDRISK_ERR_INVALID, "null config");
    return guarded([&] { qkdrisk::run_test(cfg->cfg); });
}

qkdrisk_status qkdrisk_run_risk(const qkdrisk_config* cfg) {
    if (!cfg) return set_error(QKDRISK_ERR_INVALID, "null config");
    return guarded([&] { qkdrisk::run_risk(cfg->cfg); });
}

qkdrisk_status qkdrisk_run_report(const char* run_dir, const char* compare_dir,
                                  char** summary_out) {
    if (!run_dir) return set_error(QKDRISK_ERR_INVALID, "null run_dir");
    return guarded([&] {
        std::string text = qkdrisk::run_report(run_dir, compare_dir ? compare_dir : "");
        if (summary_out) {
            *summary_out = static_cast<char*>(::malloc(text.size() + 1));
            if (!*summary_out) throw std::bad_alloc();
            std::memcpy(*summary_out, text.c_str(), text.size() + 1);
        }
    });
}

void qkdrisk_string_free(char* s) {
    ::free(s);
}

}  // extern "C"
