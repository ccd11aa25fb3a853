// qkdrisk command-line front end. Talks to the shared library exclusively
// through the C API.
//
// Exit codes: 0 success, 2 configuration error, 3 data/io error.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "qkdrisk/qkdrisk.h"

namespace {

int status_to_exit(qkdrisk_status st) {
    switch (st) {
        case QKDRISK_OK:
            return 0;
        case QKDRISK_ERR_CONFIG:
        case QKDRISK_ERR_INVALID:
            return 2;
        case QKDRISK_ERR_DATA:
        case QKDRISK_ERR_IO:
            return 3;
        default:
            return 1;
    }
}

int fail(qkdrisk_status st) {
    std::fprintf(stderr, "error: %s\n", qkdrisk_last_error());
    return status_to_exit(st);
}

struct StageArgs {
    std::string config_path;
    std::string out_dir;
    std::string seed;
    std::string trained;
    std::string baseline;
};

void add_stage_options(CLI::App* cmd, StageArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "pipeline config file");
    if (config_required) opt->required();
    cmd->add_option("--seed", args.seed, "master seed (overrides the config)");
    cmd->add_option("--out", args.out_dir, "output directory (overrides the config)");
}

// Builds the config handle with CLI overrides applied; null on failure with
// the status left in st.
qkdrisk_config* make_config(const StageArgs& args, qkdrisk_status& st) {
    qkdrisk_config* cfg = nullptr;
    st = args.config_path.empty() ? qkdrisk_config_default(&cfg)
                                  : qkdrisk_config_load(args.config_path.c_str(), &cfg);
    if (st != QKDRISK_OK) return nullptr;

    auto apply = [&](const char* key, const std::string& value) {
        if (st == QKDRISK_OK && !value.empty()) st = qkdrisk_config_set(cfg, key, value.c_str());
    };
    apply("seed", args.seed);
    apply("output.dir", args.out_dir);
    apply("risk.trained", args.trained);
    apply("risk.baseline", args.baseline);
    if (st != QKDRISK_OK) {
        qkdrisk_config_free(cfg);
        return nullptr;
    }
    return cfg;
}

int run_stage(const StageArgs& args, qkdrisk_status (*stage)(const qkdrisk_config*)) {
    qkdrisk_status st = QKDRISK_OK;
    qkdrisk_config* cfg = make_config(args, st);
    if (!cfg) return fail(st);
    st = stage(cfg);
    qkdrisk_config_free(cfg);
    if (st != QKDRISK_OK) return fail(st);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QBER risk analysis pipeline for QKD links"};
    app.require_subcommand(1);

    StageArgs sim_args, train_args, test_args, risk_args;
    std::string report_dir, compare_dir;

    auto* sim = app.add_subcommand("simulate", "generate a QBER series (optionally attacked)");
    add_stage_options(sim, sim_args);

    auto* train = app.add_subcommand("train", "category-based GMM training");
    add_stage_options(train, train_args);

    auto* test = app.add_subcommand("test", "test-phase assignment or cross-validation");
    add_stage_options(test, test_args);
    test->add_option("--trained", test_args.trained, "trained categoryset.json");

    auto* risk = app.add_subcommand("risk", "risk report for an evaluation series");
    add_stage_options(risk, risk_args);
    risk->add_option("--trained", risk_args.trained, "trained categoryset.json");
    risk->add_option("--baseline", risk_args.baseline, "attack-free categoryset for gates");

    auto* report = app.add_subcommand("report", "summarize a finished run directory");
    report->add_option("--out", report_dir, "run directory to summarize")->required();
    report->add_option("--compare", compare_dir, "second run directory for comparison");

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) return run_stage(sim_args, qkdrisk_run_simulate);
    if (train->parsed()) return run_stage(train_args, qkdrisk_run_train);
    if (test->parsed()) return run_stage(test_args, qkdrisk_run_test);
    if (risk->parsed()) return run_stage(risk_args, qkdrisk_run_risk);

    if (report->parsed()) {
        char* summary = nullptr;
        qkdrisk_status st = qkdrisk_run_report(
            report_dir.c_str(), compare_dir.empty() ? nullptr : compare_dir.c_str(), &summary);
        if (st != QKDRISK_OK) return fail(st);
        std::fputs(summary, stdout);
        qkdrisk_string_free(summary);
        return 0;
    }
    return 2;
}
