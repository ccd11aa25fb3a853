#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "qkdrisk/learner.hpp"
#include "qkdrisk/risk.hpp"
#include "qkdrisk/series.hpp"
#include "qkdrisk/sim.hpp"

namespace qkdrisk {

// End-to-end run settings, read from a sectioned key=value file.
// Defaults are the reference operating point (T_Training=100, T_Test=10000,
// I_max=100, varsigma=0.95, rho=0.05, alpha=0.2%, alpha_1m=0.001%).
struct PipelineConfig {
    // input: exactly one of csv / profile
    std::string input_csv;
    std::string profile;
    std::size_t n = 47768;
    std::string channel_tag;
    std::int64_t cadence = 60;

    std::optional<AttackSpec> attack;

    std::size_t k = 4;  // training folds
    std::size_t z = 4;  // test folds
    FoldMode fold_mode = FoldMode::Contiguous;
    std::size_t cv = 0;              // >0: cross-validation mode for the test stage
    std::size_t train_subfolds = 0;  // cv option
    std::size_t test_subfolds = 2;   // cv option

    LearnerConfig learner;
    RiskConfig risk;

    std::string trained_path;   // categoryset consumed by test/risk (default <out>/categoryset.json)
    std::string baseline_path;  // attack-free categoryset for gate calibration
    bool calibrate_from_baseline = false;

    std::uint64_t seed = 1;
    std::string out_dir = "out";

    static PipelineConfig defaults();
    static PipelineConfig load(const std::string& path);

    // "section.key" form, e.g. set("attack.upsilon_e", "500").
    void set(const std::string& key, const std::string& value);

    // config echo for manifests
    std::map<std::string, std::string> to_map() const;
};

// The series a stage operates on: the CSV when configured, otherwise a
// deterministic simulation (plus attack injection when configured), i.e.
// exactly what the simulate stage would have written for this config.
QberSeries resolve_input_series(const PipelineConfig& cfg);

// Pipeline stages. Every stage writes its outputs plus a manifest naming
// input/output content hashes into cfg.out_dir.
void run_simulate(const PipelineConfig& cfg);
void run_train(const PipelineConfig& cfg);
void run_test(const PipelineConfig& cfg);
RiskReport run_risk(const PipelineConfig& cfg);

// Text summary of a finished run directory; optional second directory for
// a side-by-side comparison. Writes summary.txt (and comparison.csv when
// comparing) into run_dir and returns the summary text.
std::string run_report(const std::string& run_dir, const std::string& compare_dir = "");

// FNV-1a 64-bit content hashes used by the stage manifests.
std::uint64_t fnv1a_hash(const std::string& bytes);
std::uint64_t hash_file(const std::string& path);

}  // namespace qkdrisk
