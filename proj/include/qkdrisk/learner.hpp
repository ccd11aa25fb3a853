#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "qkdrisk/gmm.hpp"
#include "qkdrisk/series.hpp"

namespace qkdrisk {

// Best-of-trials fit for one cluster count.
struct FitRecord {
    int c = 0;
    GmmModel model;
    double p_value = 0.0;  // maximum KS P-value over all trials at this c
    int trials_used = 0;
};

// A group of folds sharing one mixture fit. `fits` holds the current
// representative model per cluster count (the most recent fold-level run,
// or the refinement result in the test phase).
struct Category {
    int id = 0;
    std::vector<std::size_t> member_folds;
    std::vector<FitRecord> fits;
    std::size_t sample_count = 0;

    int best_c() const;      // argmax p_value, ties toward smaller c
    double best_p() const;
    const GmmModel& best_model() const;
};

// One row of the per-fold assignment table: the P-value that decided the
// fold's category (a match score for assigned folds, the fold's own best
// fit for category-founding folds).
struct FoldRecord {
    std::size_t fold = 0;
    int category_id = 0;
    double p_value = 0.0;
    int best_c = 0;
    bool matched = false;  // false when the fold founded (or fell back to) its category
};

struct LearnerConfig {
    int c_min = 2;
    int c_max = 15;
    int t_training = 100;
    int t_test = 10000;
    int i_max = 100;
    double varsigma = 0.95;

    void validate() const;
};

struct CategorySet {
    std::vector<Category> categories;
    std::vector<FoldRecord> fold_records;
    LearnerConfig config;
    std::size_t total_samples = 0;

    std::size_t category_count() const { return categories.size(); }
    const Category* find(int id) const;

    nlohmann::json to_json() const;
    static CategorySet from_json(const nlohmann::json& j);
};

// Per-fold detail kept alongside the category set for the P-value/AIC tables.
struct FoldFits {
    std::size_t fold = 0;
    std::vector<FitRecord> fits;
};

struct TrainResult {
    CategorySet set;
    std::vector<FoldFits> fold_fits;
};

// Exhaustive-trial fitting: for each cluster count c, t_max trials, each
// scored by the KS P-value between the data and a synthetic sample of the
// trial's fitted model (sample size = data size); the argmax trial is kept.
// Cold trials use independently seeded initializations; when warm models
// are supplied the EM start is fixed to them and the trials explore the
// sampling side of the score.
std::vector<FitRecord> algorithm1_fit(std::span<const double> data, const LearnerConfig& cfg,
                                      int t_max, const std::vector<FitRecord>* warm,
                                      std::uint64_t seed);

// Match score of a fold against a category: maximum KS P-value between the
// fold and samples drawn from the category's stored models, over all
// cluster counts and `trials` draws per count. No refit happens here; the
// category's models are the hypothesis under test.
double category_match_pvalue(std::span<const double> fold, const Category& category, int trials,
                             std::uint64_t seed);

// Training phase: the first fold founds category 1; every later fold is
// checked against the current category only and either joins it (match
// P-value above varsigma, stored fits refreshed by a warm refit on the
// fold) or founds the next category with a cold fit.
TrainResult algorithm2_train(const QberSeries& series, const FoldSet& folds,
                             const LearnerConfig& cfg, std::uint64_t seed);

// Testing phase: each fold is matched against categories in order and
// assigned to the first one whose match P-value exceeds varsigma, or to
// the last category when none does. No categories are created. Afterwards
// every category holding test folds is refit on their concatenation with
// t_test trials.
TrainResult algorithm3_test(const QberSeries& series, const FoldSet& folds,
                            const CategorySet& trained, const LearnerConfig& cfg,
                            std::uint64_t seed);

// P-value/AIC curve entry for one cluster count of one cross-validation fold.
struct CvCurvePoint {
    int c = 0;
    double p_value = 0.0;
    double aic = 0.0;
};

struct CvReport {
    std::size_t test_fold = 0;
    CategorySet trained;
    CategorySet tested;
    std::vector<CvCurvePoint> curve;  // refined per-c view against the test fold
    double best_p = 0.0;
};

struct CvOptions {
    std::size_t train_subfolds = 0;  // 0: one sub-fold per remaining CV fold
    std::size_t test_subfolds = 2;
};

// K-fold cross-validation: each fold in turn is the test set; the rest are
// re-partitioned and trained with algorithm2, then algorithm3 runs on the
// held-out fold.
std::vector<CvReport> cross_validate(const QberSeries& series, std::size_t k,
                                     const LearnerConfig& cfg, const CvOptions& opt,
                                     std::uint64_t seed);

}  // namespace qkdrisk
