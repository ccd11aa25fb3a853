#include "qkdrisk/learner.hpp"

#include <algorithm>
#include <string>

#include "qkdrisk/errors.hpp"
#include "qkdrisk/ks.hpp"
#include "qkdrisk/rng.hpp"

namespace qkdrisk {

namespace {

// seed-path stage tags
constexpr std::uint64_t kStageColdInit = 1;
constexpr std::uint64_t kStageScoreSample = 2;
constexpr std::uint64_t kStageMatch = 3;
constexpr std::uint64_t kStageFold = 4;
constexpr std::uint64_t kStageRefine = 5;

std::vector<double> concat_folds(const QberSeries& series, const FoldSet& folds,
                                 const std::vector<std::size_t>& members) {
    std::vector<double> out;
    for (std::size_t f : members) {
        auto v = fold_values(series, folds, f);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

const FitRecord* find_fit(const std::vector<FitRecord>& fits, int c) {
    for (const auto& f : fits)
        if (f.c == c) return &f;
    return nullptr;
}

// (max p, its c) with ties toward smaller c
std::pair<double, int> best_of(const std::vector<FitRecord>& fits) {
    double p = -1.0;
    int c = 0;
    for (const auto& f : fits) {
        if (f.p_value > p) {
            p = f.p_value;
            c = f.c;
        }
    }
    return {p, c};
}

}  // namespace

int Category::best_c() const {
    if (fits.empty()) throw DataError("category " + std::to_string(id) + " has no fits");
    const FitRecord* best = &fits.front();
    for (const auto& f : fits)
        if (f.p_value > best->p_value) best = &f;
    return best->c;
}

double Category::best_p() const {
    if (fits.empty()) throw DataError("category " + std::to_string(id) + " has no fits");
    double p = 0.0;
    for (const auto& f : fits) p = std::max(p, f.p_value);
    return p;
}

const GmmModel& Category::best_model() const {
    const FitRecord* f = find_fit(fits, best_c());
    return f->model;
}

void LearnerConfig::validate() const {
    if (c_min < 1 || c_max < c_min) throw ConfigError("learner: bad cluster range");
    if (t_training < 1 || t_test < 1) throw ConfigError("learner: trial counts must be >= 1");
    if (i_max < 1) throw ConfigError("learner: i_max must be >= 1");
    if (!(varsigma > 0.0 && varsigma < 1.0)) throw ConfigError("learner: varsigma must be in (0,1)");
}

const Category* CategorySet::find(int id) const {
    for (const auto& c : categories)
        if (c.id == id) return &c;
    return nullptr;
}

nlohmann::json CategorySet::to_json() const {
    nlohmann::json j;
    j["varsigma"] = config.varsigma;
    j["c_min"] = config.c_min;
    j["c_max"] = config.c_max;
    j["t_training"] = config.t_training;
    j["t_test"] = config.t_test;
    j["i_max"] = config.i_max;
    j["total_samples"] = total_samples;
    j["categories"] = nlohmann::json::array();
    for (const auto& cat : categories) {
        nlohmann::json jc;
        jc["id"] = cat.id;
        jc["member_folds"] = cat.member_folds;
        jc["sample_count"] = cat.sample_count;
        jc["fits"] = nlohmann::json::array();
        for (const auto& f : cat.fits) {
            jc["fits"].push_back({{"c", f.c},
                                  {"p_value", f.p_value},
                                  {"trials_used", f.trials_used},
                                  {"model", f.model.to_json()}});
        }
        j["categories"].push_back(jc);
    }
    j["fold_records"] = nlohmann::json::array();
    for (const auto& r : fold_records) {
        j["fold_records"].push_back({{"fold", r.fold},
                                     {"category", r.category_id},
                                     {"p_value", r.p_value},
                                     {"best_c", r.best_c},
                                     {"matched", r.matched}});
    }
    return j;
}

CategorySet CategorySet::from_json(const nlohmann::json& j) {
    CategorySet set;
    set.config.varsigma = j.at("varsigma").get<double>();
    set.config.c_min = j.at("c_min").get<int>();
    set.config.c_max = j.at("c_max").get<int>();
    set.config.t_training = j.at("t_training").get<int>();
    set.config.t_test = j.at("t_test").get<int>();
    set.config.i_max = j.at("i_max").get<int>();
    set.total_samples = j.at("total_samples").get<std::size_t>();
    for (const auto& jc : j.at("categories")) {
        Category cat;
        cat.id = jc.at("id").get<int>();
        cat.member_folds = jc.at("member_folds").get<std::vector<std::size_t>>();
        cat.sample_count = jc.at("sample_count").get<std::size_t>();
        for (const auto& jf : jc.at("fits")) {
            FitRecord f;
            f.c = jf.at("c").get<int>();
            f.p_value = jf.at("p_value").get<double>();
            f.trials_used = jf.at("trials_used").get<int>();
            f.model = GmmModel::from_json(jf.at("model"));
            cat.fits.push_back(std::move(f));
        }
        set.categories.push_back(std::move(cat));
    }
    for (const auto& jr : j.at("fold_records")) {
        FoldRecord r;
        r.fold = jr.at("fold").get<std::size_t>();
        r.category_id = jr.at("category").get<int>();
        r.p_value = jr.at("p_value").get<double>();
        r.best_c = jr.at("best_c").get<int>();
        r.matched = jr.at("matched").get<bool>();
        set.fold_records.push_back(r);
    }
    return set;
}

std::vector<FitRecord> algorithm1_fit(std::span<const double> data, const LearnerConfig& cfg,
                                      int t_max, const std::vector<FitRecord>* warm,
                                      std::uint64_t seed) {
    cfg.validate();
    if (t_max < 1) throw ConfigError("algorithm1_fit: t_max must be >= 1");
    if (data.size() < static_cast<std::size_t>(cfg.c_max))
        throw DataError("algorithm1_fit: " + std::to_string(data.size()) +
                        " samples, need at least c_max = " + std::to_string(cfg.c_max));

    const std::size_t n = data.size();
    std::vector<FitRecord> out;
    out.reserve(cfg.c_max - cfg.c_min + 1);

    for (int c = cfg.c_min; c <= cfg.c_max; ++c) {
        const FitRecord* warm_fit = warm ? find_fit(*warm, c) : nullptr;
        // warm EM start is deterministic, so the fit is shared by all trials
        GmmModel warm_model;
        if (warm_fit) warm_model = em_fit(data, c, warm_fit->model, cfg.i_max).model;

        FitRecord best;
        best.c = c;
        best.trials_used = t_max;
        best.p_value = -1.0;
        for (int m = 0; m < t_max; ++m) {
            GmmModel model =
                warm_fit ? warm_model
                         : em_fit(data, c, derive_seed(seed, {kStageColdInit, (std::uint64_t)c, (std::uint64_t)m}),
                                  cfg.i_max)
                               .model;
            auto synth = gmm_sample(
                model, n, derive_seed(seed, {kStageScoreSample, (std::uint64_t)c, (std::uint64_t)m}));
            double p = ks_pvalue_asymptotic(ks_statistic(data, synth), n, n);
            if (p > best.p_value) {
                best.p_value = p;
                best.model = model;
            }
        }
        out.push_back(std::move(best));
    }
    return out;
}

double category_match_pvalue(std::span<const double> fold, const Category& category, int trials,
                             std::uint64_t seed) {
    if (category.fits.empty())
        throw DataError("category " + std::to_string(category.id) + " has no fits to match");
    if (fold.empty()) throw DataError("category_match_pvalue: empty fold");
    double best = 0.0;
    for (const auto& fit : category.fits) {
        for (int m = 0; m < trials; ++m) {
            auto synth = gmm_sample(
                fit.model, fold.size(),
                derive_seed(seed, {kStageMatch, (std::uint64_t)fit.c, (std::uint64_t)m}));
            best = std::max(best, ks_pvalue_asymptotic(ks_statistic(fold, synth), fold.size(),
                                                       synth.size()));
        }
    }
    return best;
}

TrainResult algorithm2_train(const QberSeries& series, const FoldSet& folds,
                             const LearnerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const std::size_t k = folds.k();
    if (k < 2) throw ConfigError("algorithm2_train: need at least 2 folds");

    TrainResult res;
    res.set.config = cfg;
    res.set.total_samples = 0;
    for (const auto& f : folds.folds) res.set.total_samples += f.size();

    auto fold_seed = [&](std::size_t s) { return derive_seed(seed, {kStageFold, s}); };

    // C_1 <- F_1
    {
        auto data = fold_values(series, folds, 0);
        Category c1;
        c1.id = 1;
        c1.member_folds = {0};
        c1.sample_count = data.size();
        c1.fits = algorithm1_fit(data, cfg, cfg.t_training, nullptr, fold_seed(0));
        res.fold_fits.push_back({0, c1.fits});
        res.set.fold_records.push_back({0, 1, c1.best_p(), c1.best_c(), false});
        res.set.categories.push_back(std::move(c1));
    }

    for (std::size_t s = 1; s < k; ++s) {
        auto data = fold_values(series, folds, s);
        Category& current = res.set.categories.back();
        double match =
            category_match_pvalue(data, current, cfg.t_training, derive_seed(seed, {kStageMatch, s}));
        if (match > cfg.varsigma) {
            // joins the current category; refresh its stored fits from this fold
            auto fits = algorithm1_fit(data, cfg, cfg.t_training, &current.fits, fold_seed(s));
            current.member_folds.push_back(s);
            current.sample_count += data.size();
            res.set.fold_records.push_back({s, current.id, match, best_of(fits).second, true});
            res.fold_fits.push_back({s, fits});
            current.fits = std::move(fits);
        } else {
            Category next;
            next.id = current.id + 1;
            next.member_folds = {s};
            next.sample_count = data.size();
            next.fits = algorithm1_fit(data, cfg, cfg.t_training, nullptr, fold_seed(s));
            res.fold_fits.push_back({s, next.fits});
            res.set.fold_records.push_back({s, next.id, next.best_p(), next.best_c(), false});
            res.set.categories.push_back(std::move(next));
        }
    }
    return res;
}

TrainResult algorithm3_test(const QberSeries& series, const FoldSet& folds,
                            const CategorySet& trained, const LearnerConfig& cfg,
                            std::uint64_t seed) {
    cfg.validate();
    if (trained.categories.empty()) throw DataError("algorithm3_test: empty trained category set");

    TrainResult res;
    res.set.config = cfg;
    res.set.categories = trained.categories;
    for (auto& cat : res.set.categories) {
        cat.member_folds.clear();  // members now index *test* folds
        cat.sample_count = 0;
    }
    res.set.total_samples = 0;
    for (const auto& f : folds.folds) res.set.total_samples += f.size();

    const std::size_t H = res.set.categories.size();
    for (std::size_t s = 0; s < folds.k(); ++s) {
        auto data = fold_values(series, folds, s);
        for (std::size_t h = 0; h < H; ++h) {
            double p = category_match_pvalue(data, res.set.categories[h], cfg.t_training,
                                             derive_seed(seed, {kStageMatch, s, h}));
            bool last = (h + 1 == H);
            if (p > cfg.varsigma || last) {
                res.set.categories[h].member_folds.push_back(s);
                res.set.categories[h].sample_count += data.size();
                res.set.fold_records.push_back(
                    {s, res.set.categories[h].id, p, res.set.categories[h].best_c(),
                     p > cfg.varsigma});
                break;
            }
        }
    }

    // refinement on each category's accumulated test data
    for (std::size_t h = 0; h < H; ++h) {
        Category& cat = res.set.categories[h];
        if (cat.member_folds.empty()) continue;
        auto data = concat_folds(series, folds, cat.member_folds);
        if (data.size() < static_cast<std::size_t>(cfg.c_max)) continue;  // too small to refit
        cat.fits =
            algorithm1_fit(data, cfg, cfg.t_test, &cat.fits, derive_seed(seed, {kStageRefine, h}));
    }
    return res;
}

std::vector<CvReport> cross_validate(const QberSeries& series, std::size_t k,
                                     const LearnerConfig& cfg, const CvOptions& opt,
                                     std::uint64_t seed) {
    cfg.validate();
    if (k < 2) throw ConfigError("cross_validate: k must be >= 2");
    FoldSet cv = partition_folds(series, k, FoldMode::Contiguous);

    std::vector<CvReport> reports;
    for (std::size_t i = 0; i < k; ++i) {
        // training series: all folds except i, original order
        QberSeries train_series;
        train_series.channel_tag = series.channel_tag;
        for (std::size_t f = 0; f < k; ++f) {
            if (f == i) continue;
            for (std::size_t idx : cv.folds[f]) train_series.samples.push_back(series.samples[idx]);
        }
        QberSeries test_series;
        test_series.channel_tag = series.channel_tag;
        for (std::size_t idx : cv.folds[i]) test_series.samples.push_back(series.samples[idx]);

        std::size_t n_train = opt.train_subfolds ? opt.train_subfolds : k - 1;
        std::size_t n_test = std::max<std::size_t>(opt.test_subfolds, 2);
        FoldSet train_folds = partition_folds(train_series, n_train, FoldMode::Contiguous);
        FoldSet test_folds = partition_folds(test_series, n_test, FoldMode::Contiguous);

        CvReport rep;
        rep.test_fold = i;
        auto trained = algorithm2_train(train_series, train_folds, cfg, derive_seed(seed, {7, i}));
        auto tested =
            algorithm3_test(test_series, test_folds, trained.set, cfg, derive_seed(seed, {8, i}));

        auto test_vals = test_series.qber_values();
        for (int c = cfg.c_min; c <= cfg.c_max; ++c) {
            CvCurvePoint pt;
            pt.c = c;
            const GmmModel* best = nullptr;
            for (const auto& cat : tested.set.categories) {
                for (const auto& f : cat.fits) {
                    if (f.c == c && f.p_value >= pt.p_value) {
                        pt.p_value = f.p_value;
                        best = &f.model;
                    }
                }
            }
            pt.aic = best ? aic(*best, test_vals) : 0.0;
            rep.curve.push_back(pt);
            rep.best_p = std::max(rep.best_p, pt.p_value);
        }
        rep.trained = std::move(trained.set);
        rep.tested = std::move(tested.set);
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace qkdrisk
