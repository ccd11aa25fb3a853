#include "qkdrisk/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qkdrisk/errors.hpp"
#include "qkdrisk/rng.hpp"

namespace fs = std::filesystem;

namespace qkdrisk {

namespace {

// seed-path stage tags (disjoint from the learner's)
constexpr std::uint64_t kStageChannel = 21;
constexpr std::uint64_t kStageAttack = 22;
constexpr std::uint64_t kStageTrain = 23;
constexpr std::uint64_t kStageTest = 24;
constexpr std::uint64_t kStageWindow = 25;
constexpr std::uint64_t kStageWindowRefit = 26;
constexpr std::uint64_t kStageWeights = 27;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(key + ": expected unsigned integer, got '" + v + "'");
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(key + ": expected number, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected boolean, got '" + v + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

AttackSpec attack_defaults() {
    return AttackSpec{};
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_manifest(const PipelineConfig& cfg, const std::string& stage,
                    const std::map<std::string, std::string>& inputs,
                    const std::map<std::string, std::string>& outputs) {
    nlohmann::json j;
    j["stage"] = stage;
    j["seed"] = cfg.seed;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["config"] = cfg.to_map();
    write_file((fs::path(cfg.out_dir) / ("manifest_" + stage + ".json")).string(), j.dump(2) + "\n");
}

// Verifies a previously written artifact against the hash its producing
// stage recorded, so mixed stale outputs fail loudly.
void check_against_manifest(const std::string& artifact_path) {
    fs::path p(artifact_path);
    fs::path dir = p.parent_path();
    std::string name = p.filename().string();
    for (const char* stage : {"simulate", "train", "test", "risk"}) {
        fs::path man = dir / (std::string("manifest_") + stage + ".json");
        if (!fs::exists(man)) continue;
        auto j = nlohmann::json::parse(read_file(man.string()));
        if (!j.contains("outputs")) continue;
        auto& outs = j["outputs"];
        if (!outs.contains(name)) continue;
        std::string recorded = outs[name].get<std::string>();
        std::string actual = hash_hex(hash_file(artifact_path));
        if (recorded != actual)
            throw DataError(artifact_path + ": content hash " + actual +
                            " does not match the " + stage + " manifest (" + recorded +
                            "); stale or mixed run directory");
    }
}

std::string resolved_trained_path(const PipelineConfig& cfg) {
    if (!cfg.trained_path.empty()) return cfg.trained_path;
    return (fs::path(cfg.out_dir) / "categoryset.json").string();
}

CategorySet load_categoryset(const std::string& path) {
    check_against_manifest(path);
    return CategorySet::from_json(nlohmann::json::parse(read_file(path)));
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::string& path) {
    return fnv1a_hash(read_file(path));
}

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig cfg;
    cfg.profile = "30km";
    return cfg;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "seed") {
        seed = to_u64(key, v);
    } else if (key == "input.csv") {
        input_csv = v;
    } else if (key == "input.profile") {
        profile = v;
    } else if (key == "input.n") {
        n = to_u64(key, v);
    } else if (key == "input.channel_tag") {
        channel_tag = v;
    } else if (key == "input.cadence") {
        cadence = static_cast<std::int64_t>(to_u64(key, v));
    } else if (key == "attack.upsilon_e") {
        if (!attack) attack = attack_defaults();
        attack->upsilon_e = to_double(key, v);
    } else if (key == "attack.qber_low") {
        if (!attack) attack = attack_defaults();
        attack->qber_low = to_double(key, v);
    } else if (key == "attack.qber_high") {
        if (!attack) attack = attack_defaults();
        attack->qber_high = to_double(key, v);
    } else if (key == "attack.duration") {
        if (!attack) attack = attack_defaults();
        attack->duration = to_u64(key, v);
    } else if (key == "attack.enabled") {
        if (to_bool(key, v)) {
            if (!attack) attack = attack_defaults();
        } else {
            attack.reset();
        }
    } else if (key == "folds.k") {
        k = to_u64(key, v);
    } else if (key == "folds.z") {
        z = to_u64(key, v);
    } else if (key == "folds.mode") {
        if (v == "contiguous")
            fold_mode = FoldMode::Contiguous;
        else if (v == "strided")
            fold_mode = FoldMode::Strided;
        else
            throw ConfigError("folds.mode: expected contiguous or strided, got '" + v + "'");
    } else if (key == "folds.cv") {
        cv = to_u64(key, v);
    } else if (key == "folds.train_subfolds") {
        train_subfolds = to_u64(key, v);
    } else if (key == "folds.test_subfolds") {
        test_subfolds = to_u64(key, v);
    } else if (key == "learner.c_min") {
        learner.c_min = static_cast<int>(to_u64(key, v));
    } else if (key == "learner.c_max") {
        learner.c_max = static_cast<int>(to_u64(key, v));
    } else if (key == "learner.t_training") {
        learner.t_training = static_cast<int>(to_u64(key, v));
    } else if (key == "learner.t_test") {
        learner.t_test = static_cast<int>(to_u64(key, v));
    } else if (key == "learner.i_max") {
        learner.i_max = static_cast<int>(to_u64(key, v));
    } else if (key == "learner.varsigma") {
        learner.varsigma = to_double(key, v);
    } else if (key == "risk.rho") {
        risk.rho = to_double(key, v);
    } else if (key == "risk.varsigma") {
        risk.varsigma = to_double(key, v);
    } else if (key == "risk.gate_mode") {
        if (v == "constant")
            risk.gate_mode = GateMode::Constant;
        else if (v == "per_category")
            risk.gate_mode = GateMode::PerCategory;
        else
            throw ConfigError("risk.gate_mode: expected constant or per_category, got '" + v + "'");
    } else if (key == "risk.alpha") {
        risk.alpha_const = to_double(key, v);
    } else if (key == "risk.alpha_1m") {
        risk.alpha_1m = to_double(key, v);
    } else if (key == "risk.eps_min") {
        risk.eps_min = to_double(key, v);
    } else if (key == "risk.eps_max") {
        risk.eps_max = to_double(key, v);
    } else if (key == "risk.varphi") {
        risk.varphi = to_double(key, v);
    } else if (key == "risk.per_sample_eta") {
        risk.per_sample_eta = to_bool(key, v);
    } else if (key == "risk.windows") {
        risk.windows = to_u64(key, v);
    } else if (key == "risk.weight_draws") {
        risk.weighting.m_draws = static_cast<int>(to_u64(key, v));
    } else if (key == "risk.weight_mean_low") {
        risk.weighting.mean_low = to_double(key, v);
    } else if (key == "risk.weight_mean_high") {
        risk.weighting.mean_high = to_double(key, v);
    } else if (key == "risk.trained") {
        trained_path = v;
    } else if (key == "risk.baseline") {
        baseline_path = v;
        calibrate_from_baseline = !v.empty();
    } else if (key == "risk.calibrate") {
        calibrate_from_baseline = to_bool(key, v);
    } else if (key == "output.dir") {
        out_dir = v;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    PipelineConfig cfg = defaults();
    cfg.profile.clear();  // the file decides the input source

    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        cfg.set(section.empty() ? key : section + "." + key, value);
    }

    if (cfg.input_csv.empty() && cfg.profile.empty())
        throw ConfigError(path + ": no input source (set input.csv or input.profile)");
    if (!cfg.input_csv.empty() && !cfg.profile.empty())
        throw ConfigError(path + ": both input.csv and input.profile set; choose one");
    return cfg;
}

std::map<std::string, std::string> PipelineConfig::to_map() const {
    std::map<std::string, std::string> m;
    m["seed"] = std::to_string(seed);
    if (!input_csv.empty()) m["input.csv"] = input_csv;
    if (!profile.empty()) m["input.profile"] = profile;
    m["input.n"] = std::to_string(n);
    m["input.cadence"] = std::to_string(cadence);
    if (!channel_tag.empty()) m["input.channel_tag"] = channel_tag;
    if (attack) {
        m["attack.upsilon_e"] = fmt(attack->upsilon_e);
        m["attack.qber_low"] = fmt(attack->qber_low);
        m["attack.qber_high"] = fmt(attack->qber_high);
        m["attack.duration"] = std::to_string(attack->duration);
    }
    m["folds.k"] = std::to_string(k);
    m["folds.z"] = std::to_string(z);
    m["folds.mode"] = fold_mode == FoldMode::Contiguous ? "contiguous" : "strided";
    if (cv) m["folds.cv"] = std::to_string(cv);
    if (train_subfolds) m["folds.train_subfolds"] = std::to_string(train_subfolds);
    m["folds.test_subfolds"] = std::to_string(test_subfolds);
    m["learner.c_min"] = std::to_string(learner.c_min);
    m["learner.c_max"] = std::to_string(learner.c_max);
    m["learner.t_training"] = std::to_string(learner.t_training);
    m["learner.t_test"] = std::to_string(learner.t_test);
    m["learner.i_max"] = std::to_string(learner.i_max);
    m["learner.varsigma"] = fmt(learner.varsigma);
    m["risk.rho"] = fmt(risk.rho);
    m["risk.varsigma"] = fmt(risk.varsigma);
    m["risk.gate_mode"] = risk.gate_mode == GateMode::Constant ? "constant" : "per_category";
    m["risk.alpha"] = fmt(risk.alpha_const);
    m["risk.alpha_1m"] = fmt(risk.alpha_1m);
    m["risk.eps_min"] = fmt(risk.eps_min);
    m["risk.eps_max"] = fmt(risk.eps_max);
    m["risk.varphi"] = fmt(risk.varphi);
    m["risk.per_sample_eta"] = risk.per_sample_eta ? "true" : "false";
    m["risk.windows"] = std::to_string(risk.windows);
    m["risk.weight_draws"] = std::to_string(risk.weighting.m_draws);
    if (!trained_path.empty()) m["risk.trained"] = trained_path;
    if (!baseline_path.empty()) m["risk.baseline"] = baseline_path;
    m["output.dir"] = out_dir;
    return m;
}

QberSeries resolve_input_series(const PipelineConfig& cfg) {
    if (!cfg.input_csv.empty()) {
        QberSeries s = load_qber_csv(cfg.input_csv);
        if (!cfg.channel_tag.empty()) s.channel_tag = cfg.channel_tag;
        return s;
    }
    if (cfg.profile.empty()) throw ConfigError("no input source configured");
    ChannelProfile profile = preset_profile(cfg.profile);
    QberSeries s = simulate_qber_series(profile, cfg.n, derive_seed(cfg.seed, {kStageChannel}), 0,
                                        cfg.cadence);
    if (!cfg.channel_tag.empty()) s.channel_tag = cfg.channel_tag;
    if (cfg.attack) {
        cfg.attack->validate();
        s = inject_trojan_attacks(s, *cfg.attack, derive_seed(cfg.seed, {kStageAttack}));
    }
    return s;
}

void run_simulate(const PipelineConfig& cfg) {
    if (cfg.profile.empty())
        throw ConfigError("simulate needs input.profile (input.csv makes no sense here)");
    ensure_out_dir(cfg.out_dir);
    QberSeries series = resolve_input_series(cfg);

    fs::path dir(cfg.out_dir);
    std::string csv_path = (dir / "series.csv").string();
    save_qber_csv(series, csv_path);

    nlohmann::json meta;
    meta["profile"] = cfg.profile;
    meta["profile_synthetic"] = true;
    meta["n"] = series.size();
    meta["seed"] = cfg.seed;
    meta["cadence"] = cfg.cadence;
    meta["labeled_samples"] = series.labeled_count();
    if (cfg.attack) {
        meta["attack"] = {{"upsilon_e", cfg.attack->upsilon_e},
                          {"qber_low", cfg.attack->qber_low},
                          {"qber_high", cfg.attack->qber_high},
                          {"duration", cfg.attack->duration}};
    }
    write_file((dir / "sim_meta.json").string(), meta.dump(2) + "\n");

    write_manifest(cfg, "simulate", {},
                   {{"series.csv", hash_hex(hash_file(csv_path))},
                    {"sim_meta.json", hash_hex(hash_file((dir / "sim_meta.json").string()))}});
}

namespace {

std::string input_hash(const PipelineConfig& cfg, const QberSeries& series) {
    if (!cfg.input_csv.empty()) return hash_hex(hash_file(cfg.input_csv));
    return hash_hex(fnv1a_hash(to_csv_string(series)));
}

void write_fold_table(const std::string& path, const QberSeries& series, const FoldSet& folds,
                      const TrainResult& res) {
    std::ostringstream out;
    out << "fold,category,c,p_value,aic\n";
    for (const auto& ff : res.fold_fits) {
        auto data = fold_values(series, folds, ff.fold);
        int cat_id = 0;
        for (const auto& r : res.set.fold_records)
            if (r.fold == ff.fold) cat_id = r.category_id;
        for (const auto& fit : ff.fits) {
            out << ff.fold << ',' << cat_id << ',' << fit.c << ',' << fmt(fit.p_value) << ','
                << fmt(aic(fit.model, data)) << "\n";
        }
    }
    write_file(path, out.str());
}

void write_fold_records(const std::string& path, const CategorySet& set) {
    std::ostringstream out;
    out << "fold,category,p_value,best_c,matched\n";
    for (const auto& r : set.fold_records) {
        out << r.fold << ',' << r.category_id << ',' << fmt(r.p_value) << ',' << r.best_c << ','
            << (r.matched ? 1 : 0) << "\n";
    }
    write_file(path, out.str());
}

}  // namespace

void run_train(const PipelineConfig& cfg) {
    cfg.learner.validate();
    ensure_out_dir(cfg.out_dir);
    QberSeries series = resolve_input_series(cfg);
    FoldSet folds = partition_folds(series, cfg.k, cfg.fold_mode);

    TrainResult res =
        algorithm2_train(series, folds, cfg.learner, derive_seed(cfg.seed, {kStageTrain}));

    fs::path dir(cfg.out_dir);
    std::string set_path = (dir / "categoryset.json").string();
    write_file(set_path, res.set.to_json().dump(2) + "\n");
    write_fold_table((dir / "train_pvalues.csv").string(), series, folds, res);
    write_fold_records((dir / "train_folds.csv").string(), res.set);

    write_manifest(cfg, "train", {{"series", input_hash(cfg, series)}},
                   {{"categoryset.json", hash_hex(hash_file(set_path))},
                    {"train_pvalues.csv",
                     hash_hex(hash_file((dir / "train_pvalues.csv").string()))},
                    {"train_folds.csv", hash_hex(hash_file((dir / "train_folds.csv").string()))}});
}

void run_test(const PipelineConfig& cfg) {
    cfg.learner.validate();
    ensure_out_dir(cfg.out_dir);
    QberSeries series = resolve_input_series(cfg);
    fs::path dir(cfg.out_dir);

    if (cfg.cv > 0) {
        CvOptions opt;
        opt.train_subfolds = cfg.train_subfolds;
        opt.test_subfolds = cfg.test_subfolds;
        auto reports =
            cross_validate(series, cfg.cv, cfg.learner, opt, derive_seed(cfg.seed, {kStageTest}));

        nlohmann::json j = nlohmann::json::array();
        std::ostringstream csv;
        csv << "cv_fold,c,p_value,aic\n";
        for (const auto& rep : reports) {
            nlohmann::json jr;
            jr["test_fold"] = rep.test_fold;
            jr["best_p"] = rep.best_p;
            jr["categories_trained"] = rep.trained.category_count();
            jr["curve"] = nlohmann::json::array();
            for (const auto& pt : rep.curve) {
                jr["curve"].push_back({{"c", pt.c}, {"p_value", pt.p_value}, {"aic", pt.aic}});
                csv << rep.test_fold << ',' << pt.c << ',' << fmt(pt.p_value) << ',' << fmt(pt.aic)
                    << "\n";
            }
            j.push_back(jr);
        }
        std::string rep_path = (dir / "cv_report.json").string();
        write_file(rep_path, j.dump(2) + "\n");
        write_file((dir / "cv_pvalues.csv").string(), csv.str());
        write_manifest(cfg, "test", {{"series", input_hash(cfg, series)}},
                       {{"cv_report.json", hash_hex(hash_file(rep_path))},
                        {"cv_pvalues.csv",
                         hash_hex(hash_file((dir / "cv_pvalues.csv").string()))}});
        return;
    }

    std::string trained_path = resolved_trained_path(cfg);
    CategorySet trained = load_categoryset(trained_path);
    FoldSet folds = partition_folds(series, cfg.z, cfg.fold_mode);
    TrainResult res =
        algorithm3_test(series, folds, trained, cfg.learner, derive_seed(cfg.seed, {kStageTest}));

    std::string set_path = (dir / "categoryset_test.json").string();
    write_file(set_path, res.set.to_json().dump(2) + "\n");
    write_fold_records((dir / "test_folds.csv").string(), res.set);

    // refined per-category curves against their accumulated data
    std::ostringstream csv;
    csv << "category,c,p_value,aic\n";
    for (const auto& cat : res.set.categories) {
        if (cat.member_folds.empty()) continue;
        std::vector<double> data;
        for (std::size_t f : cat.member_folds) {
            auto v = fold_values(series, folds, f);
            data.insert(data.end(), v.begin(), v.end());
        }
        for (const auto& fit : cat.fits)
            csv << cat.id << ',' << fit.c << ',' << fmt(fit.p_value) << ','
                << fmt(aic(fit.model, data)) << "\n";
    }
    write_file((dir / "test_pvalues.csv").string(), csv.str());

    write_manifest(cfg, "test",
                   {{"series", input_hash(cfg, series)},
                    {"trained", hash_hex(hash_file(trained_path))}},
                   {{"categoryset_test.json", hash_hex(hash_file(set_path))},
                    {"test_pvalues.csv",
                     hash_hex(hash_file((dir / "test_pvalues.csv").string()))},
                    {"test_folds.csv", hash_hex(hash_file((dir / "test_folds.csv").string()))}});
}

RiskReport run_risk(const PipelineConfig& cfg) {
    cfg.learner.validate();
    cfg.risk.validate();
    ensure_out_dir(cfg.out_dir);
    QberSeries series = resolve_input_series(cfg);

    std::string trained_path = resolved_trained_path(cfg);
    CategorySet trained = load_categoryset(trained_path);
    if (trained.categories.empty()) throw DataError("risk: trained category set is empty");

    const std::size_t n = series.size();
    if (n / cfg.risk.windows < static_cast<std::size_t>(cfg.learner.c_max))
        throw ConfigError("risk: windows too small (" + std::to_string(n / cfg.risk.windows) +
                          " samples) for c_max " + std::to_string(cfg.learner.c_max));
    FoldSet windows = partition_folds(series, cfg.risk.windows, FoldMode::Contiguous);

    // defense gates
    GateSet gates;
    gates.alpha_const = cfg.risk.alpha_const;
    gates.alpha_1m = cfg.risk.alpha_1m;
    if (cfg.risk.gate_mode == GateMode::PerCategory) {
        if (cfg.baseline_path.empty())
            throw ConfigError("risk: per-category gates need risk.baseline (an attack-free run)");
        GateSet cal = calibrate_gates(load_categoryset(cfg.baseline_path), cfg.risk);
        gates.alpha_per_category = cal.alpha_per_category;
        gates.alpha_const = cal.alpha_const;
    } else if (cfg.calibrate_from_baseline) {
        std::string base_path = cfg.baseline_path.empty() ? trained_path : cfg.baseline_path;
        GateSet cal = calibrate_gates(load_categoryset(base_path), cfg.risk);
        gates.alpha_per_category = cal.alpha_per_category;
        gates.alpha_const = cal.alpha_const;
    }

    RiskReport report;
    report.gates = gates;
    report.gate_mode = cfg.risk.gate_mode;

    const std::uint64_t seed = cfg.seed;
    const std::size_t H = trained.categories.size();
    for (std::size_t w = 0; w < windows.k(); ++w) {
        auto values = fold_values(series, windows, w);

        WindowRisk wr;
        wr.index = w;
        wr.begin = windows.folds[w].front();
        wr.end = windows.folds[w].back() + 1;

        // match against the trained categories in order
        std::size_t assigned = H - 1;
        for (std::size_t h = 0; h < H; ++h) {
            double p = category_match_pvalue(values, trained.categories[h], cfg.learner.t_training,
                                             derive_seed(seed, {kStageWindow, w, h}));
            if (p > cfg.learner.varsigma || h + 1 == H) {
                assigned = h;
                wr.match_p = p;
                break;
            }
        }
        const Category& cat = trained.categories[assigned];
        wr.category_id = cat.id;

        // local refit warm-started from the matched category
        auto fits = algorithm1_fit(values, cfg.learner, cfg.learner.t_training, &cat.fits,
                                   derive_seed(seed, {kStageWindowRefit, w}));
        double best_p = -1.0;
        const FitRecord* best = nullptr;
        for (const auto& f : fits) {
            if (f.p_value > best_p) {
                best_p = f.p_value;
                best = &f;
            }
        }
        wr.confidence = best_p;
        wr.best_c = best->c;

        if (cfg.risk.per_sample_eta) {
            double acc = 0.0;
            for (double x : values)
                acc += eta_posterior(best->model, wr.confidence,
                                     std::max(x, cfg.risk.eps_min));
            wr.eta = acc / static_cast<double>(values.size());
        } else {
            wr.eta = eta_posterior(best->model, wr.confidence, cfg.risk.eps_min);
        }
        wr.delta_eve = delta_eve(best->model, wr.confidence, cfg.risk.rho);
        wr.delta_var = delta_var(best->model, wr.confidence, cfg.risk.rho);

        for (std::size_t idx : windows.folds[w]) {
            const auto& s = series.samples[idx];
            if (s.attack_label && *s.attack_label) {
                wr.attacked = true;
                break;
            }
        }
        report.windows.push_back(std::move(wr));
    }

    PvPr rates = estimate_pv_pr(report.windows, gates, cfg.risk.gate_mode);
    report.p_v = rates.p_v;
    report.p_r = rates.p_r;

    auto weights = sample_risk_weights(report.windows.size(), cfg.risk.weighting,
                                       derive_seed(seed, {kStageWeights}));
    std::vector<double> gammas, etas, gate_series;
    double fit_prob = 0.0, total = 0.0;
    for (std::size_t w = 0; w < report.windows.size(); ++w) {
        WindowRisk& wr = report.windows[w];
        double gate = gates.eve_gate(wr.category_id, cfg.risk.gate_mode);
        wr.flag_v = bayes_classify(wr.eta, gate) == 1;
        wr.flag_r = bayes_classify(wr.eta, gates.alpha_1m) == 1;
        wr.gamma = risk_loss_gamma(wr.delta_eve, wr.delta_var, report.p_v, report.p_r,
                                   wr.confidence);
        wr.beta = risk_reduction_rate(wr.gamma);
        wr.weight = weights[w];
        gammas.push_back(wr.gamma);
        etas.push_back(wr.eta);
        gate_series.push_back(gate);
        double nw = static_cast<double>(wr.end - wr.begin);
        fit_prob += nw * wr.confidence;
        total += nw;
    }
    report.fit_prob = fit_prob / total;
    report.r_eps = risk_measure(gammas, weights);
    report.r_ref = risk_reference(gammas);
    report.trusted = trust_check(report.r_eps, report.r_ref);
    report.bound = eve_detection_bound(etas, gate_series, cfg.risk.varsigma, cfg.risk.varphi);

    fs::path dir(cfg.out_dir);
    std::string rep_path = (dir / "report.json").string();
    write_file(rep_path, report.to_json().dump(2) + "\n");
    report.save_windows_csv((dir / "windows.csv").string());

    write_manifest(cfg, "risk",
                   {{"series", input_hash(cfg, series)},
                    {"trained", hash_hex(hash_file(trained_path))}},
                   {{"report.json", hash_hex(hash_file(rep_path))},
                    {"windows.csv", hash_hex(hash_file((dir / "windows.csv").string()))}});
    return report;
}

std::string run_report(const std::string& run_dir, const std::string& compare_dir) {
    fs::path dir(run_dir);
    fs::path rep_path = dir / "report.json";
    if (!fs::exists(rep_path))
        throw DataError(run_dir + ": no report.json (run the risk stage first)");
    check_against_manifest(rep_path.string());
    RiskReport report = RiskReport::from_json(nlohmann::json::parse(read_file(rep_path.string())));

    auto mean_gamma = [](const RiskReport& r) {
        double s = 0.0;
        for (const auto& w : r.windows) s += w.gamma;
        return r.windows.empty() ? 0.0 : s / static_cast<double>(r.windows.size());
    };

    std::ostringstream out;
    out << "run: " << run_dir << "\n";
    out << "windows: " << report.windows.size() << "\n";
    out << "trusted: " << (report.trusted ? "yes" : "no")
        << "  (risk measure " << fmt(report.r_eps) << " vs reference " << fmt(report.r_ref)
        << ")\n";
    out << "P(V) = " << fmt(report.p_v) << "  P(R) = " << fmt(report.p_r) << "\n";
    out << "mean gamma = " << fmt(mean_gamma(report)) << "\n";
    out << "eve detection bound: psi >= " << fmt(report.bound.psi_lower)
        << "  (tau_upper " << fmt(report.bound.tau_upper) << ")\n";
    out << "gates: alpha = " << fmt(report.gates.alpha_const)
        << ", alpha_1m = " << fmt(report.gates.alpha_1m) << "\n";

    bool any_attacked = false;
    for (const auto& w : report.windows) any_attacked |= w.attacked;
    if (any_attacked) {
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (const auto& w : report.windows) {
            if (w.attacked && w.flag_v) ++tp;
            else if (!w.attacked && w.flag_v) ++fp;
            else if (w.attacked && !w.flag_v) ++fn;
            else ++tn;
        }
        out << "window confusion (eve gate vs labels): tp=" << tp << " fp=" << fp << " fn=" << fn
            << " tn=" << tn << "\n";
        if (tp + fn > 0)
            out << "event window recall = " << fmt(static_cast<double>(tp) / (tp + fn)) << "\n";
    }

    if (!compare_dir.empty()) {
        fs::path cmp_path = fs::path(compare_dir) / "report.json";
        if (!fs::exists(cmp_path))
            throw DataError(compare_dir + ": no report.json to compare against");
        RiskReport other =
            RiskReport::from_json(nlohmann::json::parse(read_file(cmp_path.string())));
        out << "\ncomparison with " << compare_dir << ":\n";
        out << "  metric, this_run, other_run\n";
        out << "  P(V), " << fmt(report.p_v) << ", " << fmt(other.p_v) << "\n";
        out << "  P(R), " << fmt(report.p_r) << ", " << fmt(other.p_r) << "\n";
        out << "  mean_gamma, " << fmt(mean_gamma(report)) << ", " << fmt(mean_gamma(other)) << "\n";
        out << "  r_eps, " << fmt(report.r_eps) << ", " << fmt(other.r_eps) << "\n";
        out << "  trusted, " << (report.trusted ? "yes" : "no") << ", "
            << (other.trusted ? "yes" : "no") << "\n";

        std::ostringstream csv;
        csv << "metric,this_run,other_run\n";
        csv << "p_v," << fmt(report.p_v) << ',' << fmt(other.p_v) << "\n";
        csv << "p_r," << fmt(report.p_r) << ',' << fmt(other.p_r) << "\n";
        csv << "mean_gamma," << fmt(mean_gamma(report)) << ',' << fmt(mean_gamma(other)) << "\n";
        csv << "r_eps," << fmt(report.r_eps) << ',' << fmt(other.r_eps) << "\n";
        csv << "r_ref," << fmt(report.r_ref) << ',' << fmt(other.r_ref) << "\n";
        write_file((dir / "comparison.csv").string(), csv.str());
    }

    std::string text = out.str();
    write_file((dir / "summary.txt").string(), text);
    return text;
}

}  // namespace qkdrisk
