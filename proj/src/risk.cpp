#include "qkdrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qkdrisk/errors.hpp"
#include "qkdrisk/rng.hpp"

namespace qkdrisk {

void RiskConfig::validate() const {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("risk: rho must be in (0,1)");
    if (!(varsigma > 0.0 && varsigma < 1.0)) throw ConfigError("risk: varsigma must be in (0,1)");
    if (!(eps_min >= 0.0 && eps_min <= eps_max && eps_max <= 1.0))
        throw ConfigError("risk: need 0 <= eps_min <= eps_max <= 1");
    if (alpha_const < 0.0 || alpha_1m < 0.0) throw ConfigError("risk: gates must be >= 0");
    if (!(varphi > 0.0)) throw ConfigError("risk: varphi must be > 0");
    if (windows < 1) throw ConfigError("risk: window count must be >= 1");
    if (!(weighting.mean_low >= 0.0 && weighting.mean_low <= weighting.mean_high))
        throw ConfigError("risk: bad weighting mean range");
    if (weighting.m_draws < 1) throw ConfigError("risk: weighting m_draws must be >= 1");
}

double GateSet::eve_gate(int category_id, GateMode mode) const {
    if (mode == GateMode::Constant) return alpha_const;
    for (const auto& [id, gate] : alpha_per_category)
        if (id == category_id) return gate;
    return alpha_const;  // unknown category falls back to the constant gate
}

double fit_confidence(const Category& category) {
    return category.best_p();
}

double category_weight(const Category& category, std::size_t total_samples) {
    if (total_samples == 0) throw DataError("category_weight: zero total samples");
    return static_cast<double>(category.sample_count) / static_cast<double>(total_samples);
}

double delta_eve(const GmmModel& model, double confidence, double rho) {
    return gmm_tail(model, rho) * confidence;
}

double delta_var(const GmmModel& model, double confidence, double rho) {
    return gmm_tail(model, rho) * confidence;
}

double eta_posterior(const GmmModel& model, double confidence, double eps_min) {
    return confidence * gmm_tail(model, eps_min);
}

double eta_posterior(const Category& category, double eps_min) {
    return eta_posterior(category.best_model(), fit_confidence(category), eps_min);
}

GateSet calibrate_gates(const CategorySet& baseline, const RiskConfig& cfg) {
    if (baseline.categories.empty()) throw DataError("calibrate_gates: empty baseline");
    GateSet gates;
    gates.alpha_1m = cfg.alpha_1m;
    double max_dvar = 0.0;
    for (const auto& cat : baseline.categories) {
        double dv = delta_var(cat.best_model(), fit_confidence(cat), cfg.rho);
        gates.alpha_per_category.emplace_back(cat.id, dv);
        max_dvar = std::max(max_dvar, dv);
    }
    gates.alpha_const = max_dvar;
    return gates;
}

int bayes_classify(double eta, double gate) {
    return eta > gate ? 1 : 0;
}

PvPr estimate_pv_pr(const std::vector<WindowRisk>& windows, const GateSet& gates, GateMode mode) {
    if (windows.empty()) throw DataError("estimate_pv_pr: no windows");
    double flagged_v = 0.0, flagged_r = 0.0, total = 0.0;
    for (const auto& w : windows) {
        double n = static_cast<double>(w.end - w.begin);
        total += n;
        if (bayes_classify(w.eta, gates.eve_gate(w.category_id, mode))) flagged_v += n;
        if (bayes_classify(w.eta, gates.alpha_1m)) flagged_r += n;
    }
    if (total <= 0.0) throw DataError("estimate_pv_pr: windows cover no samples");
    return {flagged_v / total, flagged_r / total};
}

double risk_loss_gamma(double d_eve, double d_var, double p_v, double p_r, double fit) {
    return (d_eve * p_v + d_var * p_r - d_eve * d_var * p_v) * fit;
}

double risk_measure(std::span<const double> gamma, std::span<const double> weights) {
    if (gamma.size() != weights.size()) throw DataError("risk_measure: length mismatch");
    if (gamma.empty()) throw DataError("risk_measure: empty series");
    double s = 0.0;
    for (std::size_t j = 0; j < gamma.size(); ++j) s += weights[j] * gamma[j];
    return s / static_cast<double>(gamma.size());
}

double risk_reference(std::span<const double> gamma) {
    if (gamma.empty()) throw DataError("risk_reference: empty series");
    double s = 0.0;
    for (double g : gamma) s += (1.0 - g) * g;
    return s / static_cast<double>(gamma.size());
}

double risk_reduction_rate(double gamma) {
    return std::clamp(gamma, 0.0, 1.0) * 100.0;
}

bool trust_check(double r_eps, double r_ref) {
    return r_eps <= r_ref;
}

DetectionBound eve_detection_bound(std::span<const double> eta, std::span<const double> gate,
                                   double varsigma, double varphi) {
    if (!(varphi > 0.0)) throw ConfigError("eve_detection_bound: varphi must be > 0");
    if (eta.size() != gate.size() || eta.empty())
        throw DataError("eve_detection_bound: eta and gate series must align");
    double e_plus = 0.0, e_minus = 0.0;
    for (std::size_t j = 0; j < eta.size(); ++j) {
        e_plus += std::max(eta[j] - gate[j], 0.0);
        e_minus += std::max(gate[j] - eta[j], 0.0);
    }
    e_plus /= static_cast<double>(eta.size());
    e_minus /= static_cast<double>(eta.size());

    DetectionBound b;
    b.tau_upper_raw = (e_plus + e_minus) / varphi;
    b.tau_upper = std::clamp(b.tau_upper_raw, 0.0, 1.0);
    b.psi_lower = 1.0 - b.tau_upper * (1.0 - varsigma) / 2.0;
    return b;
}

std::vector<double> sample_risk_weights(std::size_t n_epochs, const RiskWeightSpec& spec,
                                        std::uint64_t seed) {
    if (n_epochs < 1 || spec.m_draws < 1)
        throw ConfigError("sample_risk_weights: n_epochs and m_draws must be >= 1");
    std::vector<double> out;
    out.reserve(n_epochs);
    for (std::size_t j = 0; j < n_epochs; ++j) {
        Rng rng(derive_seed(seed, {11, j}));
        double mean = rng.uniform(spec.mean_low, spec.mean_high);
        double acc = 0.0;
        for (int i = 0; i < spec.m_draws; ++i)
            acc += std::clamp(rng.normal(mean, mean), 0.0, 1.0);
        out.push_back(acc / static_cast<double>(spec.m_draws));
    }
    return out;
}

nlohmann::json RiskReport::to_json() const {
    nlohmann::json j;
    j["p_v"] = p_v;
    j["p_r"] = p_r;
    j["r_eps"] = r_eps;
    j["r_ref"] = r_ref;
    j["trusted"] = trusted;
    j["fit_prob"] = fit_prob;
    j["tau_upper"] = bound.tau_upper;
    j["tau_upper_raw"] = bound.tau_upper_raw;
    j["psi_lower"] = bound.psi_lower;
    j["gate_mode"] = gate_mode == GateMode::Constant ? "constant" : "per_category";
    j["gates"] = {{"alpha_const", gates.alpha_const}, {"alpha_1m", gates.alpha_1m}};
    j["gates"]["alpha_per_category"] = nlohmann::json::array();
    for (const auto& [id, g] : gates.alpha_per_category)
        j["gates"]["alpha_per_category"].push_back({{"category", id}, {"alpha", g}});
    j["windows"] = nlohmann::json::array();
    for (const auto& w : windows) {
        j["windows"].push_back({{"index", w.index},
                                {"begin", w.begin},
                                {"end", w.end},
                                {"category", w.category_id},
                                {"match_p", w.match_p},
                                {"confidence", w.confidence},
                                {"best_c", w.best_c},
                                {"eta", w.eta},
                                {"delta_eve", w.delta_eve},
                                {"delta_var", w.delta_var},
                                {"gamma", w.gamma},
                                {"beta", w.beta},
                                {"weight", w.weight},
                                {"flag_v", w.flag_v},
                                {"flag_r", w.flag_r},
                                {"attacked", w.attacked}});
    }
    return j;
}

RiskReport RiskReport::from_json(const nlohmann::json& j) {
    RiskReport r;
    r.p_v = j.at("p_v").get<double>();
    r.p_r = j.at("p_r").get<double>();
    r.r_eps = j.at("r_eps").get<double>();
    r.r_ref = j.at("r_ref").get<double>();
    r.trusted = j.at("trusted").get<bool>();
    r.fit_prob = j.at("fit_prob").get<double>();
    r.bound.tau_upper = j.at("tau_upper").get<double>();
    r.bound.tau_upper_raw = j.at("tau_upper_raw").get<double>();
    r.bound.psi_lower = j.at("psi_lower").get<double>();
    r.gate_mode = j.at("gate_mode").get<std::string>() == "per_category" ? GateMode::PerCategory
                                                                         : GateMode::Constant;
    r.gates.alpha_const = j.at("gates").at("alpha_const").get<double>();
    r.gates.alpha_1m = j.at("gates").at("alpha_1m").get<double>();
    for (const auto& jg : j.at("gates").at("alpha_per_category"))
        r.gates.alpha_per_category.emplace_back(jg.at("category").get<int>(),
                                                jg.at("alpha").get<double>());
    for (const auto& jw : j.at("windows")) {
        WindowRisk w;
        w.index = jw.at("index").get<std::size_t>();
        w.begin = jw.at("begin").get<std::size_t>();
        w.end = jw.at("end").get<std::size_t>();
        w.category_id = jw.at("category").get<int>();
        w.match_p = jw.at("match_p").get<double>();
        w.confidence = jw.at("confidence").get<double>();
        w.best_c = jw.at("best_c").get<int>();
        w.eta = jw.at("eta").get<double>();
        w.delta_eve = jw.at("delta_eve").get<double>();
        w.delta_var = jw.at("delta_var").get<double>();
        w.gamma = jw.at("gamma").get<double>();
        w.beta = jw.at("beta").get<double>();
        w.weight = jw.at("weight").get<double>();
        w.flag_v = jw.at("flag_v").get<bool>();
        w.flag_r = jw.at("flag_r").get<bool>();
        w.attacked = jw.at("attacked").get<bool>();
        r.windows.push_back(w);
    }
    return r;
}

void RiskReport::save_windows_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "window_index,category,eta,gamma,flag\n";
    for (const auto& w : windows) {
        out << w.index << ',' << w.category_id << ',' << w.eta << ',' << w.gamma << ','
            << (w.flag_v ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace qkdrisk
