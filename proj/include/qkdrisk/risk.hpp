#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qkdrisk/gmm.hpp"
#include "qkdrisk/learner.hpp"

namespace qkdrisk {

// Per-epoch risk-control weighting: the epoch mean is uniform on
// [mean_low, mean_high], individual draws are normal with sigma equal to
// that mean, clamped to [0, 1], and the epoch weight is their average.
struct RiskWeightSpec {
    double mean_low = 0.5;
    double mean_high = 1.0;
    int m_draws = 64;
};

enum class GateMode { Constant, PerCategory };

struct RiskConfig {
    double rho = 0.05;        // maximum tolerant bit error rate
    double varsigma = 0.95;   // KS acceptance threshold
    GateMode gate_mode = GateMode::Constant;
    double alpha_const = 0.002;   // constant defense gate (0.2%)
    double alpha_1m = 1e-5;       // time-variance gate (0.001%)
    double eps_min = 0.05;        // minimum eavesdrop QBER
    double eps_max = 0.055;
    double varphi = 0.01;         // detection margin
    bool per_sample_eta = false;  // per-sample tail variant of the posterior
    std::size_t windows = 48;     // evaluation windows per run
    RiskWeightSpec weighting;

    void validate() const;
};

struct GateSet {
    std::vector<std::pair<int, double>> alpha_per_category;  // (category id, gate)
    double alpha_const = 0.002;
    double alpha_1m = 1e-5;

    double eve_gate(int category_id, GateMode mode) const;
};

// One evaluation window of the risk pipeline.
struct WindowRisk {
    std::size_t index = 0;
    std::size_t begin = 0;  // sample range [begin, end)
    std::size_t end = 0;
    int category_id = 0;
    double match_p = 0.0;      // match score against the assigned category
    double confidence = 0.0;   // best fit P-value of the window's refit
    int best_c = 0;
    double eta = 0.0;
    double delta_eve = 0.0;
    double delta_var = 0.0;
    double gamma = 0.0;
    double beta = 0.0;    // percent
    double weight = 1.0;  // H_Mj
    bool flag_v = false;
    bool flag_r = false;
    bool attacked = false;  // ground truth, when labels exist
};

struct DetectionBound {
    double tau_upper_raw = 0.0;  // (E(phi+) + E(phi-)) / varphi, unclamped
    double tau_upper = 0.0;      // clamped to [0,1] for the Psi formula
    double psi_lower = 1.0;      // 1 - tau_upper (1 - varsigma) / 2
};

struct RiskReport {
    std::vector<WindowRisk> windows;
    double p_v = 0.0;
    double p_r = 0.0;
    double r_eps = 0.0;
    double r_ref = 0.0;
    bool trusted = true;
    double fit_prob = 0.0;  // sample-weighted aggregate fit confidence
    DetectionBound bound;
    GateSet gates;
    GateMode gate_mode = GateMode::Constant;

    nlohmann::json to_json() const;
    static RiskReport from_json(const nlohmann::json& j);

    // window_index,category,eta,gamma,flag
    void save_windows_csv(const std::string& path) const;
};

// Best KS P-value of the category, the proxy for P(eps = eps_hat | Q_hat).
double fit_confidence(const Category& category);

// N_i / N.
double category_weight(const Category& category, std::size_t total_samples);

// Posterior of an eavesdropping event given the abort threshold:
// tail mass above rho scaled by the fit confidence.
double delta_eve(const GmmModel& model, double confidence, double rho);

// Same functional form conditioned on the time-variation event.
double delta_var(const GmmModel& model, double confidence, double rho);

// Posterior eta: confidence times the model mass above eps_min.
double eta_posterior(const GmmModel& model, double confidence, double eps_min);
double eta_posterior(const Category& category, double eps_min);

// Defense gates from an attack-free baseline: constant mode takes the
// maximal per-category delta_var, per-category mode keeps each one.
GateSet calibrate_gates(const CategorySet& baseline, const RiskConfig& cfg);

// 1 iff eta exceeds the gate; the tie resolves to no alarm.
int bayes_classify(double eta, double gate);

struct PvPr {
    double p_v = 0.0;
    double p_r = 0.0;
};

// Sample-weighted flagged fractions under the Eve gate and the
// time-variance gate.
PvPr estimate_pv_pr(const std::vector<WindowRisk>& windows, const GateSet& gates, GateMode mode);

// gamma = [d_eve P(V) + d_var P(R) - d_eve d_var P(V)] * fit, all in [0,1].
double risk_loss_gamma(double d_eve, double d_var, double p_v, double p_r, double fit);

// (1/N) sum H_j gamma_j.
double risk_measure(std::span<const double> gamma, std::span<const double> weights);

// (1/N) sum (1 - gamma_j) gamma_j; never exceeds 0.25.
double risk_reference(std::span<const double> gamma);

// gamma as a percentage, clamped to [0, 100].
double risk_reduction_rate(double gamma);

// Trust condition: risk measure does not exceed the risk reference.
bool trust_check(double r_eps, double r_ref);

// Markov-style detection bound from the aligned eta/gate series.
DetectionBound eve_detection_bound(std::span<const double> eta, std::span<const double> gate,
                                   double varsigma, double varphi);

// H_Mj series for n_epochs epochs.
std::vector<double> sample_risk_weights(std::size_t n_epochs, const RiskWeightSpec& spec,
                                        std::uint64_t seed);

}  // namespace qkdrisk
