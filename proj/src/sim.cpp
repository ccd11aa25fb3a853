#include "qkdrisk/sim.hpp"

#include <algorithm>
#include <cmath>

#include "qkdrisk/errors.hpp"
#include "qkdrisk/rng.hpp"

namespace qkdrisk {

namespace {
constexpr double kAbortCeiling = 0.11;
}

void ChannelProfile::validate() const {
    if (regime_means.empty() || regime_means.size() != regime_sigmas.size())
        throw ConfigError("profile '" + name + "': regime lists empty or of unequal length");
    for (double m : regime_means)
        if (!(m > 0.0 && m < kAbortCeiling))
            throw ConfigError("profile '" + name + "': regime mean outside (0, 0.11)");
    for (double s : regime_sigmas)
        if (!(s > 0.0)) throw ConfigError("profile '" + name + "': non-positive regime sigma");
    if (!(regime_dwell >= 1.0)) throw ConfigError("profile '" + name + "': dwell must be >= 1");
    if (!(noise_floor > 0.0)) throw ConfigError("profile '" + name + "': noise floor must be > 0");
}

void AttackSpec::validate() const {
    if (!(upsilon_e >= 1.0)) throw ConfigError("attack: upsilon_e must be >= 1");
    if (!(qber_low <= qber_high)) throw ConfigError("attack: qber_low must be <= qber_high");
    if (!(qber_low >= 0.0 && qber_high <= 1.0))
        throw ConfigError("attack: qber range outside [0,1]");
    if (duration < 1) throw ConfigError("attack: duration must be >= 1");
}

QberSeries simulate_qber_series(const ChannelProfile& profile, std::size_t n, std::uint64_t seed,
                                std::int64_t t0, std::int64_t cadence) {
    profile.validate();
    if (n < 1) throw ConfigError("simulate_qber_series: n must be >= 1");

    Rng rng(seed);
    const std::size_t regimes = profile.regime_means.size();
    std::size_t state = static_cast<std::size_t>(rng.u01() * static_cast<double>(regimes)) % regimes;
    const double switch_p = 1.0 / profile.regime_dwell;

    QberSeries series;
    series.channel_tag = profile.name;
    series.samples.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (regimes > 1 && rng.u01() < switch_p) {
            // jump to a uniformly chosen different regime
            std::size_t next =
                static_cast<std::size_t>(rng.u01() * static_cast<double>(regimes - 1));
            if (next >= state) ++next;
            state = next % regimes;
        }
        double sigma = std::max(profile.regime_sigmas[state], profile.noise_floor);
        double q = rng.normal(profile.regime_means[state], sigma);
        QberSample s;
        s.timestamp = t0 + static_cast<std::int64_t>(j) * cadence;
        s.qber = std::clamp(q, 0.0, kAbortCeiling);
        s.attack_label = false;
        series.samples.push_back(s);
    }
    return series;
}

QberSeries inject_trojan_attacks(const QberSeries& series, const AttackSpec& spec,
                                 std::uint64_t seed) {
    spec.validate();
    QberSeries out = series;
    Rng rng(seed);

    double pos = rng.exponential(spec.upsilon_e);
    while (pos < static_cast<double>(out.size())) {
        std::size_t onset = static_cast<std::size_t>(pos);
        for (std::size_t d = 0; d < spec.duration && onset + d < out.size(); ++d) {
            QberSample& s = out.samples[onset + d];
            s.qber = rng.uniform(spec.qber_low, spec.qber_high);
            s.attack_label = true;
        }
        pos += rng.exponential(spec.upsilon_e);
    }
    // injection marks labels; untouched samples keep label false
    for (auto& s : out.samples)
        if (!s.attack_label) s.attack_label = false;
    return out;
}

ChannelProfile preset_profile(const std::string& name) {
    ChannelProfile p;
    p.name = name;
    if (name == "1m") {
        p.regime_means = {0.009, 0.011};
        p.regime_sigmas = {0.0018, 0.0022};
        p.regime_dwell = 4000.0;
        p.noise_floor = 8e-4;
    } else if (name == "1km") {
        p.regime_means = {0.013, 0.0155, 0.018};
        p.regime_sigmas = {0.0024, 0.0028, 0.0032};
        p.regime_dwell = 2500.0;
        p.noise_floor = 9e-4;
    } else if (name == "30km") {
        p.regime_means = {0.019, 0.0235, 0.028};
        p.regime_sigmas = {0.003, 0.0035, 0.004};
        p.regime_dwell = 2000.0;
        p.noise_floor = 1e-3;
    } else {
        throw ConfigError("unknown channel profile '" + name + "' (expected 1m, 1km or 30km)");
    }
    p.validate();
    return p;
}

std::vector<ChannelProfile> profile_presets() {
    return {preset_profile("1m"), preset_profile("1km"), preset_profile("30km")};
}

}  // namespace qkdrisk
