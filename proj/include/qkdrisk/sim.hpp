#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkdrisk/series.hpp"

namespace qkdrisk {

// Time-variant channel model: Markov switching between Gaussian QBER
// regimes with geometric dwell times. The presets are synthetic; the
// figures they imitate publish no channel statistics, only qualitative
// distance ordering.
struct ChannelProfile {
    std::string name;
    std::vector<double> regime_means;   // each in (0, 0.11)
    std::vector<double> regime_sigmas;  // each > 0
    double regime_dwell = 2000.0;       // mean samples per regime
    double noise_floor = 5e-4;          // minimal sigma

    void validate() const;
};

struct AttackSpec {
    double upsilon_e = 500.0;  // mean inter-arrival in samples
    double qber_low = 0.05;
    double qber_high = 0.055;
    std::size_t duration = 1;  // samples per attack event

    void validate() const;
};

// n samples of regime-switched Gaussian QBER noise clamped to [0, 0.11],
// timestamps t0 + j*cadence, all attack labels false.
QberSeries simulate_qber_series(const ChannelProfile& profile, std::size_t n, std::uint64_t seed,
                                std::int64_t t0 = 0, std::int64_t cadence = 60);

// Returns a copy with Poisson-arriving attack events: onset gaps are
// exponential with mean upsilon_e samples, each event overwrites
// `duration` consecutive samples with U[qber_low, qber_high] draws and
// marks them attack_label = true.
QberSeries inject_trojan_attacks(const QberSeries& series, const AttackSpec& spec,
                                 std::uint64_t seed);

// "1m", "1km" or "30km".
ChannelProfile preset_profile(const std::string& name);
std::vector<ChannelProfile> profile_presets();

}  // namespace qkdrisk
