#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "p3rnn/signal.hpp"

namespace p3rnn {

struct SubjectProfile {
    double p300_latency_ms = 350;
    double latency_jitter_ms = 20;
    double p300_amplitude_uv = 10;
    double amplitude_jitter = 1.5;
    double p300_width_ms = 150; // Gaussian FWHM
    std::array<double, kNumElectrodes> electrode_gains{};
    double noise_std_uv = 4;
    double background_alpha_uv = 2;
    // Late bump added to non-target events (centered U(750,900) ms); 0 = off.
    double distractor_amplitude_uv = 0;
};

struct SynthConfig {
    int subjects = 1;
    int sessions_per_subject = 4;
    int runs_per_session = 6;
    int trials_per_run = 20;
    double isi_ms = 400;
    double flash_ms = 100;
    double sample_rate_hz = 512;
    uint64_t seed = 1;
};

struct SubjectOverrides {
    std::optional<double> p300_latency_ms;
    std::optional<double> latency_jitter_ms;
    std::optional<double> p300_amplitude_uv;
    std::optional<double> amplitude_jitter;
    std::optional<double> p300_width_ms;
    std::optional<double> noise_std_uv;
    std::optional<double> background_alpha_uv;
    std::optional<double> distractor_amplitude_uv;
    // Electrodes that receive the deflection at full gain (names from the
    // 10-20 montage). Default: Pz, P3, P4, Cz, O1, O2.
    std::optional<std::vector<std::string>> active_electrodes;
};

// Sub-stream tag for per-subject profile seeds: mix_seed(seed, subject, tag).
inline constexpr uint64_t kProfileSeedTag = 0x50524f46;

// Gaussian bump a*exp(-(t-latency)^2 / (2*sigma^2)), sigma = width/2.355,
// sampled over [0, duration_ms); the sample nearest the latency equals
// amplitude_uv exactly.
std::vector<double> p300_template(double latency_ms, double amplitude_uv, double width_ms,
                                  double sample_rate_hz, double duration_ms);

// Deterministic per seed: latency U(280,420) ms, amplitude U(5,15) uV, gains
// U(0.5,1) on the active subset and U(0,0.1) elsewhere.
SubjectProfile sample_subject(uint64_t seed, const SubjectOverrides& overrides = {});

// One session of the oddball paradigm: per run a random target image; per
// trial a random permutation of images 1..6 at ISI spacing. Recording is
// white noise + a 10 Hz rhythm (random phase per channel) + the P300 bump on
// target events, projected through electrode_gains. Deterministic given
// (cfg.seed, subject, session).
std::pair<Recording, StimulusSchedule> generate_session(const SubjectProfile& profile,
                                                        const SynthConfig& cfg, int subject,
                                                        int session);

} // namespace p3rnn
