#include "p3rnn/synth.hpp"

#include <algorithm>
#include <cmath>

#include "p3rnn/rng.hpp"

namespace p3rnn {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

const std::vector<std::string>& default_active_electrodes() {
    static const std::vector<std::string> names = {"Pz", "P3", "P4", "Cz", "O1", "O2"};
    return names;
}

// Adds tpl scaled by per-channel gains into the recording at start_sample.
void add_projected(Mat& samples, const std::vector<double>& tpl,
                   const std::array<double, kNumElectrodes>& gains, long start_sample) {
    const long n = static_cast<long>(samples.rows);
    for (size_t k = 0; k < tpl.size(); ++k) {
        const long t = start_sample + static_cast<long>(k);
        if (t < 0 || t >= n) continue;
        double* row = samples.row(t);
        for (int ch = 0; ch < kNumElectrodes; ++ch) row[ch] += gains[ch] * tpl[k];
    }
}

} // namespace

std::vector<double> p300_template(double latency_ms, double amplitude_uv, double width_ms,
                                  double sample_rate_hz, double duration_ms) {
    if (!(latency_ms > 0) || !(width_ms > 0) || !(sample_rate_hz > 0) || !(duration_ms > 0) ||
        amplitude_uv < 0)
        throw InputError("p300_template: arguments must be positive");
    if (!(latency_ms < duration_ms))
        throw InputError("p300_template: latency " + fmt_g(latency_ms, 9) +
                         " ms must fall inside the " + fmt_g(duration_ms, 9) + " ms duration");

    const long n = std::lround(duration_ms * sample_rate_hz / 1000.0);
    const long peak = std::lround(latency_ms * sample_rate_hz / 1000.0);
    const double sigma = (width_ms / 2.355) * sample_rate_hz / 1000.0; // in samples
    std::vector<double> out(n);
    for (long k = 0; k < n; ++k) {
        const double d = static_cast<double>(k - peak);
        out[k] = amplitude_uv * std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return out;
}

SubjectProfile sample_subject(uint64_t seed, const SubjectOverrides& ov) {
    Rng rng(seed);
    SubjectProfile p;
    p.p300_latency_ms = rng.uniform(280.0, 420.0);
    p.p300_amplitude_uv = rng.uniform(5.0, 15.0);

    std::array<bool, kNumElectrodes> active{};
    const auto& names = ov.active_electrodes ? *ov.active_electrodes : default_active_electrodes();
    for (const std::string& name : names) {
        const int i = electrode_index(name);
        if (i < 0) throw InputError("sample_subject: unknown electrode '" + name + "'");
        active[i] = true;
    }
    for (int i = 0; i < kNumElectrodes; ++i)
        p.electrode_gains[i] = active[i] ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.1);

    if (ov.p300_latency_ms) p.p300_latency_ms = *ov.p300_latency_ms;
    if (ov.latency_jitter_ms) p.latency_jitter_ms = *ov.latency_jitter_ms;
    if (ov.p300_amplitude_uv) p.p300_amplitude_uv = *ov.p300_amplitude_uv;
    if (ov.amplitude_jitter) p.amplitude_jitter = *ov.amplitude_jitter;
    if (ov.p300_width_ms) p.p300_width_ms = *ov.p300_width_ms;
    if (ov.noise_std_uv) p.noise_std_uv = *ov.noise_std_uv;
    if (ov.background_alpha_uv) p.background_alpha_uv = *ov.background_alpha_uv;
    if (ov.distractor_amplitude_uv) p.distractor_amplitude_uv = *ov.distractor_amplitude_uv;
    return p;
}

std::pair<Recording, StimulusSchedule> generate_session(const SubjectProfile& profile,
                                                        const SynthConfig& cfg, int subject,
                                                        int session) {
    if (cfg.runs_per_session < 1 || cfg.trials_per_run < 1)
        throw InputError("generate_session: counts must be >= 1");
    if (!(cfg.isi_ms >= cfg.flash_ms))
        throw InputError("generate_session: isi_ms must be >= flash_ms");

    Rng rng(mix_seed(cfg.seed, static_cast<uint64_t>(subject), static_cast<uint64_t>(session)));
    const double fs = cfg.sample_rate_hz;
    const double isi_s = cfg.isi_ms / 1000.0;
    const double lead_in_s = 1.0;
    const double run_gap_s = 2.0;
    const int events_per_trial = 6;

    // Draw order is fixed: schedule, channel phases, noise, per-event bumps.
    StimulusSchedule sched;
    double t0 = lead_in_s;
    for (int run = 1; run <= cfg.runs_per_session; ++run) {
        const int target_image = 1 + static_cast<int>(rng.uniform_int(6));
        int idx_in_run = 0;
        for (int trial = 1; trial <= cfg.trials_per_run; ++trial) {
            std::vector<int> perm = {1, 2, 3, 4, 5, 6};
            rng.shuffle(perm);
            for (int img : perm) {
                StimEvent e;
                e.onset_s = t0 + idx_in_run * isi_s;
                e.image_id = img;
                e.is_target = (img == target_image);
                e.run = run;
                e.trial = trial;
                sched.events.push_back(e);
                ++idx_in_run;
            }
        }
        t0 += cfg.trials_per_run * events_per_trial * isi_s + run_gap_s;
    }

    const double last_onset = sched.events.back().onset_s;
    const size_t n = static_cast<size_t>(std::llround((last_onset + 1.5) * fs));

    Recording rec;
    rec.sample_rate_hz = fs;
    rec.channel_names = electrode_names();
    rec.samples = Mat(n, kNumElectrodes);

    std::array<double, kNumElectrodes> phase;
    for (double& ph : phase) ph = rng.uniform(0.0, kTwoPi);

    for (int ch = 0; ch < kNumElectrodes; ++ch) {
        const double w = kTwoPi * 10.0 / fs;
        for (size_t t = 0; t < n; ++t) {
            double v = profile.background_alpha_uv * std::sin(w * t + phase[ch]);
            if (profile.noise_std_uv > 0) v += rng.normal(0.0, profile.noise_std_uv);
            rec.samples.at(t, ch) = v;
        }
    }

    for (const StimEvent& e : sched.events) {
        const long s0 = std::llround(e.onset_s * fs);
        if (e.is_target) {
            double lat = profile.p300_latency_ms;
            if (profile.latency_jitter_ms > 0) lat += rng.normal(0.0, profile.latency_jitter_ms);
            lat = std::clamp(lat, 1.0, 999.0);
            double amp = profile.p300_amplitude_uv;
            if (profile.amplitude_jitter > 0) amp += rng.normal(0.0, profile.amplitude_jitter);
            amp = std::max(0.0, amp);
            if (amp > 0)
                add_projected(rec.samples,
                              p300_template(lat, amp, profile.p300_width_ms, fs, 1000.0),
                              profile.electrode_gains, s0);
        } else if (profile.distractor_amplitude_uv > 0) {
            const double lat = rng.uniform(750.0, 900.0);
            add_projected(rec.samples,
                          p300_template(lat, profile.distractor_amplitude_uv,
                                        profile.p300_width_ms, fs, 1000.0),
                          profile.electrode_gains, s0);
        }
    }

    return {std::move(rec), std::move(sched)};
}

} // namespace p3rnn
