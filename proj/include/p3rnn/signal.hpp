#pragma once

#include <string>
#include <vector>

#include "p3rnn/common.hpp"

namespace p3rnn {

struct Biquad {
    double b0, b1, b2; // numerator
    double a1, a2;     // denominator, a0 normalized to 1
};

struct BiquadCascade {
    std::vector<Biquad> sections;
    struct {
        double low_hz = 0, high_hz = 0, sample_rate_hz = 0;
        int prototype_order = 0;
    } design_meta;
};

struct Recording {
    double sample_rate_hz = 0;
    std::vector<std::string> channel_names; // 32 labels
    Mat samples;                            // n_samples x 32, time-major, microvolts
};

struct StimEvent {
    double onset_s = 0;
    int image_id = 0; // 1..6
    bool is_target = false;
    int run = 0;
    int trial = 0;
};

struct StimulusSchedule {
    std::vector<StimEvent> events;
};

struct WindowMeta {
    int subject = 0, session = 0, run = 0, trial = 0, image_id = 0;
};

struct EEGWindow {
    Mat data;     // kWindowSteps x kNumElectrodes (rows = timesteps)
    int label = 0; // 1 target, 0 nontarget
    WindowMeta meta;
};

// Butterworth bandpass of overall order 2*prototype_order: analog lowpass
// prototype -> bandpass transform -> bilinear transform with prewarping,
// poles paired into conjugate second-order sections.
BiquadCascade design_bandpass(double low_hz, double high_hz, double sample_rate_hz,
                              int prototype_order);

// Complex magnitude of the cascade at frequency hz (single pass).
double cascade_magnitude(const BiquadCascade& c, double hz);

// Single forward pass, zero initial state (direct form II transposed).
std::vector<double> sosfilt(const BiquadCascade& c, const std::vector<double>& x);

// Forward-backward pass with odd-reflection padding of
// 3*(2*overall_order + 1) samples per end; zero-phase, |H|^2 magnitude.
std::vector<double> filtfilt(const BiquadCascade& c, const std::vector<double>& x);

// out[k] = x[k*factor]; keeps the first sample.
std::vector<double> decimate(const std::vector<double>& x, int factor);

// Checks ordering, per-trial target/image-id structure and uniform ISI
// spacing (each within-run gap equal to the inferred ISI within one sample
// at source_rate_hz). Throws InputError on violation.
void validate_schedule(const StimulusSchedule& s, double source_rate_hz);

// Cuts one 32x32 window per event from a 32 Hz recording, starting at the
// sample nearest the onset. subject/session fill the window provenance
// (the file formats carry them; Recording itself does not).
std::vector<EEGWindow> extract_windows(const Recording& recording32,
                                       const StimulusSchedule& schedule,
                                       int subject = 0, int session = 0);

// Per-channel filtfilt, decimate to 32 Hz, then extract_windows.
std::vector<EEGWindow> preprocess_recording(const Recording& recording,
                                            const StimulusSchedule& schedule,
                                            const BiquadCascade& cascade,
                                            int subject = 0, int session = 0);

} // namespace p3rnn
