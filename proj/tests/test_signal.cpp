#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "p3rnn/io.hpp"
#include "p3rnn/rng.hpp"
#include "p3rnn/signal.hpp"
#include "p3rnn/synth.hpp"

using namespace p3rnn;

namespace {

// Largest pole modulus of a biquad denominator z^2 + a1 z + a2.
double max_pole_modulus(const Biquad& s) {
    const std::complex<double> a1(s.a1, 0.0), a2(s.a2, 0.0);
    const std::complex<double> disc = std::sqrt(a1 * a1 - 4.0 * a2);
    return std::max(std::abs((-a1 + disc) / 2.0), std::abs((-a1 - disc) / 2.0));
}

std::vector<double> sine(double hz, double fs, double seconds, double amp = 1.0) {
    std::vector<double> x(static_cast<size_t>(seconds * fs));
    for (size_t n = 0; n < x.size(); ++n)
        x[n] = amp * std::sin(2.0 * M_PI * hz * static_cast<double>(n) / fs);
    return x;
}

Recording flat_recording(double fs, size_t n, double value = 0.0) {
    Recording rec;
    rec.sample_rate_hz = fs;
    rec.channel_names = electrode_names();
    rec.samples = Mat(n, kNumElectrodes, value);
    return rec;
}

StimulusSchedule grid_schedule(int runs, int trials, double isi_s = 0.4,
                               double lead_in_s = 1.0, double run_gap_s = 2.0) {
    StimulusSchedule s;
    double t0 = lead_in_s;
    for (int r = 1; r <= runs; ++r) {
        for (int tr = 1; tr <= trials; ++tr) {
            for (int k = 0; k < 6; ++k) {
                StimEvent e;
                e.onset_s = t0 + k * isi_s;
                e.image_id = k + 1;
                e.is_target = k == 2; // one target per trial
                e.run = r;
                e.trial = tr;
                s.events.push_back(e);
            }
            t0 += 6 * isi_s;
        }
        t0 += run_gap_s;
    }
    return s;
}

} // namespace

TEST_CASE("design_bandpass hits the 1/sqrt(2) cutoffs (cross-checked design)") {
    const BiquadCascade f = design_bandpass(1.0, 12.0, 2048.0, 3);
    CHECK(f.sections.size() == 3);
    // scipy.signal.butter(3, [1,12], 'bandpass', fs=2048) gives |H| at the
    // cutoffs of 0.707106781 and these magnitudes elsewhere; frozen here.
    CHECK(cascade_magnitude(f, 1.0) == doctest::Approx(0.70710678).epsilon(1e-6));
    CHECK(cascade_magnitude(f, 12.0) == doctest::Approx(0.70710678).epsilon(1e-6));
    CHECK(cascade_magnitude(f, std::sqrt(12.0)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cascade_magnitude(f, 512.0) == doctest::Approx(4.80656773759e-06).epsilon(1e-5));
    CHECK(cascade_magnitude(f, 0.0) == 0.0);
}

TEST_CASE("designed cascades share the scipy denominators at 512 Hz") {
    // scipy second-order-section denominators for butter(3, [1,12], fs=512),
    // order-independent comparison on sorted a2.
    const BiquadCascade f = design_bandpass(1.0, 12.0, 512.0, 3);
    REQUIRE(f.sections.size() == 3);
    std::vector<std::pair<double, double>> got;
    for (const Biquad& s : f.sections) got.push_back({s.a2, s.a1});
    std::sort(got.begin(), got.end());
    const double want[3][2] = {{0.873364607733903, -1.8716695357598083},
                               {0.8835995058997154, -1.8644992305725154},
                               {0.9890276182632469, -1.9888677031648254}};
    for (int i = 0; i < 3; ++i) {
        CHECK(got[i].first == doctest::Approx(want[i][0]).epsilon(1e-12));
        CHECK(got[i].second == doctest::Approx(want[i][1]).epsilon(1e-12));
    }
}

TEST_CASE("designed cascades are stable and reject bad frequencies") {
    for (double fs : {128.0, 512.0, 2048.0}) {
        const BiquadCascade f = design_bandpass(1.0, 12.0, fs, 3);
        for (const Biquad& s : f.sections) CHECK(max_pole_modulus(s) < 1.0);
    }
    const BiquadCascade f4 = design_bandpass(2.0, 30.0, 256.0, 4);
    CHECK(f4.sections.size() == 4);
    for (const Biquad& s : f4.sections) CHECK(max_pole_modulus(s) < 1.0);

    CHECK_THROWS_AS(design_bandpass(12.0, 1.0, 512.0, 3), InputError);
    CHECK_THROWS_AS(design_bandpass(1.0, 300.0, 512.0, 3), InputError);
    CHECK_THROWS_AS(design_bandpass(0.0, 12.0, 512.0, 3), InputError);
    CHECK_THROWS_AS(design_bandpass(1.0, 12.0, 512.0, 0), InputError);
}

TEST_CASE("filtfilt basics: zero input, DC rejection, short input error") {
    const BiquadCascade f = design_bandpass(1.0, 12.0, 2048.0, 3);

    std::vector<double> zeros(4096, 0.0);
    for (double v : filtfilt(f, zeros)) CHECK(v == 0.0);

    // The 1 Hz corner's start-up transient decays over seconds, so the
    // constant input needs a long stretch before the middle runs clean.
    std::vector<double> dc(24576, 5.0);
    const auto y = filtfilt(f, dc);
    CHECK(y.size() == dc.size());
    double mid_max = 0;
    for (size_t i = y.size() / 4; i < 3 * y.size() / 4; ++i)
        mid_max = std::max(mid_max, std::abs(y[i]));
    CHECK(mid_max < 1e-3 * 5.0);

    std::vector<double> tiny(39, 1.0); // pad length is 39 for order 6
    CHECK_THROWS_AS(filtfilt(f, tiny), InputError);
    std::vector<double> ok(40, 1.0);
    CHECK_NOTHROW(filtfilt(f, ok));
}

TEST_CASE("filtfilt passes a 6 Hz sine at unit gain with zero lag") {
    const BiquadCascade f = design_bandpass(1.0, 12.0, 512.0, 3);
    const auto x = sine(6.0, 512.0, 8.0);
    const auto y = filtfilt(f, x);
    REQUIRE(y.size() == x.size());

    double amp = 0;
    for (size_t i = x.size() / 4; i < 3 * x.size() / 4; ++i) amp = std::max(amp, std::abs(y[i]));
    CHECK(amp > 0.95);
    CHECK(amp < 1.05);

    // cross-correlation over the middle section, lags -8..8 samples
    const size_t lo = x.size() / 4, hi = 3 * x.size() / 4;
    int best_lag = -99;
    double best = -1e300;
    for (int lag = -8; lag <= 8; ++lag) {
        double c = 0;
        for (size_t i = lo; i < hi; ++i) c += x[i] * y[i + lag];
        if (c > best) {
            best = c;
            best_lag = lag;
        }
    }
    CHECK(best_lag == 0);
}

TEST_CASE("filtfilt is zero-phase and linear") {
    // Reversal symmetry only holds where both edge transients have died out,
    // so use a band whose slowest pole decays fast and compare mid-signal.
    const BiquadCascade f = design_bandpass(4.0, 32.0, 128.0, 3);
    Rng rng(21);
    std::vector<double> x(2048), y(2048);
    for (auto& v : x) v = rng.normal(0.0, 1.0);
    for (auto& v : y) v = rng.normal(0.0, 1.0);

    auto xr = x;
    std::reverse(xr.begin(), xr.end());
    auto fx = filtfilt(f, x);
    auto fxr = filtfilt(f, xr);
    std::reverse(fxr.begin(), fxr.end());
    for (size_t i = x.size() / 3; i < 2 * x.size() / 3; ++i)
        CHECK(std::abs(fx[i] - fxr[i]) < 1e-12);

    std::vector<double> combo(2048);
    for (size_t i = 0; i < combo.size(); ++i) combo[i] = 2.0 * x[i] - 0.5 * y[i];
    const auto fc = filtfilt(f, combo);
    const auto fy = filtfilt(f, y);
    for (size_t i = 0; i < combo.size(); ++i)
        CHECK(fc[i] == doctest::Approx(2.0 * fx[i] - 0.5 * fy[i]).epsilon(1e-9));
}

TEST_CASE("cascade impulse response decays") {
    for (double fs : {512.0, 2048.0}) {
        const BiquadCascade f = design_bandpass(1.0, 12.0, fs, 3);
        std::vector<double> impulse(static_cast<size_t>(10 * fs), 0.0);
        impulse[0] = 1.0;
        const auto h = sosfilt(f, impulse);
        double peak = 0;
        for (double v : h) peak = std::max(peak, std::abs(v));
        double tail = 0;
        for (size_t i = h.size() - h.size() / 10; i < h.size(); ++i)
            tail = std::max(tail, std::abs(h[i]));
        CHECK(tail < 1e-6 * peak);
    }
}

TEST_CASE("decimate keeps every k-th sample from the first") {
    CHECK(decimate({1, 2, 3, 4, 5, 6}, 2) == std::vector<double>{1, 3, 5});
    const std::vector<double> x = {3, 1, 4, 1, 5};
    CHECK(decimate(x, 1) == x);
    std::vector<double> long_x(2048);
    for (size_t i = 0; i < long_x.size(); ++i) long_x[i] = static_cast<double>(i);
    const auto d = decimate(long_x, 64);
    CHECK(d.size() == 32);
    CHECK(d[0] == 0.0);
    CHECK(d[31] == 31.0 * 64.0);
    CHECK_THROWS_AS(decimate(x, 0), InputError);
}

TEST_CASE("validate_schedule accepts the paradigm and rejects structure breaks") {
    StimulusSchedule s = grid_schedule(2, 3);
    CHECK_NOTHROW(validate_schedule(s, 512.0));

    StimulusSchedule dup = s;
    dup.events[1].image_id = dup.events[0].image_id;
    CHECK_THROWS_AS(validate_schedule(dup, 512.0), InputError);

    StimulusSchedule two_targets = s;
    two_targets.events[0].is_target = true;
    CHECK_THROWS_AS(validate_schedule(two_targets, 512.0), InputError);

    StimulusSchedule unordered = s;
    std::swap(unordered.events[0].onset_s, unordered.events[1].onset_s);
    CHECK_THROWS_AS(validate_schedule(unordered, 512.0), InputError);

    StimulusSchedule jitter = s;
    jitter.events[3].onset_s += 0.05; // 25 source samples off the grid
    CHECK_THROWS_AS(validate_schedule(jitter, 512.0), InputError);
}

TEST_CASE("extract_windows cuts one labeled window per event") {
    const int runs = 1, trials = 20;
    const StimulusSchedule sched = grid_schedule(runs, trials);
    Recording rec32 = flat_recording(32.0, 32 * 60);
    for (size_t n = 0; n < rec32.samples.rows; ++n)
        rec32.samples.at(n, 0) = static_cast<double>(n);

    const auto windows = extract_windows(rec32, sched, 3, 2);
    CHECK(windows.size() == 120);
    int targets = 0;
    for (const auto& w : windows) targets += w.label;
    CHECK(targets == 20);
    CHECK(windows[0].meta.subject == 3);
    CHECK(windows[0].meta.session == 2);
    CHECK(windows[0].meta.run == 1);
    CHECK(windows[0].meta.image_id == 1);

    // start sample = round(onset*32); first event at 1 s -> sample 32
    CHECK(windows[0].data.at(0, 0) == 32.0);
    // overlap: second event 0.4 s later -> start 32 + round(12.8) = 45
    CHECK(windows[1].data.at(0, 0) == std::round((1.0 + 0.4) * 32.0));

    CHECK(extract_windows(rec32, StimulusSchedule{}).empty());

    // single event at t=0 on an exactly 32-sample recording
    Recording tiny = flat_recording(32.0, 32, 1.5);
    StimulusSchedule one;
    one.events.push_back({0.0, 1, true, 1, 1});
    const auto w1 = extract_windows(tiny, one);
    REQUIRE(w1.size() == 1);
    CHECK(w1[0].data.rows == 32);
    CHECK(w1[0].data.at(31, 31) == 1.5);

    // out-of-range onset names the event index
    Recording short_rec = flat_recording(32.0, 40);
    StimulusSchedule bad;
    bad.events.push_back({0.0, 1, true, 1, 1});
    bad.events.push_back({0.4, 2, false, 1, 1});
    CHECK_THROWS_WITH_AS(extract_windows(short_rec, bad),
                         doctest::Contains("event 1"), InputError);

    Recording wrong_rate = flat_recording(64.0, 128);
    CHECK_THROWS_AS(extract_windows(wrong_rate, one), InputError);
}

TEST_CASE("preprocess_recording composes filter, decimate, extract") {
    const BiquadCascade f = design_bandpass(1.0, 12.0, 512.0, 3);

    const StimulusSchedule sched = grid_schedule(1, 2);
    const double last = sched.events.back().onset_s;
    Recording rec = flat_recording(512.0, static_cast<size_t>((last + 1.5) * 512.0));
    const auto windows = preprocess_recording(rec, sched, f, 1, 1);
    CHECK(windows.size() == 12);
    for (const auto& w : windows) {
        CHECK(w.data.rows == 32);
        CHECK(w.data.cols == 32);
        for (double v : w.data.a) CHECK(v == 0.0);
    }

    // full synthetic session: 6 runs x 20 trials x 6 images = 720 windows
    SubjectProfile prof = sample_subject(99);
    SynthConfig cfg;
    const auto [rec_s, sched_s] = generate_session(prof, cfg, 1, 1);
    const auto all = preprocess_recording(rec_s, sched_s, f, 1, 1);
    CHECK(all.size() == 720);
    int targets = 0;
    for (const auto& w : all) targets += w.label;
    CHECK(targets == 120);

    // cascade rate mismatch is rejected
    const BiquadCascade wrong = design_bandpass(1.0, 12.0, 2048.0, 3);
    CHECK_THROWS_AS(preprocess_recording(rec, sched, wrong, 1, 1), InputError);

    // source rates that are not integer multiples of 32 are rejected
    Recording odd_rate = flat_recording(512.0, 4096);
    odd_rate.sample_rate_hz = 100.0;
    const BiquadCascade f100 = design_bandpass(1.0, 12.0, 100.0, 3);
    CHECK_THROWS_AS(preprocess_recording(odd_rate, sched, f100, 1, 1), InputError);

    // truncated recording names the failing event
    Recording trunc = flat_recording(512.0, static_cast<size_t>((last + 0.5) * 512.0));
    CHECK_THROWS_WITH_AS(preprocess_recording(trunc, sched, f, 1, 1),
                         doctest::Contains("event"), InputError);
}
