#include "p3rnn/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

namespace p3rnn {

namespace {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

std::string fmt_hz(double v) { return fmt_g(v, 12); }

} // namespace

BiquadCascade design_bandpass(double low_hz, double high_hz, double sample_rate_hz,
                              int prototype_order) {
    if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < sample_rate_hz / 2.0))
        throw InputError("design_bandpass: need 0 < low (" + fmt_hz(low_hz) + ") < high (" +
                         fmt_hz(high_hz) + ") < Nyquist (" + fmt_hz(sample_rate_hz / 2.0) + ")");
    if (prototype_order < 1)
        throw InputError("design_bandpass: prototype_order must be >= 1");

    const int n = prototype_order;

    // Analog lowpass prototype: poles evenly spaced on the left unit semicircle.
    std::vector<cplx> proto;
    for (int k = 1; k <= n; ++k) {
        const double theta = kPi * (2.0 * k + n - 1.0) / (2.0 * n);
        proto.emplace_back(std::cos(theta), std::sin(theta));
    }

    // Prewarp the edges, then lowpass->bandpass: each prototype pole p maps to
    // the two roots of s^2 - bw*p*s + w0^2.
    const double w1 = 2.0 * sample_rate_hz * std::tan(kPi * low_hz / sample_rate_hz);
    const double w2 = 2.0 * sample_rate_hz * std::tan(kPi * high_hz / sample_rate_hz);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;
    std::vector<cplx> apoles;
    for (const cplx& p : proto) {
        const cplx half = 0.5 * bw * p;
        const cplx disc = std::sqrt(half * half - w0sq);
        apoles.push_back(half + disc);
        apoles.push_back(half - disc);
    }

    // Bilinear transform. The n analog zeros at s=0 land on z=1; the n zeros at
    // infinity land on z=-1, so every section gets numerator g*(z^2 - 1).
    const double K = 2.0 * sample_rate_hz;
    std::vector<cplx> zpoles;
    cplx denom = 1.0;
    for (const cplx& s : apoles) {
        zpoles.push_back((K + s) / (K - s));
        denom *= (K - s);
    }
    const double gain = std::pow(bw * K, n) / denom.real();
    const double g = std::pow(gain, 1.0 / n);

    std::vector<cplx> upper;
    std::vector<double> reals;
    for (const cplx& z : zpoles) {
        if (std::abs(z.imag()) > 1e-10) {
            if (z.imag() > 0) upper.push_back(z);
        } else {
            reals.push_back(z.real());
        }
    }
    std::sort(upper.begin(), upper.end(),
              [](const cplx& a, const cplx& b) { return a.real() < b.real(); });
    std::sort(reals.begin(), reals.end());
    if (reals.size() % 2 != 0 || upper.size() + reals.size() / 2 != static_cast<size_t>(n))
        throw std::runtime_error("design_bandpass: pole pairing failed");

    BiquadCascade c;
    c.design_meta = {low_hz, high_hz, sample_rate_hz, prototype_order};
    for (const cplx& z : upper) {
        Biquad s{g, 0.0, -g, -2.0 * z.real(), std::norm(z)};
        c.sections.push_back(s);
    }
    for (size_t i = 0; i + 1 < reals.size(); i += 2) {
        Biquad s{g, 0.0, -g, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]};
        c.sections.push_back(s);
    }

    for (const Biquad& s : c.sections) {
        // stability triangle: |a2| < 1 and |a1| < 1 + a2
        if (!std::isfinite(s.b0) || !std::isfinite(s.a1) || !std::isfinite(s.a2) ||
            std::abs(s.a2) >= 1.0 || std::abs(s.a1) >= 1.0 + s.a2)
            throw std::runtime_error("design_bandpass: unstable or non-finite section");
    }
    return c;
}

double cascade_magnitude(const BiquadCascade& c, double hz) {
    const double w = 2.0 * kPi * hz / c.design_meta.sample_rate_hz;
    const cplx zi = std::exp(cplx(0.0, -w)); // z^-1
    cplx h = 1.0;
    for (const Biquad& s : c.sections)
        h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
    return std::abs(h);
}

std::vector<double> sosfilt(const BiquadCascade& c, const std::vector<double>& x) {
    std::vector<double> y = x;
    for (const Biquad& s : c.sections) {
        double z1 = 0.0, z2 = 0.0;
        for (double& v : y) {
            const double xn = v;
            const double yn = s.b0 * xn + z1;
            z1 = s.b1 * xn - s.a1 * yn + z2;
            z2 = s.b2 * xn - s.a2 * yn;
            v = yn;
        }
    }
    return y;
}

std::vector<double> filtfilt(const BiquadCascade& c, const std::vector<double>& x) {
    const size_t pad = 3 * (2 * 2 * static_cast<size_t>(c.design_meta.prototype_order) + 1);
    const size_t n = x.size();
    if (n <= pad)
        throw InputError("filtfilt: sequence of length " + std::to_string(n) +
                         " is too short; need more than " + std::to_string(pad) + " samples");

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[0] - x[pad - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

    std::vector<double> y = sosfilt(c, ext);
    std::reverse(y.begin(), y.end());
    y = sosfilt(c, y);
    std::reverse(y.begin(), y.end());

    return std::vector<double>(y.begin() + pad, y.begin() + pad + n);
}

std::vector<double> decimate(const std::vector<double>& x, int factor) {
    if (factor <= 0) throw InputError("decimate: factor must be >= 1");
    std::vector<double> out;
    out.reserve((x.size() + factor - 1) / factor);
    for (size_t i = 0; i < x.size(); i += factor) out.push_back(x[i]);
    return out;
}

void validate_schedule(const StimulusSchedule& s, double source_rate_hz) {
    const auto& ev = s.events;
    for (size_t i = 0; i < ev.size(); ++i) {
        if (ev[i].image_id < 1 || ev[i].image_id > 6)
            throw InputError("schedule: event " + std::to_string(i) + " has image_id " +
                             std::to_string(ev[i].image_id) + " outside 1..6");
        if (i > 0 && !(ev[i].onset_s > ev[i - 1].onset_s))
            throw InputError("schedule: onsets not strictly increasing at event " +
                             std::to_string(i));
    }

    // Within-run spacing must be uniform to within one source sample. The ISI
    // itself is inferred (it is a generator knob), not hard-coded.
    const double tol = 1.0 / source_rate_hz;
    double isi = 0.0;
    for (size_t i = 1; i < ev.size(); ++i) {
        if (ev[i].run != ev[i - 1].run) continue;
        const double gap = ev[i].onset_s - ev[i - 1].onset_s;
        if (isi == 0.0) isi = gap;
        if (std::abs(gap - isi) > tol)
            throw InputError("schedule: uneven ISI at event " + std::to_string(i) + " (gap " +
                             fmt_g(gap, 9) + " s vs " + fmt_g(isi, 9) + " s)");
    }

    std::map<std::pair<int, int>, std::pair<int, int>> trials; // (run,trial) -> (count, targets)
    std::map<std::pair<int, int>, int> id_mask;
    for (size_t i = 0; i < ev.size(); ++i) {
        const auto key = std::make_pair(ev[i].run, ev[i].trial);
        auto& t = trials[key];
        t.first++;
        if (ev[i].is_target) t.second++;
        int& mask = id_mask[key];
        const int bit = 1 << ev[i].image_id;
        if (mask & bit)
            throw InputError("schedule: image_id " + std::to_string(ev[i].image_id) +
                             " repeats within run " + std::to_string(ev[i].run) + " trial " +
                             std::to_string(ev[i].trial));
        mask |= bit;
    }
    for (const auto& [key, t] : trials) {
        if (t.first != 6 || t.second != 1)
            throw InputError("schedule: run " + std::to_string(key.first) + " trial " +
                             std::to_string(key.second) + " has " + std::to_string(t.first) +
                             " events, " + std::to_string(t.second) +
                             " targets (expected 6 and 1)");
    }
}

std::vector<EEGWindow> extract_windows(const Recording& recording32,
                                       const StimulusSchedule& schedule, int subject,
                                       int session) {
    if (std::abs(recording32.sample_rate_hz - kModelRateHz) > 1e-9)
        throw InputError("extract_windows: recording rate is " +
                         fmt_hz(recording32.sample_rate_hz) + " Hz, expected 32");
    if (recording32.samples.cols != kNumElectrodes)
        throw InputError("extract_windows: recording has " +
                         std::to_string(recording32.samples.cols) + " channels, expected 32");

    std::vector<EEGWindow> out;
    out.reserve(schedule.events.size());
    const long n = static_cast<long>(recording32.samples.rows);
    for (size_t idx = 0; idx < schedule.events.size(); ++idx) {
        const StimEvent& e = schedule.events[idx];
        const long start = std::lround(e.onset_s * kModelRateHz);
        if (start < 0 || start + kWindowSteps > n)
            throw InputError("extract_windows: event " + std::to_string(idx) + " at " +
                             fmt_g(e.onset_s, 9) + " s does not fit in " + std::to_string(n) +
                             " samples");
        EEGWindow w;
        w.data = Mat(kWindowSteps, kNumElectrodes);
        for (int t = 0; t < kWindowSteps; ++t)
            std::copy_n(recording32.samples.row(start + t), kNumElectrodes, w.data.row(t));
        w.label = e.is_target ? 1 : 0;
        w.meta = {subject, session, e.run, e.trial, e.image_id};
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<EEGWindow> preprocess_recording(const Recording& recording,
                                            const StimulusSchedule& schedule,
                                            const BiquadCascade& cascade, int subject,
                                            int session) {
    if (std::abs(cascade.design_meta.sample_rate_hz - recording.sample_rate_hz) > 1e-9)
        throw InputError("preprocess: cascade designed for " +
                         fmt_hz(cascade.design_meta.sample_rate_hz) + " Hz but recording is " +
                         fmt_hz(recording.sample_rate_hz) + " Hz");
    const double rate = recording.sample_rate_hz;
    const long irate = std::lround(rate);
    if (std::abs(rate - irate) > 1e-9 || irate % 32 != 0 || irate <= 64)
        throw InputError("preprocess: sample rate " + fmt_hz(rate) +
                         " must be an integer multiple of 32 greater than 64");
    const int factor = static_cast<int>(irate / 32);

    const size_t n = recording.samples.rows;
    Recording out32;
    out32.sample_rate_hz = kModelRateHz;
    out32.channel_names = recording.channel_names;
    std::vector<double> chan(n);
    for (int ch = 0; ch < kNumElectrodes; ++ch) {
        for (size_t t = 0; t < n; ++t) chan[t] = recording.samples.at(t, ch);
        const std::vector<double> dec = decimate(filtfilt(cascade, chan), factor);
        if (ch == 0) out32.samples = Mat(dec.size(), kNumElectrodes);
        for (size_t t = 0; t < dec.size(); ++t) out32.samples.at(t, ch) = dec[t];
    }
    return extract_windows(out32, schedule, subject, session);
}

} // namespace p3rnn
