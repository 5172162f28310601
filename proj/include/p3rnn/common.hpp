#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace p3rnn {

// Thrown for malformed input data / files; the CLI maps it to exit code 2.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

constexpr int kNumElectrodes = 32;
constexpr int kWindowSteps = 32;
constexpr double kModelRateHz = 32.0;

// Dense row-major matrix of doubles. Deliberately minimal: contiguous
// storage plus row pointers is all the kernels need.
struct Mat {
    size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double* row(size_t r) { return a.data() + r * cols; }
    const double* row(size_t r) const { return a.data() + r * cols; }
    double& at(size_t r, size_t c) { return a[r * cols + c]; }
    double at(size_t r, size_t c) const { return a[r * cols + c]; }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

// Canonical 10-20 montage order used by the synthesizer and CSV headers.
const std::vector<std::string>& electrode_names();

// Index of a named electrode, or -1.
int electrode_index(const std::string& name);

// Shortest decimal form that still round-trips (used for CSV/NDJSON where
// the formats pin a minimum significant-digit count).
std::string fmt_g(double v, int sig_digits);

} // namespace p3rnn
