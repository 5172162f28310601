#pragma once

#include <cstdint>
#include <vector>

#include "p3rnn/common.hpp"

namespace p3rnn {

enum class Head { LastStep, PRM };

// Elman cell with a scalar sigmoid output per timestep. The prediction is
// either the last-timestep output (LastStep) or a logistic combination of
// all T per-timestep outputs (PRM): p = sigmoid(w_p . y + b_p).
//
// Production windows are 32x32, but every operation works on generic T x C
// inputs so small configurations stay cheap to gradient-check.
struct ModelParams {
    int H = 50;
    int T = kWindowSteps;
    int C = kNumElectrodes;
    Head head = Head::PRM;
    Mat W_xh;                  // C x H
    Mat W_hh;                  // H x H
    std::vector<double> b_h;   // H
    std::vector<double> w_hy;  // H
    double b_y = 0;
    std::vector<double> w_p;   // T when head == PRM, empty otherwise
    double b_p = 0;
};

struct ForwardTrace {
    Mat h;                 // T x H, post-tanh
    Mat pre_h;             // T x H, pre-tanh (kept for gradients)
    std::vector<double> y; // T per-timestep outputs, in (0,1)
    double p = 0;          // prediction in (0,1)
};

struct Gradients {
    Mat W_xh, W_hh;
    std::vector<double> b_h, w_hy;
    double b_y = 0;
    std::vector<double> w_p;
    double b_p = 0;
    double loss = 0;
};

// Uniform Glorot weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
ModelParams init_params(uint64_t seed, int H, Head head, int C = kNumElectrodes,
                        int T = kWindowSteps);

double sigmoid(double z);

// x is T x C, h_0 = 0. Throws InputError on shape mismatch or non-finite input.
ForwardTrace forward(const ModelParams& params, const Mat& x);

// Exact gradient of class_weight*XE(label, p) + lambda_input*|W_xh|_1 +
// lambda_prm*|w_p|_1 via backpropagation through time. The L1 subgradient
// uses sign(0) = 0. The loss value clamps p to [1e-12, 1-1e-12]; gradients
// use the unclamped sigmoid identity.
Gradients backward(const ModelParams& params, const ForwardTrace& trace, const Mat& x,
                   int label, double class_weight, double lambda_input, double lambda_prm);

// C x T matrix J with J[i][t] = dp/dx[t][i], by reverse accumulation.
Mat input_jacobian(const ModelParams& params, const Mat& x);

// Weighted cross-entropy of a single prediction (clamped inside).
double xent(double p, int label, double class_weight);

} // namespace p3rnn
