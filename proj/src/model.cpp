#include "p3rnn/model.hpp"

#include <cmath>

#include "p3rnn/kernels.hpp"
#include "p3rnn/rng.hpp"

namespace p3rnn {

namespace {

double glorot_limit(int fan_in, int fan_out) { return std::sqrt(6.0 / (fan_in + fan_out)); }

void fill_uniform(Rng& rng, double* p, size_t n, double limit) {
    for (size_t i = 0; i < n; ++i) p[i] = rng.uniform(-limit, limit);
}

double sign0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void check_input(const ModelParams& params, const Mat& x) {
    if (x.rows != static_cast<size_t>(params.T) || x.cols != static_cast<size_t>(params.C))
        throw InputError("model: input is " + std::to_string(x.rows) + "x" +
                         std::to_string(x.cols) + ", params expect " + std::to_string(params.T) +
                         "x" + std::to_string(params.C));
    for (double v : x.a)
        if (!std::isfinite(v)) throw InputError("model: non-finite input value");
}

} // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double xent(double p, int label, double class_weight) {
    const double q = std::min(1.0 - 1e-12, std::max(1e-12, p));
    return class_weight * (label ? -std::log(q) : -std::log(1.0 - q));
}

ModelParams init_params(uint64_t seed, int H, Head head, int C, int T) {
    if (H < 1 || C < 1 || T < 1) throw InputError("init_params: dimensions must be >= 1");
    Rng rng(seed);
    ModelParams p;
    p.H = H;
    p.T = T;
    p.C = C;
    p.head = head;
    p.W_xh = Mat(C, H);
    fill_uniform(rng, p.W_xh.a.data(), p.W_xh.a.size(), glorot_limit(C, H));
    p.W_hh = Mat(H, H);
    fill_uniform(rng, p.W_hh.a.data(), p.W_hh.a.size(), glorot_limit(H, H));
    p.b_h.assign(H, 0.0);
    p.w_hy.assign(H, 0.0);
    fill_uniform(rng, p.w_hy.data(), p.w_hy.size(), glorot_limit(H, 1));
    p.b_y = 0.0;
    if (head == Head::PRM) {
        p.w_p.assign(T, 0.0);
        fill_uniform(rng, p.w_p.data(), p.w_p.size(), glorot_limit(T, 1));
        p.b_p = 0.0;
    }
    return p;
}

ForwardTrace forward(const ModelParams& params, const Mat& x) {
    check_input(params, x);
    const int T = params.T, H = params.H;

    ForwardTrace tr;
    tr.h = Mat(T, H);
    tr.pre_h = Mat(T, H);
    tr.y.resize(T);

    std::vector<double> a(H);
    const double* h_prev = nullptr;
    for (int t = 0; t < T; ++t) {
        std::copy(params.b_h.begin(), params.b_h.end(), a.begin());
        kern::vm_acc(x.row(t), params.W_xh, a.data());
        if (t > 0) kern::vm_acc(h_prev, params.W_hh, a.data());
        double* ht = tr.h.row(t);
        double* pt = tr.pre_h.row(t);
        for (int j = 0; j < H; ++j) {
            pt[j] = a[j];
            ht[j] = std::tanh(a[j]);
        }
        tr.y[t] = sigmoid(kern::dot(params.w_hy.data(), ht, H) + params.b_y);
        h_prev = ht;
    }

    if (params.head == Head::LastStep) {
        tr.p = tr.y[T - 1];
    } else {
        tr.p = sigmoid(kern::dot(params.w_p.data(), tr.y.data(), T) + params.b_p);
    }
    return tr;
}

namespace {

// Shared reverse pass. dz_y[t] is the gradient at the pre-sigmoid output of
// step t. Accumulates parameter gradients when g != nullptr and input
// gradients (dL/dx[t][i], written as column t) when dx != nullptr.
void reverse_pass(const ModelParams& params, const ForwardTrace& tr, const Mat& x,
                  const std::vector<double>& dz_y, Gradients* g, Mat* dx) {
    const int T = params.T, H = params.H;
    std::vector<double> dh(H, 0.0), dh_prev(H, 0.0), da(H);

    for (int t = T - 1; t >= 0; --t) {
        const double* ht = tr.h.row(t);
        if (dz_y[t] != 0.0) {
            if (g) {
                kern::axpy(dz_y[t], ht, g->w_hy.data(), H);
                g->b_y += dz_y[t];
            }
            kern::axpy(dz_y[t], params.w_hy.data(), dh.data(), H);
        }
        for (int j = 0; j < H; ++j) da[j] = dh[j] * (1.0 - ht[j] * ht[j]);
        if (g) {
            kern::axpy(1.0, da.data(), g->b_h.data(), H);
            kern::outer_acc(g->W_xh, x.row(t), da.data());
            if (t > 0) kern::outer_acc(g->W_hh, tr.h.row(t - 1), da.data());
        }
        if (dx) {
            // column t of the C x T Jacobian-style output
            std::vector<double> dxt(params.C);
            kern::mv_rows(params.W_xh, da.data(), dxt.data());
            for (int i = 0; i < params.C; ++i) dx->at(i, t) = dxt[i];
        }
        if (t > 0) {
            kern::mv_rows(params.W_hh, da.data(), dh_prev.data());
            std::swap(dh, dh_prev);
        }
    }
}

std::vector<double> head_output_grads(const ModelParams& params, const ForwardTrace& tr,
                                      double dloss_dz) {
    // dloss_dz is the gradient at the pre-sigmoid of p.
    const int T = params.T;
    std::vector<double> dz_y(T, 0.0);
    if (params.head == Head::LastStep) {
        dz_y[T - 1] = dloss_dz;
    } else {
        for (int t = 0; t < T; ++t)
            dz_y[t] = dloss_dz * params.w_p[t] * tr.y[t] * (1.0 - tr.y[t]);
    }
    return dz_y;
}

} // namespace

Gradients backward(const ModelParams& params, const ForwardTrace& trace, const Mat& x, int label,
                   double class_weight, double lambda_input, double lambda_prm) {
    check_input(params, x);
    if (trace.y.size() != static_cast<size_t>(params.T) ||
        trace.h.rows != static_cast<size_t>(params.T) ||
        trace.h.cols != static_cast<size_t>(params.H))
        throw InputError("backward: trace does not match params");

    const int T = params.T, H = params.H;
    Gradients g;
    g.W_xh = Mat(params.C, H);
    g.W_hh = Mat(H, H);
    g.b_h.assign(H, 0.0);
    g.w_hy.assign(H, 0.0);

    const double target = label ? 1.0 : 0.0;
    const double dz = class_weight * (trace.p - target); // sigmoid-XE identity

    if (params.head == Head::PRM) {
        g.w_p.assign(T, 0.0);
        kern::axpy(dz, trace.y.data(), g.w_p.data(), T);
        g.b_p = dz;
    }

    reverse_pass(params, trace, x, head_output_grads(params, trace, dz), &g, nullptr);

    if (lambda_input != 0.0)
        for (size_t i = 0; i < g.W_xh.a.size(); ++i)
            g.W_xh.a[i] += lambda_input * sign0(params.W_xh.a[i]);
    if (lambda_prm != 0.0 && params.head == Head::PRM)
        for (int t = 0; t < T; ++t) g.w_p[t] += lambda_prm * sign0(params.w_p[t]);

    g.loss = xent(trace.p, label, class_weight);
    if (lambda_input != 0.0) g.loss += lambda_input * kern::l1_norm(params.W_xh.a.data(), params.W_xh.a.size());
    if (lambda_prm != 0.0 && params.head == Head::PRM)
        g.loss += lambda_prm * kern::l1_norm(params.w_p.data(), T);
    return g;
}

Mat input_jacobian(const ModelParams& params, const Mat& x) {
    const ForwardTrace tr = forward(params, x);
    Mat jac(params.C, params.T);
    const double dz = tr.p * (1.0 - tr.p); // dp/d(pre-sigmoid of p)
    reverse_pass(params, tr, x, head_output_grads(params, tr, dz), nullptr, &jac);
    return jac;
}

} // namespace p3rnn
