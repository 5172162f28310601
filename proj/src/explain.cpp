#include "p3rnn/explain.hpp"

#include <algorithm>
#include <cmath>

#include "p3rnn/kernels.hpp"

namespace p3rnn {

RelevanceVector global_relevance(const ModelParams& params, bool normalize) {
    RelevanceVector r;
    r.per_electrode.resize(params.C);
    for (int i = 0; i < params.C; ++i)
        r.per_electrode[i] = kern::l1_norm(params.W_xh.row(i), params.H);
    if (normalize) {
        const double mx = *std::max_element(r.per_electrode.begin(), r.per_electrode.end());
        if (mx > 0)
            for (double& v : r.per_electrode) v /= mx;
        r.normalized = true;
    }
    return r;
}

std::vector<double> prm_profile(const ModelParams& params) {
    if (params.head != Head::PRM)
        throw InputError("prm_profile: model has no post-recurrent head");
    std::vector<double> out(params.w_p.size());
    for (size_t t = 0; t < out.size(); ++t) out[t] = std::fabs(params.w_p[t]);
    return out;
}

AttributionMap local_relevance(const ModelParams& params, const EEGWindow& window) {
    AttributionMap map;
    map.values = input_jacobian(params, window.data);
    for (int i = 0; i < params.C; ++i)
        for (int t = 0; t < params.T; ++t) map.values.at(i, t) *= window.data.at(t, i);
    map.window_meta = window.meta;
    map.normalization = Normalization::raw;
    return map;
}

AttributionMap average_relevance(const ModelParams& params,
                                 const std::vector<EEGWindow>& windows, ClassFilter filter) {
    AttributionMap avg;
    avg.values = Mat(params.C, params.T);
    size_t n = 0;
    for (const EEGWindow& w : windows) {
        if (filter == ClassFilter::target && w.label != 1) continue;
        if (filter == ClassFilter::nontarget && w.label != 0) continue;
        const AttributionMap m = local_relevance(params, w);
        kern::axpy(1.0, m.values.a.data(), avg.values.a.data(), avg.values.a.size());
        ++n;
    }
    if (n == 0) throw InputError("average_relevance: no windows match the class filter");
    for (double& v : avg.values.a) v /= static_cast<double>(n);
    return avg;
}

AttributionMap normalize_map(AttributionMap map) {
    double mx = 0;
    for (double v : map.values.a) mx = std::max(mx, std::fabs(v));
    if (mx > 0)
        for (double& v : map.values.a) v /= mx;
    map.normalization = Normalization::max_abs_one;
    return map;
}

HiddenDiff hidden_activation_diff(const ModelParams& params,
                                  const std::vector<EEGWindow>& windows) {
    const int H = params.H, T = params.T;
    Mat sum[2] = {Mat(T, H), Mat(T, H)};
    size_t count[2] = {0, 0};
    for (const EEGWindow& w : windows) {
        const ForwardTrace tr = forward(params, w.data);
        kern::axpy(1.0, tr.h.a.data(), sum[w.label].a.data(), sum[w.label].a.size());
        count[w.label]++;
    }
    if (count[0] == 0 || count[1] == 0)
        throw InputError("hidden_activation_diff: need windows of both classes");

    HiddenDiff d;
    d.per_neuron = Mat(H, T);
    d.mean_curve.assign(T, 0.0);
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < H; ++j) {
            const double m1 = sum[1].at(t, j) / static_cast<double>(count[1]);
            const double m0 = sum[0].at(t, j) / static_cast<double>(count[0]);
            const double v = std::fabs(m1 - m0);
            d.per_neuron.at(j, t) = v;
            d.mean_curve[t] += v;
        }
        d.mean_curve[t] /= H;
    }
    return d;
}

namespace {

// In-place lower Cholesky of the symmetric matrix A (row-major, full
// storage); returns false on a non-positive pivot.
bool cholesky(Mat& A) {
    const size_t d = A.rows;
    for (size_t j = 0; j < d; ++j) {
        double diag = A.at(j, j) - kern::dot(A.row(j), A.row(j), j);
        if (diag <= 0.0) return false;
        diag = std::sqrt(diag);
        A.at(j, j) = diag;
        for (size_t i = j + 1; i < d; ++i)
            A.at(i, j) = (A.at(i, j) - kern::dot(A.row(i), A.row(j), j)) / diag;
    }
    return true;
}

// Solves A x = b given the Cholesky factor L stored in A's lower triangle.
std::vector<double> cholesky_solve(const Mat& L, const std::vector<double>& b) {
    const size_t d = L.rows;
    std::vector<double> x(b);
    for (size_t i = 0; i < d; ++i)
        x[i] = (x[i] - kern::dot(L.row(i), x.data(), i)) / L.at(i, i);
    for (size_t ii = d; ii-- > 0;) {
        double s = x[ii];
        for (size_t k = ii + 1; k < d; ++k) s -= L.at(k, ii) * x[k];
        x[ii] = s / L.at(ii, ii);
    }
    return x;
}

} // namespace

SeparabilityReport lda_separability(const ModelParams& params,
                                    const std::vector<EEGWindow>& windows, LdaMode mode,
                                    double gamma) {
    if (gamma < 0.0 || gamma > 1.0)
        throw InputError("lda_separability: gamma must be in [0,1]");
    const int H = params.H, T = params.T;
    const size_t d = mode == LdaMode::last_state ? static_cast<size_t>(H)
                                                 : static_cast<size_t>(H) * T;

    std::vector<std::vector<double>> feats;
    std::vector<int> labels;
    feats.reserve(windows.size());
    for (const EEGWindow& w : windows) {
        const ForwardTrace tr = forward(params, w.data);
        if (mode == LdaMode::last_state)
            feats.emplace_back(tr.h.row(T - 1), tr.h.row(T - 1) + H);
        else
            feats.emplace_back(tr.h.a.begin(), tr.h.a.end());
        labels.push_back(w.label);
    }
    size_t n[2] = {0, 0};
    for (int l : labels) n[l]++;
    if (n[0] == 0 || n[1] == 0)
        throw InputError("lda_separability: need windows of both classes");

    std::vector<double> mu0(d, 0.0), mu1(d, 0.0);
    for (size_t k = 0; k < feats.size(); ++k)
        kern::axpy(1.0, feats[k].data(), labels[k] ? mu1.data() : mu0.data(), d);
    for (size_t i = 0; i < d; ++i) {
        mu0[i] /= static_cast<double>(n[0]);
        mu1[i] /= static_cast<double>(n[1]);
    }

    // Pooled within-class covariance (unbiased, N-2 denominator).
    Mat cov(d, d);
    std::vector<double> centered(d);
    for (size_t k = 0; k < feats.size(); ++k) {
        const std::vector<double>& mu = labels[k] ? mu1 : mu0;
        for (size_t i = 0; i < d; ++i) centered[i] = feats[k][i] - mu[i];
        kern::outer_acc(cov, centered.data(), centered.data());
    }
    const double denom = static_cast<double>(feats.size()) - 2.0;
    if (denom > 0)
        for (double& v : cov.a) v /= denom;

    double trace = 0.0;
    for (size_t i = 0; i < d; ++i) trace += cov.at(i, i);
    const double ridge = gamma * trace / static_cast<double>(d);
    for (double& v : cov.a) v *= (1.0 - gamma);
    for (size_t i = 0; i < d; ++i) cov.at(i, i) += ridge;

    std::vector<double> delta(d);
    for (size_t i = 0; i < d; ++i) delta[i] = mu1[i] - mu0[i];

    if (!cholesky(cov))
        throw InputError("lda_separability: shrunk covariance is singular; "
                         "use a shrinkage gamma > 0");
    const std::vector<double> w = cholesky_solve(cov, delta);

    SeparabilityReport rep;
    rep.mode = mode;
    rep.shrinkage_gamma = gamma;
    rep.labels = labels;

    const double num = kern::dot(w.data(), delta.data(), d);
    // w^T Sigma w reduces to w . delta since Sigma w = delta; guard the
    // degenerate equal-means case where both vanish.
    rep.fisher_j = num > 0 ? num : 0.0;
    rep.projections.resize(feats.size());
    for (size_t k = 0; k < feats.size(); ++k)
        rep.projections[k] = kern::dot(w.data(), feats[k].data(), d);
    return rep;
}

} // namespace p3rnn
