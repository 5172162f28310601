#pragma once

#include <string>
#include <vector>

#include "p3rnn/model.hpp"
#include "p3rnn/signal.hpp"

namespace p3rnn {

enum class Normalization { raw, max_abs_one };
enum class ClassFilter { target, nontarget, all };
enum class LdaMode { last_state, concat_states };

struct RelevanceVector {
    std::vector<double> per_electrode; // >= 0
    bool normalized = false;
};

struct AttributionMap {
    Mat values; // C x T, electrode x timestep, signed
    WindowMeta window_meta;
    Normalization normalization = Normalization::raw;
};

struct HiddenDiff {
    Mat per_neuron;                 // H x T
    std::vector<double> mean_curve; // T, mean over neurons
};

struct SeparabilityReport {
    LdaMode mode = LdaMode::last_state;
    double fisher_j = 0;
    std::vector<double> projections; // one scalar per window, input order
    std::vector<int> labels;
    double shrinkage_gamma = 0;
};

// R_i = sum_j |W_xh[i][j]|, optionally divided by its max.
RelevanceVector global_relevance(const ModelParams& params, bool normalize);

// |w_p| per timestep; rejects LastStep models.
std::vector<double> prm_profile(const ModelParams& params);

// Gradient-times-input: values[i][t] = x[t][i] * dp/dx[t][i].
AttributionMap local_relevance(const ModelParams& params, const EEGWindow& window);

// Elementwise mean of local_relevance over the class-filtered windows.
AttributionMap average_relevance(const ModelParams& params,
                                 const std::vector<EEGWindow>& windows, ClassFilter filter);

// Divides by max |value| (no-op when all zero) and flags the map.
AttributionMap normalize_map(AttributionMap map);

// per_neuron[j][t] = |mean_target h_t[j] - mean_nontarget h_t[j]|.
HiddenDiff hidden_activation_diff(const ModelParams& params,
                                  const std::vector<EEGWindow>& windows);

// Two-class Fisher LDA on hidden-state features (h_T or concatenated
// h_1..h_T) with shrunk pooled covariance (1-gamma)*Sigma +
// gamma*(tr(Sigma)/d)*I, solved by Cholesky factorization.
SeparabilityReport lda_separability(const ModelParams& params,
                                    const std::vector<EEGWindow>& windows, LdaMode mode,
                                    double gamma);

} // namespace p3rnn
