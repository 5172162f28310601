#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "p3rnn/model.hpp"
#include "p3rnn/signal.hpp"

namespace p3rnn {

enum class ClassWeighting { inverse_frequency, explicit_weights };

struct TrainConfig {
    int H = 50;
    int batch_size = 16;
    double learning_rate = 0.0003;
    int epochs = 100;
    int patience = 10;
    double lambda_input = 0.0;
    double lambda_prm = 0.0;
    Head head = Head::PRM;
    uint64_t seed = 0;
    double val_fraction = 0.1; // stratified split carved from the training windows
    ClassWeighting class_weighting = ClassWeighting::inverse_frequency;
    double weight_target = 1.0;    // used with explicit_weights
    double weight_nontarget = 1.0; // used with explicit_weights
};

struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

struct BacResult {
    double bac = 0, recall = 0, specificity = 0;
};

struct EpochStat {
    int epoch = 0;
    double train_loss = 0;
    double val_bac = 0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStat> history;
    double best_val_bac = 0;
    int best_epoch = 0;
};

struct SessionGroup {
    int subject = 0, session = 0;
    std::vector<EEGWindow> windows;
};

struct FoldReport {
    int fold_index = 0; // 1-based
    int test_session = 0;
    double bac = 0, recall = 0, specificity = 0;
    std::vector<EpochStat> history;
    std::string model_path;
    uint64_t seed = 0;
};

struct CvResult {
    std::vector<FoldReport> reports;
    std::vector<ModelParams> models;
    double mean_bac = 0, std_bac = 0;
};

// (1/N) * sum_i w_i * [-t_i log p_i - (1-t_i) log(1-p_i)], p clamped.
double weighted_cross_entropy(const std::vector<double>& probs, const std::vector<int>& labels,
                              const std::vector<double>& weights);

BacResult balanced_accuracy(const ConfusionCounts& c);

// Moment buffers for every tensor of a ModelParams, flat, in a fixed order.
struct NadamState {
    std::vector<std::vector<double>> m, v;
    long step = 0;
};

// One Nesterov-Adam update; aborts on non-finite gradients naming the tensor.
void nadam_step(NadamState& state, ModelParams& params, const Gradients& grads, double lr,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Predictions thresholded at p >= 0.5 against window labels.
ConfusionCounts evaluate(const ModelParams& params, const std::vector<EEGWindow>& windows,
                         double threshold = 0.5);

// Mini-batch training with inverse-frequency class weights, seeded epoch
// shuffles, and early stopping on validation BAC (best parameters restored).
// model_seed drives initialization; cfg.seed drives the split and shuffles.
TrainResult train(uint64_t model_seed, const std::vector<EEGWindow>& windows,
                  const TrainConfig& cfg);

// Leave-one-session-out cross-validation; requires sessions.size() == K.
// jobs > 1 trains folds concurrently; outputs are identical either way.
CvResult kfold_cv(const std::vector<SessionGroup>& sessions, const TrainConfig& cfg, int K = 4,
                  int jobs = 1);

} // namespace p3rnn
