#include "p3rnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "p3rnn/kernels.hpp"
#include "p3rnn/rng.hpp"

namespace p3rnn {

namespace {

// Sub-stream tags for deriving independent generators from one seed.
constexpr uint64_t kTagValSplit = 0x76616c73ULL;  // validation split
constexpr uint64_t kTagShuffle = 0x73687566ULL;   // epoch shuffles
constexpr uint64_t kTagFold = 0xf01dULL;          // per-fold seeds

struct TensorRef {
    const char* name;
    double* theta;
    const double* grad;
    size_t n;
};

std::vector<TensorRef> tensor_refs(ModelParams& p, const Gradients& g) {
    std::vector<TensorRef> refs = {
        {"W_xh", p.W_xh.a.data(), g.W_xh.a.data(), p.W_xh.a.size()},
        {"W_hh", p.W_hh.a.data(), g.W_hh.a.data(), p.W_hh.a.size()},
        {"b_h", p.b_h.data(), g.b_h.data(), p.b_h.size()},
        {"w_hy", p.w_hy.data(), g.w_hy.data(), p.w_hy.size()},
        {"b_y", &p.b_y, &g.b_y, 1},
    };
    if (p.head == Head::PRM) {
        refs.push_back({"w_p", p.w_p.data(), g.w_p.data(), p.w_p.size()});
        refs.push_back({"b_p", &p.b_p, &g.b_p, 1});
    }
    return refs;
}

Gradients zero_like(const ModelParams& p) {
    Gradients g;
    g.W_xh = Mat(p.W_xh.rows, p.W_xh.cols);
    g.W_hh = Mat(p.W_hh.rows, p.W_hh.cols);
    g.b_h.assign(p.b_h.size(), 0.0);
    g.w_hy.assign(p.w_hy.size(), 0.0);
    if (p.head == Head::PRM) g.w_p.assign(p.w_p.size(), 0.0);
    return g;
}

void accumulate(Gradients& acc, const Gradients& g) {
    kern::axpy(1.0, g.W_xh.a.data(), acc.W_xh.a.data(), acc.W_xh.a.size());
    kern::axpy(1.0, g.W_hh.a.data(), acc.W_hh.a.data(), acc.W_hh.a.size());
    kern::axpy(1.0, g.b_h.data(), acc.b_h.data(), acc.b_h.size());
    kern::axpy(1.0, g.w_hy.data(), acc.w_hy.data(), acc.w_hy.size());
    acc.b_y += g.b_y;
    if (!acc.w_p.empty()) {
        kern::axpy(1.0, g.w_p.data(), acc.w_p.data(), acc.w_p.size());
        acc.b_p += g.b_p;
    }
}

void scale(Gradients& g, double s) {
    for (double& v : g.W_xh.a) v *= s;
    for (double& v : g.W_hh.a) v *= s;
    for (double& v : g.b_h) v *= s;
    for (double& v : g.w_hy) v *= s;
    g.b_y *= s;
    for (double& v : g.w_p) v *= s;
    g.b_p *= s;
}

} // namespace

double weighted_cross_entropy(const std::vector<double>& probs, const std::vector<int>& labels,
                              const std::vector<double>& weights) {
    if (probs.empty()) throw InputError("weighted_cross_entropy: empty inputs");
    if (probs.size() != labels.size() || probs.size() != weights.size())
        throw InputError("weighted_cross_entropy: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) s += xent(probs[i], labels[i], weights[i]);
    return s / static_cast<double>(probs.size());
}

BacResult balanced_accuracy(const ConfusionCounts& c) {
    if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0)
        throw InputError("balanced_accuracy: negative counts");
    if (c.tp + c.fn == 0 || c.tn + c.fp == 0)
        throw InputError("balanced_accuracy: needs at least one sample of each class");
    BacResult r;
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    r.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    r.bac = 0.5 * (r.recall + r.specificity);
    return r;
}

void nadam_step(NadamState& state, ModelParams& params, const Gradients& grads, double lr,
                double beta1, double beta2, double eps) {
    auto refs = tensor_refs(params, grads);
    if (state.m.empty()) {
        state.m.resize(refs.size());
        state.v.resize(refs.size());
        for (size_t i = 0; i < refs.size(); ++i) {
            state.m[i].assign(refs[i].n, 0.0);
            state.v[i].assign(refs[i].n, 0.0);
        }
    }
    for (const TensorRef& r : refs)
        for (size_t i = 0; i < r.n; ++i)
            if (!std::isfinite(r.grad[i]))
                throw std::runtime_error(std::string("nadam_step: non-finite gradient in ") +
                                         r.name);

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double pb1t = std::pow(beta1, t);
    const double pb1t1 = std::pow(beta1, t + 1.0);
    const double pb2t = std::pow(beta2, t);
    for (size_t i = 0; i < refs.size(); ++i)
        kern::nadam_update(refs[i].theta, refs[i].grad, state.m[i].data(), state.v[i].data(),
                           refs[i].n, lr, beta1, beta2, eps, pb1t, pb1t1, pb2t);
}

ConfusionCounts evaluate(const ModelParams& params, const std::vector<EEGWindow>& windows,
                         double threshold) {
    ConfusionCounts c;
    for (const EEGWindow& w : windows) {
        const int pred = forward(params, w.data).p >= threshold ? 1 : 0;
        if (w.label == 1)
            (pred ? c.tp : c.fn)++;
        else
            (pred ? c.fp : c.tn)++;
    }
    return c;
}

TrainResult train(uint64_t model_seed, const std::vector<EEGWindow>& windows,
                  const TrainConfig& cfg) {
    if (windows.empty()) throw InputError("train: no windows");
    const size_t T = windows[0].data.rows, C = windows[0].data.cols;
    size_t n_target = 0;
    for (const EEGWindow& w : windows) {
        if (w.data.rows != T || w.data.cols != C)
            throw InputError("train: windows have inconsistent shapes");
        n_target += w.label;
    }
    const size_t n_nontarget = windows.size() - n_target;
    if (n_target == 0 || n_nontarget == 0)
        throw InputError("train: need at least one window of each class (have " +
                         std::to_string(n_target) + " targets, " + std::to_string(n_nontarget) +
                         " non-targets)");

    double cw_target = 1.0, cw_nontarget = 1.0;
    if (cfg.class_weighting == ClassWeighting::inverse_frequency) {
        cw_nontarget = static_cast<double>(n_target) / static_cast<double>(n_nontarget);
    } else {
        cw_target = cfg.weight_target;
        cw_nontarget = cfg.weight_nontarget;
    }

    TrainResult res;
    res.params = init_params(model_seed, cfg.H, cfg.head, static_cast<int>(C),
                             static_cast<int>(T));
    res.best_val_bac = std::numeric_limits<double>::quiet_NaN();
    if (cfg.epochs == 0) return res;

    // Stratified validation split.
    std::vector<size_t> train_idx, val_idx;
    if (cfg.val_fraction > 0) {
        std::vector<size_t> by_class[2];
        for (size_t i = 0; i < windows.size(); ++i) by_class[windows[i].label].push_back(i);
        Rng split_rng(mix_seed(cfg.seed, kTagValSplit));
        for (auto& cls : by_class) {
            if (cls.size() < 2)
                throw InputError("train: each class needs >= 2 windows for a validation split");
            split_rng.shuffle(cls);
            size_t n_val = static_cast<size_t>(
                std::llround(cfg.val_fraction * static_cast<double>(cls.size())));
            n_val = std::max<size_t>(1, std::min(n_val, cls.size() - 1));
            val_idx.insert(val_idx.end(), cls.begin(), cls.begin() + n_val);
            train_idx.insert(train_idx.end(), cls.begin() + n_val, cls.end());
        }
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(val_idx.begin(), val_idx.end());
    } else {
        train_idx.resize(windows.size());
        std::iota(train_idx.begin(), train_idx.end(), 0);
    }
    std::vector<EEGWindow> val_set;
    for (size_t i : val_idx) val_set.push_back(windows[i]);

    Rng shuffle_rng(mix_seed(cfg.seed, kTagShuffle));
    NadamState opt;
    ModelParams best_params = res.params;
    double best = -1.0;
    int bad_epochs = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(train_idx);
        double loss_sum = 0.0;
        for (size_t b = 0; b < train_idx.size(); b += cfg.batch_size) {
            const size_t bend = std::min(train_idx.size(), b + cfg.batch_size);
            Gradients acc = zero_like(res.params);
            for (size_t k = b; k < bend; ++k) {
                const EEGWindow& w = windows[train_idx[k]];
                const ForwardTrace tr = forward(res.params, w.data);
                const Gradients g =
                    backward(res.params, tr, w.data, w.label,
                             w.label ? cw_target : cw_nontarget, cfg.lambda_input,
                             cfg.lambda_prm);
                accumulate(acc, g);
                loss_sum += g.loss;
            }
            scale(acc, 1.0 / static_cast<double>(bend - b));
            nadam_step(opt, res.params, acc, cfg.learning_rate);
        }

        EpochStat st;
        st.epoch = epoch;
        st.train_loss = loss_sum / static_cast<double>(train_idx.size());
        st.val_bac = std::numeric_limits<double>::quiet_NaN();
        if (!val_set.empty()) {
            st.val_bac = balanced_accuracy(evaluate(res.params, val_set)).bac;
            if (st.val_bac > best) {
                best = st.val_bac;
                best_params = res.params;
                res.best_epoch = epoch;
                bad_epochs = 0;
            } else {
                ++bad_epochs;
            }
        }
        res.history.push_back(st);
        if (!val_set.empty() && bad_epochs >= cfg.patience) break;
    }

    if (!val_set.empty()) {
        res.params = std::move(best_params);
        res.best_val_bac = best;
    }
    return res;
}

CvResult kfold_cv(const std::vector<SessionGroup>& sessions, const TrainConfig& cfg, int K,
                  int jobs) {
    if (static_cast<int>(sessions.size()) != K)
        throw InputError("kfold_cv: found " + std::to_string(sessions.size()) +
                         " session groups, expected K=" + std::to_string(K));

    CvResult cv;
    cv.reports.resize(K);
    cv.models.resize(K);

    std::exception_ptr error;
    std::mutex error_mu;
    auto run_fold = [&](int k) {
        try {
            std::vector<EEGWindow> train_windows;
            for (int i = 0; i < K; ++i) {
                if (i == k) continue;
                train_windows.insert(train_windows.end(), sessions[i].windows.begin(),
                                     sessions[i].windows.end());
            }
            TrainConfig fold_cfg = cfg;
            fold_cfg.seed = mix_seed(cfg.seed, kTagFold, static_cast<uint64_t>(k));
            TrainResult tr = train(fold_cfg.seed, train_windows, fold_cfg);

            const BacResult bac = balanced_accuracy(evaluate(tr.params, sessions[k].windows));
            FoldReport rep;
            rep.fold_index = k + 1;
            rep.test_session = sessions[k].session;
            rep.bac = bac.bac;
            rep.recall = bac.recall;
            rep.specificity = bac.specificity;
            rep.history = tr.history;
            rep.model_path = "fold" + std::to_string(k + 1) + "_model.json";
            rep.seed = fold_cfg.seed;
            cv.reports[k] = std::move(rep);
            cv.models[k] = std::move(tr.params);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!error) error = std::current_exception();
        }
    };

    if (jobs <= 1) {
        for (int k = 0; k < K; ++k) run_fold(k);
    } else {
        for (int base = 0; base < K; base += jobs) {
            std::vector<std::thread> pool;
            for (int k = base; k < std::min(K, base + jobs); ++k) pool.emplace_back(run_fold, k);
            for (std::thread& th : pool) th.join();
        }
    }
    if (error) std::rethrow_exception(error);

    double sum = 0.0;
    for (const FoldReport& r : cv.reports) sum += r.bac;
    cv.mean_bac = sum / K;
    double var = 0.0;
    for (const FoldReport& r : cv.reports) var += (r.bac - cv.mean_bac) * (r.bac - cv.mean_bac);
    cv.std_bac = std::sqrt(var / K);
    return cv;
}

} // namespace p3rnn
