#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "p3rnn/explain.hpp"
#include "p3rnn/io.hpp"
#include "p3rnn/model.hpp"
#include "p3rnn/rng.hpp"
#include "p3rnn/svg.hpp"
#include "p3rnn/synth.hpp"
#include "p3rnn/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace p3rnn;

namespace {

std::string config_scalar(const json& v, const std::string& path, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw InputError(path + ": config key '" + key + "' must be a scalar or array of scalars");
}

// Applies a flat JSON object of long-option values ({"lambda-prm": 0.01}) to
// options not already set on the command line, so flags beat the config file
// and the config file beats built-in defaults. Unknown keys are rejected.
void apply_json_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    json j;
    try {
        j = json::parse(io::read_text(path));
    } catch (const json::exception& ex) {
        throw InputError(path + ": not valid JSON: " + std::string(ex.what()));
    }
    if (!j.is_object()) throw InputError(path + ": config file must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        CLI::Option* opt =
            it.key() == "config" ? nullptr : sub->get_option_no_throw("--" + it.key());
        if (opt == nullptr)
            throw CLI::ConfigError(path + ": unknown config key '" + it.key() + "'");
        if (opt->count() > 0) continue;
        if (it.value().is_array())
            for (const json& e : it.value()) opt->add_result(config_scalar(e, path, it.key()));
        else
            opt->add_result(config_scalar(it.value(), path, it.key()));
        opt->run_callback();
    }
}

// Required-path checks run after the config file is applied, so required
// values may come from either source; CLI11's own ->required() would fire
// before the config file is read.
void require_opts(CLI::App* sub, std::initializer_list<const char*> names) {
    for (const char* name : names)
        if (sub->count(name) == 0) throw CLI::RequiredError(name);
}

void log_wrote(const std::string& path) { std::printf("wrote %s\n", path.c_str()); }

json num_or_null(double v) { return std::isnan(v) ? json() : json(v); }

std::string session_stem(int subject, int session) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "s%02d_sess%d", subject, session);
    return buf;
}

std::vector<std::string> channel_labels(int c) {
    if (c == kNumElectrodes) return electrode_names();
    std::vector<std::string> out;
    for (int i = 1; i <= c; ++i) out.push_back("c" + std::to_string(i));
    return out;
}

std::vector<std::string> index_labels(int n) {
    std::vector<std::string> out;
    for (int i = 1; i <= n; ++i) out.push_back(std::to_string(i));
    return out;
}

std::vector<SessionGroup> load_groups(const std::string& data, int subject) {
    std::vector<SessionGroup> groups = io::load_dataset(data);
    if (subject > 0) {
        std::vector<SessionGroup> kept;
        for (SessionGroup& g : groups)
            if (g.subject == subject) kept.push_back(std::move(g));
        if (kept.empty())
            throw InputError(data + ": no sessions for subject " + std::to_string(subject));
        return kept;
    }
    return groups;
}

std::vector<EEGWindow> concat_windows(std::vector<SessionGroup>& groups) {
    std::vector<EEGWindow> all;
    for (SessionGroup& g : groups)
        all.insert(all.end(), std::make_move_iterator(g.windows.begin()),
                   std::make_move_iterator(g.windows.end()));
    return all;
}

// ------------------------------------------------------------------ synth ---

struct SynthArgs {
    SynthConfig cfg;
    std::string out, config;
    double latency = 0, latency_jitter = 0, amplitude = 0, amplitude_jitter = 0, width = 0;
    double noise_std = 0, alpha = 0, distractor = 0;
    std::vector<std::string> electrodes;
};

void setup_synth(CLI::App& app) {
    auto a = std::make_shared<SynthArgs>();
    CLI::App* sub = app.add_subcommand("synth", "Generate synthetic oddball sessions");
    sub->add_option("--subjects", a->cfg.subjects, "number of subjects");
    sub->add_option("--sessions", a->cfg.sessions_per_subject, "sessions per subject");
    sub->add_option("--runs", a->cfg.runs_per_session, "runs per session");
    sub->add_option("--trials", a->cfg.trials_per_run, "trials per run");
    sub->add_option("--isi-ms", a->cfg.isi_ms, "inter-stimulus interval [ms]");
    sub->add_option("--flash-ms", a->cfg.flash_ms, "image flash duration [ms]");
    sub->add_option("--rate", a->cfg.sample_rate_hz, "recording sample rate [Hz]");
    sub->add_option("--seed", a->cfg.seed, "master seed");
    sub->add_option("--out", a->out, "output directory (required)");
    sub->add_option("--latency", a->latency, "mean deflection latency [ms]");
    sub->add_option("--latency-jitter", a->latency_jitter, "per-event latency std [ms]");
    sub->add_option("--amplitude", a->amplitude, "mean deflection amplitude [uV]");
    sub->add_option("--amplitude-jitter", a->amplitude_jitter, "per-event amplitude std [uV]");
    sub->add_option("--width", a->width, "deflection FWHM [ms]");
    sub->add_option("--noise-std", a->noise_std, "white noise std [uV]");
    sub->add_option("--alpha", a->alpha, "10 Hz background amplitude [uV]");
    sub->add_option("--distractor-amplitude", a->distractor,
                    "late bump on non-targets [uV], 0 disables");
    sub->add_option("--electrodes", a->electrodes, "comma-separated active electrode names")
        ->delimiter(',');
    sub->add_option("--config", a->config, "JSON config file; flags take precedence");

    sub->callback([a, sub]() {
        apply_json_config(sub, a->config);
        require_opts(sub, {"--out"});
        fs::create_directories(a->out);
        SubjectOverrides ov;
        if (sub->count("--latency")) ov.p300_latency_ms = a->latency;
        if (sub->count("--latency-jitter")) ov.latency_jitter_ms = a->latency_jitter;
        if (sub->count("--amplitude")) ov.p300_amplitude_uv = a->amplitude;
        if (sub->count("--amplitude-jitter")) ov.amplitude_jitter = a->amplitude_jitter;
        if (sub->count("--width")) ov.p300_width_ms = a->width;
        if (sub->count("--noise-std")) ov.noise_std_uv = a->noise_std;
        if (sub->count("--alpha")) ov.background_alpha_uv = a->alpha;
        if (sub->count("--distractor-amplitude")) ov.distractor_amplitude_uv = a->distractor;
        if (sub->count("--electrodes")) ov.active_electrodes = a->electrodes;

        json manifest;
        manifest["schema"] = "p300-prm-dataset/1";
        manifest["kind"] = "recordings";
        manifest["config"] = {{"subjects", a->cfg.subjects},
                              {"sessions_per_subject", a->cfg.sessions_per_subject},
                              {"runs_per_session", a->cfg.runs_per_session},
                              {"trials_per_run", a->cfg.trials_per_run},
                              {"isi_ms", a->cfg.isi_ms},
                              {"flash_ms", a->cfg.flash_ms},
                              {"sample_rate_hz", a->cfg.sample_rate_hz},
                              {"seed", a->cfg.seed}};
        json subjects = json::array();
        json sessions = json::array();
        for (int s = 1; s <= a->cfg.subjects; ++s) {
            const SubjectProfile prof = sample_subject(
                mix_seed(a->cfg.seed, static_cast<uint64_t>(s), kProfileSeedTag), ov);
            subjects.push_back(
                {{"subject", s},
                 {"p300_latency_ms", prof.p300_latency_ms},
                 {"latency_jitter_ms", prof.latency_jitter_ms},
                 {"p300_amplitude_uv", prof.p300_amplitude_uv},
                 {"amplitude_jitter", prof.amplitude_jitter},
                 {"p300_width_ms", prof.p300_width_ms},
                 {"noise_std_uv", prof.noise_std_uv},
                 {"background_alpha_uv", prof.background_alpha_uv},
                 {"distractor_amplitude_uv", prof.distractor_amplitude_uv},
                 {"electrode_gains", prof.electrode_gains}});
            for (int k = 1; k <= a->cfg.sessions_per_subject; ++k) {
                const auto [rec, sched] = generate_session(prof, a->cfg, s, k);
                const std::string stem = session_stem(s, k);
                const std::string rec_name = stem + "_recording.csv";
                const std::string sched_name = stem + "_schedule.csv";
                io::save_recording_csv(a->out + "/" + rec_name, rec);
                io::save_schedule_csv(a->out + "/" + sched_name, sched);
                sessions.push_back({{"subject", s},
                                    {"session", k},
                                    {"recording", rec_name},
                                    {"schedule", sched_name}});
                log_wrote(a->out + "/" + rec_name);
                log_wrote(a->out + "/" + sched_name);
            }
        }
        manifest["subjects"] = subjects;
        manifest["sessions"] = sessions;
        io::write_text_atomic(a->out + "/manifest.json", manifest.dump(2) + "\n");
        log_wrote(a->out + "/manifest.json");
    });
}

// ------------------------------------------------------------- preprocess ---

void setup_preprocess(CLI::App& app) {
    struct Args {
        std::string data, out, config;
        io::FilterSpec filter;
    };
    auto a = std::make_shared<Args>();
    CLI::App* sub =
        app.add_subcommand("preprocess", "Filter, decimate and window raw recordings");
    sub->add_option("--data", a->data, "input directory (required)");
    sub->add_option("--out", a->out, "output directory (required)");
    sub->add_option("--low", a->filter.low_hz, "bandpass low cutoff [Hz]");
    sub->add_option("--high", a->filter.high_hz, "bandpass high cutoff [Hz]");
    sub->add_option("--order", a->filter.order, "filter prototype order");
    sub->add_option("--config", a->config, "JSON config file; flags take precedence");

    sub->callback([a, sub]() {
        apply_json_config(sub, a->config);
        require_opts(sub, {"--data", "--out"});
        std::vector<SessionGroup> groups = io::load_dataset(a->data, a->filter);
        fs::create_directories(a->out);
        json manifest;
        manifest["schema"] = "p300-prm-dataset/1";
        manifest["kind"] = "windows";
        manifest["filter"] = {{"low_hz", a->filter.low_hz},
                              {"high_hz", a->filter.high_hz},
                              {"prototype_order", a->filter.order}};
        json sessions = json::array();
        for (const SessionGroup& g : groups) {
            const std::string name = session_stem(g.subject, g.session) + "_windows.ndjson";
            io::save_windows_ndjson(a->out + "/" + name, g.windows);
            sessions.push_back({{"subject", g.subject},
                                {"session", g.session},
                                {"windows", name},
                                {"n_windows", g.windows.size()}});
            log_wrote(a->out + "/" + name);
        }
        manifest["sessions"] = sessions;
        io::write_text_atomic(a->out + "/manifest.json", manifest.dump(2) + "\n");
        log_wrote(a->out + "/manifest.json");
    });
}

// ------------------------------------------------------------------ train ---

struct TrainArgs {
    std::string data, out, config, head = "prm";
    TrainConfig cfg;
    int folds = 0, jobs = 1, subject = 0;
};

json train_meta_json(const TrainConfig& cfg, const TrainResult& res, size_t n_windows) {
    return {{"batch_size", cfg.batch_size},
            {"best_val_bac", num_or_null(res.best_val_bac)},
            {"epochs_run", res.history.size()},
            {"head", cfg.head == Head::PRM ? "prm" : "last"},
            {"hidden", cfg.H},
            {"lambda_input", cfg.lambda_input},
            {"lambda_prm", cfg.lambda_prm},
            {"learning_rate", cfg.learning_rate},
            {"n_train_windows", n_windows},
            {"patience", cfg.patience},
            {"seed", cfg.seed},
            {"val_fraction", cfg.val_fraction}};
}

void add_train_options(CLI::App* sub, TrainArgs& a) {
    sub->add_option("--data", a.data, "dataset directory (required)");
    sub->add_option("--out", a.out, "output directory (required)");
    sub->add_option("--head", a.head, "prediction head")
        ->check(CLI::IsMember({"last", "prm"}));
    sub->add_option("--lambda-input", a.cfg.lambda_input, "L1 penalty on input weights");
    sub->add_option("--lambda-prm", a.cfg.lambda_prm, "L1 penalty on PRM weights");
    sub->add_option("--epochs", a.cfg.epochs, "maximum training epochs");
    sub->add_option("--patience", a.cfg.patience, "early-stopping patience [epochs]");
    sub->add_option("--batch-size", a.cfg.batch_size, "mini-batch size");
    sub->add_option("--lr", a.cfg.learning_rate, "learning rate");
    sub->add_option("--hidden", a.cfg.H, "recurrent units");
    sub->add_option("--val-fraction", a.cfg.val_fraction, "stratified validation fraction");
    sub->add_option("--seed", a.cfg.seed, "master seed");
    sub->add_option("--subject", a.subject, "restrict to one subject (0 = all)");
}

void setup_train(CLI::App& app) {
    auto a = std::make_shared<TrainArgs>();
    CLI::App* sub = app.add_subcommand("train", "Train models, optionally with session CV");
    add_train_options(sub, *a);
    sub->add_option("--folds", a->folds, "session-level CV folds (0 = single model)");
    sub->add_option("--jobs", a->jobs, "concurrent fold jobs")->check(CLI::PositiveNumber);
    sub->add_option("--config", a->config, "JSON config file; flags take precedence");

    sub->callback([a, sub]() {
        apply_json_config(sub, a->config);
        require_opts(sub, {"--data", "--out"});
        a->cfg.head = a->head == "prm" ? Head::PRM : Head::LastStep;
        std::vector<SessionGroup> groups = load_groups(a->data, a->subject);
        fs::create_directories(a->out);

        if (a->folds > 0) {
            if (static_cast<int>(groups.size()) != a->folds)
                throw InputError("found " + std::to_string(groups.size()) +
                                 " session groups in " + a->data + " but --folds is " +
                                 std::to_string(a->folds));
            const CvResult cv = kfold_cv(groups, a->cfg, a->folds, a->jobs);
            for (int k = 0; k < a->folds; ++k) {
                size_t n_train = 0;
                for (int i = 0; i < a->folds; ++i)
                    if (i != k) n_train += groups[i].windows.size();
                TrainConfig fold_cfg = a->cfg;
                fold_cfg.seed = cv.reports[k].seed;
                TrainResult stub;
                stub.history = cv.reports[k].history;
                stub.best_val_bac = std::numeric_limits<double>::quiet_NaN();
                for (const EpochStat& s : cv.reports[k].history)
                    if (!std::isnan(s.val_bac) &&
                        !(s.val_bac <= stub.best_val_bac)) // NaN-safe max
                        stub.best_val_bac = s.val_bac;
                io::save_model(a->out + "/" + cv.reports[k].model_path, cv.models[k],
                               train_meta_json(fold_cfg, stub, n_train));
                log_wrote(a->out + "/" + cv.reports[k].model_path);
                const std::string hist = a->out + "/fold" + std::to_string(k + 1) +
                                         "_history.csv";
                io::save_history_csv(hist, cv.reports[k].history);
                log_wrote(hist);
            }
            io::save_fold_reports(a->out + "/fold_reports.json", cv.reports, cv.mean_bac,
                                  cv.std_bac);
            log_wrote(a->out + "/fold_reports.json");
            std::printf("mean BAC %.4f +- %.4f over %d folds\n", cv.mean_bac, cv.std_bac,
                        a->folds);
        } else {
            std::vector<EEGWindow> all = concat_windows(groups);
            const TrainResult res = train(a->cfg.seed, all, a->cfg);
            io::save_model(a->out + "/model.json", res.params,
                           train_meta_json(a->cfg, res, all.size()));
            log_wrote(a->out + "/model.json");
            io::save_history_csv(a->out + "/history.csv", res.history);
            log_wrote(a->out + "/history.csv");
        }
    });
}

// ------------------------------------------------------------------- eval ---

void setup_eval(CLI::App& app) {
    struct Args {
        std::string model, data, out, config;
        int subject = 0;
    };
    auto a = std::make_shared<Args>();
    CLI::App* sub = app.add_subcommand("eval", "Evaluate a saved model on a dataset");
    sub->add_option("--model", a->model, "model JSON file (required)");
    sub->add_option("--data", a->data, "dataset directory (required)");
    sub->add_option("--out", a->out, "output directory (required)");
    sub->add_option("--subject", a->subject, "restrict to one subject (0 = all)");
    sub->add_option("--config", a->config, "JSON config file; flags take precedence");

    sub->callback([a, sub]() {
        apply_json_config(sub, a->config);
        require_opts(sub, {"--model", "--data", "--out"});
        const io::LoadedModel lm = io::load_model(a->model);
        std::vector<SessionGroup> groups = load_groups(a->data, a->subject);
        const std::vector<EEGWindow> all = concat_windows(groups);
        const ConfusionCounts c = evaluate(lm.params, all);
        const BacResult b = balanced_accuracy(c);
        fs::create_directories(a->out);
        io::save_eval_report(a->out + "/eval_report.json", c, b, all.size(), 0.5);
        log_wrote(a->out + "/eval_report.json");
        std::printf("BAC %.4f (recall %.4f, specificity %.4f) on %zu windows\n", b.bac,
                    b.recall, b.specificity, all.size());
    });
}

// ---------------------------------------------------------------- explain ---

void setup_explain(CLI::App& app) {
    struct Args {
        std::string model, data, out, config, format = "both";
        int subject = 0;
    };
    auto a = std::make_shared<Args>();
    CLI::App* sub = app.add_subcommand("explain", "Relevance artifacts for a trained model");
    sub->add_option("--model", a->model, "model JSON file (required)");
    sub->add_option("--data", a->data, "dataset directory (required)");
    sub->add_option("--out", a->out, "output directory (required)");
    sub->add_option("--format", a->format, "artifact format")
        ->check(CLI::IsMember({"csv", "svg", "both"}));
    sub->add_option("--subject", a->subject, "restrict to one subject (0 = all)");
    sub->add_option("--config", a->config, "JSON config file; flags take precedence");

    sub->callback([a, sub]() {
        apply_json_config(sub, a->config);
        require_opts(sub, {"--model", "--data", "--out"});
        const bool csv = a->format != "svg";
        const bool svg_out = a->format != "csv";
        const io::LoadedModel lm = io::load_model(a->model);
        std::vector<SessionGroup> groups = load_groups(a->data, a->subject);
        const std::vector<EEGWindow> all = concat_windows(groups);
        fs::create_directories(a->out);
        const std::vector<std::string> chans = channel_labels(lm.params.C);
        const std::vector<std::string> steps = index_labels(lm.params.T);

        const RelevanceVector rel = global_relevance(lm.params, true);
        if (csv) {
            io::save_relevance_csv(a->out + "/global_relevance.csv", rel, chans);
            log_wrote(a->out + "/global_relevance.csv");
        }
        if (svg_out) {
            io::write_text_atomic(a->out + "/global_relevance.svg",
                                  svg::bar_chart(chans, rel.per_electrode,
                                                 "Global electrode relevance (normalized)"));
            log_wrote(a->out + "/global_relevance.svg");
        }

        if (lm.params.head == Head::PRM) {
            const std::vector<double> prof = prm_profile(lm.params);
            if (csv) {
                io::save_series_csv(a->out + "/prm_profile.csv", "timestep", "abs_weight", prof);
                log_wrote(a->out + "/prm_profile.csv");
            }
            if (svg_out) {
                io::write_text_atomic(a->out + "/prm_profile.svg",
                                      svg::bar_chart(steps, prof, "PRM weight profile |w_p|"));
                log_wrote(a->out + "/prm_profile.svg");
            }
        }

        const struct {
            ClassFilter filter;
            const char* stem;
            const char* title;
        } maps[] = {{ClassFilter::target, "avg_relevance_target", "Mean target relevance"},
                    {ClassFilter::nontarget, "avg_relevance_nontarget",
                     "Mean non-target relevance"}};
        for (const auto& m : maps) {
            const AttributionMap map = average_relevance(lm.params, all, m.filter);
            if (csv) {
                io::save_matrix_csv(a->out + "/" + m.stem + ".csv", map.values, "electrode",
                                    chans);
                log_wrote(a->out + "/" + m.stem + ".csv");
            }
            if (svg_out) {
                io::write_text_atomic(a->out + "/" + m.stem + ".svg",
                                      svg::heatmap(map.values, chans, steps, true, m.title));
                log_wrote(a->out + "/" + m.stem + ".svg");
            }
        }
    });
}

// -------------------------------------------------------------------- lda ---

void setup_lda(CLI::App& app) {
    struct Args {
        std::string model, data, out, config;
        double gamma = 0.1;
        int subject = 0;
    };
    auto a = std::make_shared<Args>();
    CLI::App* sub =
        app.add_subcommand("lda", "Hidden-state separability via shrinkage LDA");
    sub->add_option("--model", a->model, "model JSON file (required)");
    sub->add_option("--data", a->data, "dataset directory (required)");
    sub->add_option("--out", a->out, "output directory (required)");
    sub->add_option("--gamma", a->gamma, "covariance shrinkage in [0,1]");
    sub->add_option("--subject", a->subject, "restrict to one subject (0 = all)");
    sub->add_option("--config", a->config, "JSON config file; flags take precedence");

    sub->callback([a, sub]() {
        apply_json_config(sub, a->config);
        require_opts(sub, {"--model", "--data", "--out"});
        const io::LoadedModel lm = io::load_model(a->model);
        std::vector<SessionGroup> groups = load_groups(a->data, a->subject);
        const std::vector<EEGWindow> all = concat_windows(groups);
        fs::create_directories(a->out);
        const struct {
            LdaMode mode;
            const char* stem;
        } modes[] = {{LdaMode::last_state, "last"}, {LdaMode::concat_states, "concat"}};
        for (const auto& m : modes) {
            const SeparabilityReport rep = lda_separability(lm.params, all, m.mode, a->gamma);
            const std::string jpath = a->out + "/separability_" + m.stem + ".json";
            const std::string cpath = a->out + "/projections_" + m.stem + ".csv";
            io::save_separability(jpath, cpath, rep);
            log_wrote(jpath);
            log_wrote(cpath);
            std::printf("fisher_j(%s) = %.6g\n", m.stem, rep.fisher_j);
        }
    });
}

// ------------------------------------------------------------- hidden-diff ---

void setup_hidden_diff(CLI::App& app) {
    struct Args {
        std::string model, data, out, config, format = "both";
        int subject = 0;
    };
    auto a = std::make_shared<Args>();
    CLI::App* sub = app.add_subcommand(
        "hidden-diff", "Per-neuron class difference of hidden activations");
    sub->add_option("--model", a->model, "model JSON file (required)");
    sub->add_option("--data", a->data, "dataset directory (required)");
    sub->add_option("--out", a->out, "output directory (required)");
    sub->add_option("--format", a->format, "artifact format")
        ->check(CLI::IsMember({"csv", "svg", "both"}));
    sub->add_option("--subject", a->subject, "restrict to one subject (0 = all)");
    sub->add_option("--config", a->config, "JSON config file; flags take precedence");

    sub->callback([a, sub]() {
        apply_json_config(sub, a->config);
        require_opts(sub, {"--model", "--data", "--out"});
        const bool csv = a->format != "svg";
        const bool svg_out = a->format != "csv";
        const io::LoadedModel lm = io::load_model(a->model);
        std::vector<SessionGroup> groups = load_groups(a->data, a->subject);
        const std::vector<EEGWindow> all = concat_windows(groups);
        const HiddenDiff hd = hidden_activation_diff(lm.params, all);
        fs::create_directories(a->out);
        const std::vector<std::string> neurons = index_labels(lm.params.H);
        const std::vector<std::string> steps = index_labels(lm.params.T);
        if (csv) {
            io::save_matrix_csv(a->out + "/hidden_diff_per_neuron.csv", hd.per_neuron, "neuron",
                                neurons);
            log_wrote(a->out + "/hidden_diff_per_neuron.csv");
            io::save_series_csv(a->out + "/hidden_diff_mean.csv", "timestep", "mean_abs_diff",
                                hd.mean_curve);
            log_wrote(a->out + "/hidden_diff_mean.csv");
        }
        if (svg_out) {
            io::write_text_atomic(a->out + "/hidden_diff_per_neuron.svg",
                                  svg::heatmap(hd.per_neuron, neurons, steps, false,
                                               "Hidden activation |target - nontarget|"));
            log_wrote(a->out + "/hidden_diff_per_neuron.svg");
            io::write_text_atomic(a->out + "/hidden_diff_mean.svg",
                                  svg::bar_chart(steps, hd.mean_curve,
                                                 "Mean hidden activation difference"));
            log_wrote(a->out + "/hidden_diff_mean.svg");
        }
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"P300 detection pipeline: Elman RNN with a post-recurrent module"};
    app.require_subcommand(1);
    setup_synth(app);
    setup_preprocess(app);
    setup_train(app);
    setup_eval(app);
    setup_explain(app);
    setup_lda(app);
    setup_hidden_diff(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
