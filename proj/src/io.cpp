#include "p3rnn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

namespace p3rnn::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void append_num(std::string& out, double v, int sig) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
    out += buf;
}

double parse_num(const char*& p, const std::string& origin, size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p)
        throw InputError(origin + ":" + std::to_string(line_no) + ": expected a number");
    p = end;
    return v;
}

void expect_char(const char*& p, char c, const std::string& origin, size_t line_no) {
    if (*p != c)
        throw InputError(origin + ":" + std::to_string(line_no) + ": expected '" +
                         std::string(1, c) + "'");
    ++p;
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == delim) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

// Iterates LF-separated lines without copying the whole file twice.
template <class F>
void for_each_line(const std::string& text, F&& fn) {
    size_t start = 0, line_no = 1;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        fn(text.data() + start, text.data() + end, line_no);
        start = end + 1;
        ++line_no;
    }
}

json num_or_null(double v) { return std::isnan(v) ? json() : json(v); }

} // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw InputError("cannot open " + tmp + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw InputError("failed writing " + tmp);
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("cannot move " + tmp + " into place: " + ec.message());
    }
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read " + path);
    std::string out((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return out;
}

// ------------------------------------------------------------- recording ---

std::string recording_to_csv(const Recording& rec) {
    std::string out = "time_s";
    for (const std::string& name : rec.channel_names) {
        out += ',';
        out += name;
    }
    out += '\n';
    const size_t n = rec.samples.rows, c = rec.samples.cols;
    out.reserve(out.size() + n * (c + 1) * 12);
    for (size_t t = 0; t < n; ++t) {
        append_num(out, static_cast<double>(t) / rec.sample_rate_hz, 12);
        const double* row = rec.samples.row(t);
        for (size_t i = 0; i < c; ++i) {
            out += ',';
            append_num(out, row[i], 9);
        }
        out += '\n';
    }
    return out;
}

Recording recording_from_csv(const std::string& text, const std::string& origin) {
    Recording rec;
    std::vector<double> times;
    std::vector<double> values;
    size_t cols = 0;
    for_each_line(text, [&](const char* b, const char* e, size_t line_no) {
        std::string line(b, e);
        if (line_no == 1) {
            const auto fields = split(line, ',');
            if (fields.empty() || fields[0] != "time_s")
                throw InputError(origin + ": header must start with time_s");
            if (fields.size() != static_cast<size_t>(kNumElectrodes) + 1)
                throw InputError(origin + ": header has " + std::to_string(fields.size() - 1) +
                                 " channels, expected 32");
            rec.channel_names.assign(fields.begin() + 1, fields.end());
            cols = rec.channel_names.size();
            return;
        }
        const char* p = line.c_str();
        times.push_back(parse_num(p, origin, line_no));
        for (size_t i = 0; i < cols; ++i) {
            expect_char(p, ',', origin, line_no);
            values.push_back(parse_num(p, origin, line_no));
        }
        if (*p != '\0' && *p != '\r')
            throw InputError(origin + ":" + std::to_string(line_no) + ": trailing characters");
    });
    if (times.size() < 2) throw InputError(origin + ": needs at least 2 samples");

    const double dt = times[1] - times[0];
    if (!(dt > 0)) throw InputError(origin + ": time column must increase");
    double rate = 1.0 / dt;
    const double snapped = std::llround(rate);
    if (std::abs(rate - snapped) < 1e-6 * std::max(1.0, snapped)) rate = snapped;
    for (size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-4 * dt)
            throw InputError(origin + ":" + std::to_string(i + 2) + ": uneven sample spacing");

    rec.sample_rate_hz = rate;
    rec.samples = Mat(times.size(), cols);
    rec.samples.a = std::move(values);
    return rec;
}

void save_recording_csv(const std::string& path, const Recording& rec) {
    write_text_atomic(path, recording_to_csv(rec));
}

Recording load_recording_csv(const std::string& path) {
    return recording_from_csv(read_text(path), path);
}

// -------------------------------------------------------------- schedule ---

std::string schedule_to_csv(const StimulusSchedule& s) {
    std::string out = "onset_s,image_id,is_target,run,trial\n";
    char buf[128];
    for (const StimEvent& e : s.events) {
        append_num(out, e.onset_s, 12);
        std::snprintf(buf, sizeof(buf), ",%d,%d,%d,%d\n", e.image_id, e.is_target ? 1 : 0, e.run,
                      e.trial);
        out += buf;
    }
    return out;
}

StimulusSchedule schedule_from_csv(const std::string& text, const std::string& origin) {
    StimulusSchedule s;
    for_each_line(text, [&](const char* b, const char* e, size_t line_no) {
        std::string line(b, e);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "onset_s,image_id,is_target,run,trial")
                throw InputError(origin + ": unexpected schedule header '" + line + "'");
            return;
        }
        if (line.empty()) return;
        const auto f = split(line, ',');
        if (f.size() != 5)
            throw InputError(origin + ":" + std::to_string(line_no) + ": expected 5 fields");
        StimEvent ev;
        const char* p = f[0].c_str();
        ev.onset_s = parse_num(p, origin, line_no);
        ev.image_id = std::stoi(f[1]);
        if (f[2] != "0" && f[2] != "1")
            throw InputError(origin + ":" + std::to_string(line_no) + ": is_target must be 0 or 1");
        ev.is_target = f[2] == "1";
        ev.run = std::stoi(f[3]);
        ev.trial = std::stoi(f[4]);
        s.events.push_back(ev);
    });
    return s;
}

void save_schedule_csv(const std::string& path, const StimulusSchedule& s) {
    write_text_atomic(path, schedule_to_csv(s));
}

StimulusSchedule load_schedule_csv(const std::string& path) {
    return schedule_from_csv(read_text(path), path);
}

// --------------------------------------------------------------- windows ---

std::string windows_to_ndjson(const std::vector<EEGWindow>& windows) {
    std::string out;
    out.reserve(windows.size() * 13000);
    char buf[160];
    for (const EEGWindow& w : windows) {
        std::snprintf(buf, sizeof(buf),
                      "{\"subject\":%d,\"session\":%d,\"run\":%d,\"trial\":%d,"
                      "\"image_id\":%d,\"label\":%d,\"data\":[",
                      w.meta.subject, w.meta.session, w.meta.run, w.meta.trial, w.meta.image_id,
                      w.label);
        out += buf;
        for (size_t t = 0; t < w.data.rows; ++t) {
            out += t ? ",[" : "[";
            const double* row = w.data.row(t);
            for (size_t i = 0; i < w.data.cols; ++i) {
                if (i) out += ',';
                append_num(out, row[i], 12);
            }
            out += ']';
        }
        out += "]}\n";
    }
    return out;
}

std::vector<EEGWindow> windows_from_ndjson(const std::string& text, const std::string& origin) {
    std::vector<EEGWindow> out;
    for_each_line(text, [&](const char* b, const char* e, size_t line_no) {
        if (b == e) return;
        json j;
        try {
            j = json::parse(b, e);
        } catch (const json::exception& ex) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": " + ex.what());
        }
        EEGWindow w;
        try {
            w.meta.subject = j.at("subject").get<int>();
            w.meta.session = j.at("session").get<int>();
            w.meta.run = j.at("run").get<int>();
            w.meta.trial = j.at("trial").get<int>();
            w.meta.image_id = j.at("image_id").get<int>();
            w.label = j.at("label").get<int>();
            const json& data = j.at("data");
            if (!data.is_array() || data.size() != kWindowSteps)
                throw InputError("data must have 32 rows");
            w.data = Mat(kWindowSteps, kNumElectrodes);
            for (int t = 0; t < kWindowSteps; ++t) {
                const json& row = data.at(t);
                if (!row.is_array() || row.size() != kNumElectrodes)
                    throw InputError("data rows must have 32 values");
                for (int i = 0; i < kNumElectrodes; ++i) w.data.at(t, i) = row.at(i).get<double>();
            }
        } catch (const json::exception& ex) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": " + ex.what());
        } catch (const InputError& ex) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": " + ex.what());
        }
        if (w.label != 0 && w.label != 1)
            throw InputError(origin + ":" + std::to_string(line_no) + ": label must be 0 or 1");
        out.push_back(std::move(w));
    });
    return out;
}

void save_windows_ndjson(const std::string& path, const std::vector<EEGWindow>& windows) {
    write_text_atomic(path, windows_to_ndjson(windows));
}

std::vector<EEGWindow> load_windows_ndjson(const std::string& path) {
    return windows_from_ndjson(read_text(path), path);
}

// ----------------------------------------------------------------- model ---

namespace {

void append_vec(std::string& out, const double* v, size_t n) {
    out += '[';
    for (size_t i = 0; i < n; ++i) {
        if (i) out += ',';
        append_num(out, v[i], 17);
    }
    out += ']';
}

void append_mat(std::string& out, const Mat& m) {
    out += '[';
    for (size_t r = 0; r < m.rows; ++r) {
        if (r) out += ',';
        append_vec(out, m.row(r), m.cols);
    }
    out += ']';
}

} // namespace

std::string model_to_json(const ModelParams& p, const json& train_meta) {
    std::string out = "{\"schema\":\"p300-prm-model/1\",\"H\":" + std::to_string(p.H) +
                      ",\"T\":" + std::to_string(p.T) + ",\"head\":\"" +
                      (p.head == Head::PRM ? "prm" : "last") + "\",\"W_xh\":";
    append_mat(out, p.W_xh);
    out += ",\"W_hh\":";
    append_mat(out, p.W_hh);
    out += ",\"b_h\":";
    append_vec(out, p.b_h.data(), p.b_h.size());
    out += ",\"w_hy\":";
    append_vec(out, p.w_hy.data(), p.w_hy.size());
    out += ",\"b_y\":";
    append_num(out, p.b_y, 17);
    if (p.head == Head::PRM) {
        out += ",\"w_p\":";
        append_vec(out, p.w_p.data(), p.w_p.size());
        out += ",\"b_p\":";
        append_num(out, p.b_p, 17);
    }
    out += ",\"train_meta\":" + train_meta.dump() + "}\n";
    return out;
}

LoadedModel model_from_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw InputError(origin + ": " + ex.what());
    }
    try {
        if (j.at("schema").get<std::string>() != "p300-prm-model/1")
            throw InputError(origin + ": unsupported schema");
        LoadedModel lm;
        ModelParams& p = lm.params;
        p.H = j.at("H").get<int>();
        p.T = j.at("T").get<int>();
        const std::string head = j.at("head").get<std::string>();
        if (head == "prm")
            p.head = Head::PRM;
        else if (head == "last")
            p.head = Head::LastStep;
        else
            throw InputError(origin + ": head must be \"last\" or \"prm\"");

        const json& wxh = j.at("W_xh");
        p.C = static_cast<int>(wxh.size());
        if (p.C < 1 || p.H < 1 || p.T < 1) throw InputError(origin + ": bad dimensions");
        p.W_xh = Mat(p.C, p.H);
        for (int r = 0; r < p.C; ++r) {
            if (wxh.at(r).size() != static_cast<size_t>(p.H))
                throw InputError(origin + ": W_xh row " + std::to_string(r) + " length mismatch");
            for (int c = 0; c < p.H; ++c) p.W_xh.at(r, c) = wxh.at(r).at(c).get<double>();
        }
        const json& whh = j.at("W_hh");
        if (whh.size() != static_cast<size_t>(p.H))
            throw InputError(origin + ": W_hh shape mismatch");
        p.W_hh = Mat(p.H, p.H);
        for (int r = 0; r < p.H; ++r) {
            if (whh.at(r).size() != static_cast<size_t>(p.H))
                throw InputError(origin + ": W_hh row " + std::to_string(r) + " length mismatch");
            for (int c = 0; c < p.H; ++c) p.W_hh.at(r, c) = whh.at(r).at(c).get<double>();
        }
        p.b_h = j.at("b_h").get<std::vector<double>>();
        p.w_hy = j.at("w_hy").get<std::vector<double>>();
        if (p.b_h.size() != static_cast<size_t>(p.H) || p.w_hy.size() != static_cast<size_t>(p.H))
            throw InputError(origin + ": bias/output vector length mismatch");
        p.b_y = j.at("b_y").get<double>();
        if (p.head == Head::PRM) {
            p.w_p = j.at("w_p").get<std::vector<double>>();
            if (p.w_p.size() != static_cast<size_t>(p.T))
                throw InputError(origin + ": w_p length mismatch");
            p.b_p = j.at("b_p").get<double>();
        }
        lm.train_meta = j.value("train_meta", json::object());
        return lm;
    } catch (const json::exception& ex) {
        throw InputError(origin + ": " + ex.what());
    }
}

void save_model(const std::string& path, const ModelParams& params, const json& train_meta) {
    write_text_atomic(path, model_to_json(params, train_meta));
}

LoadedModel load_model(const std::string& path) {
    return model_from_json(read_text(path), path);
}

// --------------------------------------------------------------- reports ---

namespace {

json history_to_json(const std::vector<EpochStat>& history) {
    json arr = json::array();
    for (const EpochStat& s : history)
        arr.push_back({{"epoch", s.epoch},
                       {"train_loss", s.train_loss},
                       {"val_bac", num_or_null(s.val_bac)}});
    return arr;
}

} // namespace

void save_fold_reports(const std::string& path, const std::vector<FoldReport>& reports,
                       double mean_bac, double std_bac) {
    json arr = json::array();
    for (const FoldReport& r : reports) {
        arr.push_back({{"fold_index", r.fold_index},
                       {"test_session", r.test_session},
                       {"bac", r.bac},
                       {"recall", r.recall},
                       {"specificity", r.specificity},
                       {"history", history_to_json(r.history)},
                       {"model_path", r.model_path},
                       {"seed", r.seed}});
    }
    arr.push_back({{"mean_bac", mean_bac}, {"std_bac", std_bac}});
    write_text_atomic(path, arr.dump(2) + "\n");
}

void save_history_csv(const std::string& path, const std::vector<EpochStat>& history) {
    std::string out = "epoch,train_loss,val_bac\n";
    for (const EpochStat& s : history) {
        out += std::to_string(s.epoch);
        out += ',';
        append_num(out, s.train_loss, 12);
        out += ',';
        append_num(out, s.val_bac, 12);
        out += '\n';
    }
    write_text_atomic(path, out);
}

void save_eval_report(const std::string& path, const ConfusionCounts& c, const BacResult& b,
                      size_t n_windows, double threshold) {
    const json j = {{"bac", b.bac},          {"recall", b.recall},
                    {"specificity", b.specificity}, {"tp", c.tp},
                    {"fp", c.fp},            {"tn", c.tn},
                    {"fn", c.fn},            {"n_windows", n_windows},
                    {"threshold", threshold}};
    write_text_atomic(path, j.dump(2) + "\n");
}

void save_relevance_csv(const std::string& path, const RelevanceVector& r,
                        const std::vector<std::string>& electrode_names) {
    if (r.per_electrode.size() != electrode_names.size())
        throw InputError("save_relevance_csv: label count mismatch");
    std::string out = "electrode,relevance\n";
    for (size_t i = 0; i < r.per_electrode.size(); ++i) {
        out += electrode_names[i];
        out += ',';
        append_num(out, r.per_electrode[i], 12);
        out += '\n';
    }
    write_text_atomic(path, out);
}

void save_matrix_csv(const std::string& path, const Mat& m, const std::string& row_header,
                     const std::vector<std::string>& row_labels) {
    if (row_labels.size() != m.rows) throw InputError("save_matrix_csv: label count mismatch");
    std::string out = row_header;
    for (size_t t = 1; t <= m.cols; ++t) out += "," + std::to_string(t);
    out += '\n';
    for (size_t r = 0; r < m.rows; ++r) {
        out += row_labels[r];
        for (size_t c = 0; c < m.cols; ++c) {
            out += ',';
            append_num(out, m.at(r, c), 12);
        }
        out += '\n';
    }
    write_text_atomic(path, out);
}

void save_series_csv(const std::string& path, const std::string& index_header,
                     const std::string& value_header, const std::vector<double>& values) {
    std::string out = index_header + "," + value_header + "\n";
    for (size_t i = 0; i < values.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        append_num(out, values[i], 12);
        out += '\n';
    }
    write_text_atomic(path, out);
}

void save_separability(const std::string& json_path, const std::string& csv_path,
                       const SeparabilityReport& rep) {
    const json j = {{"mode", rep.mode == LdaMode::last_state ? "last_state" : "concat_states"},
                    {"fisher_j", rep.fisher_j},
                    {"shrinkage_gamma", rep.shrinkage_gamma},
                    {"n_windows", rep.projections.size()}};
    write_text_atomic(json_path, j.dump(2) + "\n");

    std::string out = "index,label,projection\n";
    for (size_t i = 0; i < rep.projections.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += std::to_string(rep.labels[i]);
        out += ',';
        append_num(out, rep.projections[i], 12);
        out += '\n';
    }
    write_text_atomic(csv_path, out);
}

// ---------------------------------------------------------------- loader ---

std::vector<SessionGroup> load_dataset(const std::string& dir, const FilterSpec& filter) {
    if (!fs::is_directory(dir)) throw InputError(dir + " is not a directory");

    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());

    std::map<std::pair<int, int>, std::vector<EEGWindow>> grouped;

    bool found_ndjson = false;
    for (const std::string& name : names) {
        if (name.size() < 7 || name.substr(name.size() - 7) != ".ndjson") continue;
        found_ndjson = true;
        for (EEGWindow& w : load_windows_ndjson(dir + "/" + name))
            grouped[{w.meta.subject, w.meta.session}].push_back(std::move(w));
    }

    if (!found_ndjson) {
        std::map<long, BiquadCascade> cascades;
        const std::string suffix = "_recording.csv";
        for (const std::string& name : names) {
            if (name.size() <= suffix.size() ||
                name.substr(name.size() - suffix.size()) != suffix)
                continue;
            const std::string stem = name.substr(0, name.size() - suffix.size());
            int subject = 0, session = 0;
            if (std::sscanf(stem.c_str(), "s%d_sess%d", &subject, &session) != 2)
                throw InputError(dir + "/" + name +
                                 ": recording files must be named sNN_sessK_recording.csv");
            const std::string sched_path = dir + "/" + stem + "_schedule.csv";
            if (!fs::exists(sched_path))
                throw InputError(dir + "/" + name + ": missing schedule file " + sched_path);

            const Recording rec = load_recording_csv(dir + "/" + name);
            const StimulusSchedule sched = load_schedule_csv(sched_path);
            validate_schedule(sched, rec.sample_rate_hz);

            const long rate = std::lround(rec.sample_rate_hz);
            auto it = cascades.find(rate);
            if (it == cascades.end())
                it = cascades
                         .emplace(rate, design_bandpass(filter.low_hz, filter.high_hz,
                                                        rec.sample_rate_hz, filter.order))
                         .first;
            auto windows = preprocess_recording(rec, sched, it->second, subject, session);
            auto& bucket = grouped[{subject, session}];
            bucket.insert(bucket.end(), std::make_move_iterator(windows.begin()),
                          std::make_move_iterator(windows.end()));
        }
    }

    if (grouped.empty())
        throw InputError(dir + ": no window .ndjson or sNN_sessK_recording.csv files found");

    std::vector<SessionGroup> out;
    for (auto& [key, windows] : grouped) {
        SessionGroup g;
        g.subject = key.first;
        g.session = key.second;
        g.windows = std::move(windows);
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace p3rnn::io
