#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "p3rnn/io.hpp"
#include "p3rnn/rng.hpp"
#include "p3rnn/synth.hpp"

using namespace p3rnn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fresh scratch directory per test case, removed on scope exit.
struct TmpDir {
    fs::path path;
    explicit TmpDir(const std::string& name) {
        path = fs::temp_directory_path() / ("p3rnn_io_" + name);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TmpDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

Recording make_recording(uint64_t seed, size_t n_samples, double rate) {
    Recording rec;
    rec.sample_rate_hz = rate;
    rec.channel_names = electrode_names();
    rec.samples = Mat(n_samples, kNumElectrodes);
    Rng rng(seed);
    for (double& v : rec.samples.a) v = 10.0 * rng.normal();
    return rec;
}

EEGWindow make_window(uint64_t seed, int label) {
    EEGWindow w;
    w.label = label;
    w.meta.subject = 1;
    w.meta.session = 1;
    w.meta.run = 2;
    w.meta.trial = 3;
    w.meta.image_id = 4;
    w.data = Mat(kWindowSteps, kNumElectrodes);
    Rng rng(seed);
    for (double& v : w.data.a) v = rng.normal();
    return w;
}

} // namespace

TEST_CASE("text files are written atomically and read back") {
    TmpDir dir("text");
    const std::string path = dir / "note.txt";
    io::write_text_atomic(path, "hello\nworld\n");
    CHECK(io::read_text(path) == "hello\nworld\n");
    CHECK_FALSE(fs::exists(path + ".tmp"));

    io::write_text_atomic(path, "shorter");
    CHECK(io::read_text(path) == "shorter");

    CHECK_THROWS_WITH_AS(io::read_text(dir / "absent.txt"), doctest::Contains("cannot read"),
                         InputError);

    // A write that cannot start leaves nothing behind.
    const std::string bad = dir / "no_such_dir/file.txt";
    CHECK_THROWS_WITH_AS(io::write_text_atomic(bad, "x"), doctest::Contains("cannot open"),
                         InputError);
    CHECK_FALSE(fs::exists(bad));
    CHECK_FALSE(fs::exists(bad + ".tmp"));
}

TEST_CASE("recording CSV round-trips and stabilizes after one pass") {
    const Recording rec = make_recording(5, 8, 256);
    const std::string csv = io::recording_to_csv(rec);
    CHECK(csv.rfind("time_s,Fp1,", 0) == 0);

    const Recording back = io::recording_from_csv(csv, "mem.csv");
    CHECK(back.sample_rate_hz == 256.0);
    CHECK(back.channel_names == rec.channel_names);
    REQUIRE(back.samples.rows == 8);
    REQUIRE(back.samples.cols == 32);
    for (size_t k = 0; k < rec.samples.a.size(); ++k)
        CHECK(back.samples.a[k] == doctest::Approx(rec.samples.a[k]).epsilon(1e-8));

    // Values survive a second serialization byte for byte.
    CHECK(io::recording_to_csv(back) == csv);

    TmpDir dir("rec");
    io::save_recording_csv(dir / "r.csv", rec);
    const Recording loaded = io::load_recording_csv(dir / "r.csv");
    CHECK(loaded.sample_rate_hz == 256.0);
    CHECK(loaded.samples.rows == 8);
}

TEST_CASE("recording CSV parse errors name the file and line") {
    const std::string good = io::recording_to_csv(make_recording(6, 4, 128));

    CHECK_THROWS_WITH_AS(io::recording_from_csv("wrong,header\n0,1\n", "f.csv"),
                         doctest::Contains("header must start with time_s"), InputError);
    CHECK_THROWS_WITH_AS(io::recording_from_csv("time_s,a,b,c\n", "f.csv"),
                         doctest::Contains("3 channels, expected 32"), InputError);

    std::string bad_num = good;
    bad_num.replace(bad_num.find("\n") + 1, 1, "x");
    CHECK_THROWS_WITH_AS(io::recording_from_csv(bad_num, "f.csv"),
                         doctest::Contains("f.csv:2"), InputError);

    const std::string header = good.substr(0, good.find('\n') + 1);
    CHECK_THROWS_WITH_AS(io::recording_from_csv(header, "f.csv"),
                         doctest::Contains("at least 2 samples"), InputError);

    // Uneven time column.
    std::string uneven = header;
    std::string row;
    for (int i = 0; i < 32; ++i) row += ",0";
    uneven += "0" + row + "\n";
    uneven += "0.01" + row + "\n";
    uneven += "0.03" + row + "\n";
    CHECK_THROWS_WITH_AS(io::recording_from_csv(uneven, "f.csv"),
                         doctest::Contains("uneven sample spacing"), InputError);

    std::string backwards = header;
    backwards += "0.5" + row + "\n";
    backwards += "0.25" + row + "\n";
    CHECK_THROWS_WITH_AS(io::recording_from_csv(backwards, "f.csv"),
                         doctest::Contains("time column must increase"), InputError);
}

TEST_CASE("schedule CSV round-trips exactly") {
    StimulusSchedule s;
    for (int k = 0; k < 6; ++k) {
        StimEvent ev;
        ev.onset_s = 1.0 + 0.4 * k;
        ev.image_id = k + 1;
        ev.is_target = k == 2;
        ev.run = 1;
        ev.trial = k / 3 + 1;
        s.events.push_back(ev);
    }
    const std::string csv = io::schedule_to_csv(s);
    CHECK(csv.rfind("onset_s,image_id,is_target,run,trial\n", 0) == 0);

    const StimulusSchedule back = io::schedule_from_csv(csv, "mem.csv");
    REQUIRE(back.events.size() == 6);
    for (size_t k = 0; k < 6; ++k) {
        CHECK(back.events[k].onset_s == s.events[k].onset_s);
        CHECK(back.events[k].image_id == s.events[k].image_id);
        CHECK(back.events[k].is_target == s.events[k].is_target);
        CHECK(back.events[k].run == s.events[k].run);
        CHECK(back.events[k].trial == s.events[k].trial);
    }
    CHECK(io::schedule_to_csv(back) == csv);

    // CRLF input parses the same way.
    std::string crlf;
    for (char c : csv) {
        if (c == '\n') crlf += '\r';
        crlf += c;
    }
    CHECK(io::schedule_from_csv(crlf, "mem.csv").events.size() == 6);

    CHECK(io::schedule_from_csv("onset_s,image_id,is_target,run,trial\n", "mem.csv")
              .events.empty());

    CHECK_THROWS_WITH_AS(io::schedule_from_csv("onset,id\n", "f.csv"),
                         doctest::Contains("unexpected schedule header"), InputError);
    CHECK_THROWS_WITH_AS(
        io::schedule_from_csv("onset_s,image_id,is_target,run,trial\n1.0,2,1,1\n", "f.csv"),
        doctest::Contains("expected 5 fields"), InputError);
    CHECK_THROWS_WITH_AS(
        io::schedule_from_csv("onset_s,image_id,is_target,run,trial\n1.0,2,7,1,1\n", "f.csv"),
        doctest::Contains("is_target must be 0 or 1"), InputError);

    TmpDir dir("sched");
    io::save_schedule_csv(dir / "s.csv", s);
    CHECK(io::load_schedule_csv(dir / "s.csv").events.size() == 6);
}

TEST_CASE("window NDJSON round-trips and reports bad lines") {
    std::vector<EEGWindow> wins = {make_window(1, 1), make_window(2, 0)};
    wins[1].meta.subject = 3;
    wins[1].meta.session = 2;
    const std::string nd = io::windows_to_ndjson(wins);

    const std::vector<EEGWindow> back = io::windows_from_ndjson(nd, "mem.ndjson");
    REQUIRE(back.size() == 2);
    CHECK(back[0].label == 1);
    CHECK(back[1].meta.subject == 3);
    CHECK(back[1].meta.session == 2);
    CHECK(back[0].meta.image_id == 4);
    for (size_t k = 0; k < wins[0].data.a.size(); ++k)
        CHECK(back[0].data.a[k] == doctest::Approx(wins[0].data.a[k]).epsilon(1e-10));
    CHECK(io::windows_to_ndjson(back) == nd);

    // Blank lines are ignored.
    CHECK(io::windows_from_ndjson("\n" + nd + "\n", "mem.ndjson").size() == 2);

    CHECK_THROWS_WITH_AS(io::windows_from_ndjson("{not json\n", "f.ndjson"),
                         doctest::Contains("f.ndjson:1"), InputError);

    json j = json::parse(nd.substr(0, nd.find('\n')));
    json short_rows = j;
    short_rows["data"].erase(31);
    CHECK_THROWS_WITH_AS(io::windows_from_ndjson(short_rows.dump() + "\n", "f.ndjson"),
                         doctest::Contains("32 rows"), InputError);

    json short_cols = j;
    short_cols["data"][4].erase(31);
    CHECK_THROWS_WITH_AS(io::windows_from_ndjson(short_cols.dump() + "\n", "f.ndjson"),
                         doctest::Contains("32 values"), InputError);

    json bad_label = j;
    bad_label["label"] = 2;
    CHECK_THROWS_WITH_AS(io::windows_from_ndjson(bad_label.dump() + "\n", "f.ndjson"),
                         doctest::Contains("label must be 0 or 1"), InputError);

    json missing = j;
    missing.erase("trial");
    CHECK_THROWS_AS(io::windows_from_ndjson(missing.dump() + "\n", "f.ndjson"), InputError);

    TmpDir dir("nd");
    io::save_windows_ndjson(dir / "w.ndjson", wins);
    CHECK(io::load_windows_ndjson(dir / "w.ndjson").size() == 2);
}

TEST_CASE("model JSON round-trips parameters exactly") {
    ModelParams P = init_params(11, 4, Head::PRM, 3, 6);
    P.b_y = 0.1234567890123456789;
    P.b_p = -2.5e-7;
    for (size_t k = 0; k < P.w_p.size(); ++k) P.w_p[k] = 0.01 * static_cast<double>(k) - 0.02;
    const json meta = {{"seed", 7}, {"epochs_run", 3}};

    const std::string text = io::model_to_json(P, meta);
    const io::LoadedModel lm = io::model_from_json(text, "m.json");
    CHECK(lm.params.H == 4);
    CHECK(lm.params.C == 3);
    CHECK(lm.params.T == 6);
    CHECK(lm.params.head == Head::PRM);
    CHECK(lm.params.W_xh.a == P.W_xh.a);
    CHECK(lm.params.W_hh.a == P.W_hh.a);
    CHECK(lm.params.b_h == P.b_h);
    CHECK(lm.params.w_hy == P.w_hy);
    CHECK(lm.params.b_y == P.b_y);
    CHECK(lm.params.w_p == P.w_p);
    CHECK(lm.params.b_p == P.b_p);
    CHECK(lm.train_meta == meta);
    CHECK(io::model_to_json(lm.params, lm.train_meta) == text);

    // LastStep models carry no temporal head weights at all.
    ModelParams L = init_params(12, 4, Head::LastStep, 3, 6);
    const std::string ltext = io::model_to_json(L, json::object());
    CHECK(ltext.find("w_p") == std::string::npos);
    const io::LoadedModel ll = io::model_from_json(ltext, "m.json");
    CHECK(ll.params.head == Head::LastStep);
    CHECK(ll.params.w_p.empty());

    TmpDir dir("model");
    io::save_model(dir / "m.json", P, meta);
    const io::LoadedModel fromdisk = io::load_model(dir / "m.json");
    CHECK(fromdisk.params.W_xh.a == P.W_xh.a);
}

TEST_CASE("model JSON rejects schema violations") {
    ModelParams P = init_params(13, 3, Head::PRM, 2, 4);
    const json base = json::parse(io::model_to_json(P, json::object()));

    auto mutate = [&](const char* key, json v) {
        json j = base;
        j[key] = std::move(v);
        return j.dump();
    };

    CHECK_THROWS_WITH_AS(io::model_from_json("{broken", "f.json"), doctest::Contains("f.json"),
                         InputError);
    CHECK_THROWS_WITH_AS(io::model_from_json(mutate("schema", "other/9"), "f.json"),
                         doctest::Contains("unsupported schema"), InputError);
    CHECK_THROWS_WITH_AS(io::model_from_json(mutate("head", "avg"), "f.json"),
                         doctest::Contains("head must be"), InputError);
    CHECK_THROWS_WITH_AS(io::model_from_json(mutate("H", 0), "f.json"),
                         doctest::Contains("bad dimensions"), InputError);

    json ragged = base;
    ragged["W_xh"][1].erase(2);
    CHECK_THROWS_WITH_AS(io::model_from_json(ragged.dump(), "f.json"),
                         doctest::Contains("W_xh row 1"), InputError);

    json whh = base;
    whh["W_hh"].erase(2);
    CHECK_THROWS_WITH_AS(io::model_from_json(whh.dump(), "f.json"),
                         doctest::Contains("W_hh shape mismatch"), InputError);

    json bh = base;
    bh["b_h"].push_back(0.0);
    CHECK_THROWS_WITH_AS(io::model_from_json(bh.dump(), "f.json"),
                         doctest::Contains("length mismatch"), InputError);

    json wp = base;
    wp["w_p"].erase(3);
    CHECK_THROWS_WITH_AS(io::model_from_json(wp.dump(), "f.json"),
                         doctest::Contains("w_p length mismatch"), InputError);

    json nokey = base;
    nokey.erase("b_y");
    CHECK_THROWS_AS(io::model_from_json(nokey.dump(), "f.json"), InputError);

    // train_meta is optional and defaults to an empty object.
    json nometa = base;
    nometa.erase("train_meta");
    CHECK(io::model_from_json(nometa.dump(), "f.json").train_meta == json::object());
}

TEST_CASE("report writers emit the documented formats") {
    TmpDir dir("reports");

    std::vector<EpochStat> hist(2);
    hist[0] = {1, 0.5, 0.75};
    hist[1] = {2, 0.25, std::numeric_limits<double>::quiet_NaN()};

    io::save_history_csv(dir / "h.csv", hist);
    const std::string hcsv = io::read_text(dir / "h.csv");
    CHECK(hcsv == "epoch,train_loss,val_bac\n1,0.5,0.75\n2,0.25,nan\n");

    FoldReport r1;
    r1.fold_index = 1;
    r1.test_session = 1;
    r1.bac = 0.8;
    r1.recall = 0.7;
    r1.specificity = 0.9;
    r1.history = hist;
    r1.model_path = "fold1_model.json";
    r1.seed = 42;
    io::save_fold_reports(dir / "folds.json", {r1}, 0.8, 0.0);
    const json folds = json::parse(io::read_text(dir / "folds.json"));
    REQUIRE(folds.is_array());
    REQUIRE(folds.size() == 2);
    CHECK(folds[0]["fold_index"] == 1);
    CHECK(folds[0]["model_path"] == "fold1_model.json");
    CHECK(folds[0]["history"][1]["val_bac"].is_null());
    CHECK(folds[1]["mean_bac"] == doctest::Approx(0.8));
    CHECK(folds[1]["std_bac"] == doctest::Approx(0.0));

    ConfusionCounts c;
    c.tp = 3;
    c.fn = 1;
    c.tn = 10;
    c.fp = 10;
    io::save_eval_report(dir / "eval.json", c, balanced_accuracy(c), 24, 0.5);
    const json ev = json::parse(io::read_text(dir / "eval.json"));
    CHECK(ev["bac"] == doctest::Approx(0.625));
    CHECK(ev["tp"] == 3);
    CHECK(ev["n_windows"] == 24);
    CHECK(ev["threshold"] == doctest::Approx(0.5));

    RelevanceVector rv;
    rv.per_electrode = {1.0, 0.25};
    io::save_relevance_csv(dir / "rel.csv", rv, {"Cz", "Pz"});
    CHECK(io::read_text(dir / "rel.csv") == "electrode,relevance\nCz,1\nPz,0.25\n");
    CHECK_THROWS_WITH_AS(io::save_relevance_csv(dir / "rel.csv", rv, {"Cz"}),
                         doctest::Contains("label count mismatch"), InputError);

    Mat m(2, 3);
    m.a = {1, 2, 3, 4, 5, 6};
    io::save_matrix_csv(dir / "m.csv", m, "electrode", {"Cz", "Pz"});
    CHECK(io::read_text(dir / "m.csv") == "electrode,1,2,3\nCz,1,2,3\nPz,4,5,6\n");
    CHECK_THROWS_WITH_AS(io::save_matrix_csv(dir / "m.csv", m, "electrode", {"Cz"}),
                         doctest::Contains("label count mismatch"), InputError);

    io::save_series_csv(dir / "s.csv", "timestep", "abs_weight", {0.5, 1.5});
    CHECK(io::read_text(dir / "s.csv") == "timestep,abs_weight\n1,0.5\n2,1.5\n");

    SeparabilityReport rep;
    rep.mode = LdaMode::concat_states;
    rep.fisher_j = 2.5;
    rep.shrinkage_gamma = 0.1;
    rep.projections = {0.5, -1.0};
    rep.labels = {1, 0};
    io::save_separability(dir / "sep.json", dir / "sep.csv", rep);
    const json sj = json::parse(io::read_text(dir / "sep.json"));
    CHECK(sj["mode"] == "concat_states");
    CHECK(sj["fisher_j"] == doctest::Approx(2.5));
    CHECK(sj["n_windows"] == 2);
    CHECK(io::read_text(dir / "sep.csv") == "index,label,projection\n0,1,0.5\n1,0,-1\n");
}

TEST_CASE("load_dataset groups NDJSON windows by subject and session") {
    TmpDir dir("load_nd");
    EEGWindow a = make_window(1, 1); // subject 1, session 1
    EEGWindow b = make_window(2, 0);
    b.meta.session = 2;
    EEGWindow c = make_window(3, 0);
    EEGWindow d = make_window(4, 1);
    d.meta.subject = 2;
    io::save_windows_ndjson(dir / "one.ndjson", {a, b});
    io::save_windows_ndjson(dir / "two.ndjson", {c, d});

    const std::vector<SessionGroup> groups = io::load_dataset(dir.path.string());
    REQUIRE(groups.size() == 3);
    CHECK(groups[0].subject == 1);
    CHECK(groups[0].session == 1);
    CHECK(groups[0].windows.size() == 2); // merged across files
    CHECK(groups[1].subject == 1);
    CHECK(groups[1].session == 2);
    CHECK(groups[2].subject == 2);
    CHECK(groups[2].session == 1);
}

TEST_CASE("load_dataset runs recording pairs through preprocessing") {
    TmpDir dir("load_rec");
    const SubjectProfile prof = sample_subject(3);
    SynthConfig cfg;
    cfg.runs_per_session = 1;
    cfg.trials_per_run = 2;
    cfg.sample_rate_hz = 128;
    cfg.seed = 9;
    const auto [rec, sched] = generate_session(prof, cfg, 1, 1);
    io::save_recording_csv(dir / "s01_sess1_recording.csv", rec);
    io::save_schedule_csv(dir / "s01_sess1_schedule.csv", sched);

    const std::vector<SessionGroup> groups = io::load_dataset(dir.path.string());
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].subject == 1);
    CHECK(groups[0].session == 1);
    REQUIRE(groups[0].windows.size() == 12);
    int targets = 0;
    for (const EEGWindow& w : groups[0].windows) {
        CHECK(w.data.rows == kWindowSteps);
        CHECK(w.data.cols == kNumElectrodes);
        CHECK(w.meta.subject == 1);
        targets += w.label;
    }
    CHECK(targets == 2);
}

TEST_CASE("load_dataset rejects broken directories") {
    TmpDir dir("load_bad");
    CHECK_THROWS_WITH_AS(io::load_dataset(dir / "missing"), doctest::Contains("not a directory"),
                         InputError);
    CHECK_THROWS_WITH_AS(io::load_dataset(dir.path.string()),
                         doctest::Contains("no window .ndjson or"), InputError);

    io::write_text_atomic(dir / "weird_recording.csv", "x\n");
    CHECK_THROWS_WITH_AS(io::load_dataset(dir.path.string()),
                         doctest::Contains("must be named"), InputError);
    fs::remove(fs::path(dir / "weird_recording.csv"));

    const Recording rec = make_recording(8, 64, 128);
    io::save_recording_csv(dir / "s01_sess1_recording.csv", rec);
    CHECK_THROWS_WITH_AS(io::load_dataset(dir.path.string()),
                         doctest::Contains("missing schedule file"), InputError);
}

TEST_CASE("load_dataset prefers NDJSON when both kinds are present") {
    TmpDir dir("load_mixed");
    io::save_windows_ndjson(dir / "w.ndjson", {make_window(5, 1)});
    // An unparseable recording pair proves CSVs are not even opened.
    io::write_text_atomic(dir / "s01_sess1_recording.csv", "garbage\n");
    const std::vector<SessionGroup> groups = io::load_dataset(dir.path.string());
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].windows.size() == 1);
}
