#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "p3rnn/explain.hpp"
#include "p3rnn/model.hpp"
#include "p3rnn/signal.hpp"
#include "p3rnn/train.hpp"

namespace p3rnn::io {

// All writers build the full content in memory and publish it with a
// write-to-temp-then-rename so partial files are never left behind.
void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// Recording CSV: header `time_s,<32 channel names>`, LF endings, microvolts.
std::string recording_to_csv(const Recording& rec);
Recording recording_from_csv(const std::string& text, const std::string& origin);
void save_recording_csv(const std::string& path, const Recording& rec);
Recording load_recording_csv(const std::string& path);

// Schedule CSV: header `onset_s,image_id,is_target,run,trial`.
std::string schedule_to_csv(const StimulusSchedule& s);
StimulusSchedule schedule_from_csv(const std::string& text, const std::string& origin);
void save_schedule_csv(const std::string& path, const StimulusSchedule& s);
StimulusSchedule load_schedule_csv(const std::string& path);

// Window dataset NDJSON: one object per window, data row-major time x electrode.
std::string windows_to_ndjson(const std::vector<EEGWindow>& windows);
std::vector<EEGWindow> windows_from_ndjson(const std::string& text, const std::string& origin);
void save_windows_ndjson(const std::string& path, const std::vector<EEGWindow>& windows);
std::vector<EEGWindow> load_windows_ndjson(const std::string& path);

// Model JSON, schema "p300-prm-model/1", numbers at 17 significant digits.
struct LoadedModel {
    ModelParams params;
    nlohmann::json train_meta;
};
std::string model_to_json(const ModelParams& params, const nlohmann::json& train_meta);
LoadedModel model_from_json(const std::string& text, const std::string& origin);
void save_model(const std::string& path, const ModelParams& params,
                const nlohmann::json& train_meta);
LoadedModel load_model(const std::string& path);

void save_fold_reports(const std::string& path, const std::vector<FoldReport>& reports,
                       double mean_bac, double std_bac);
void save_history_csv(const std::string& path, const std::vector<EpochStat>& history);
void save_eval_report(const std::string& path, const ConfusionCounts& c, const BacResult& b,
                      size_t n_windows, double threshold);

void save_relevance_csv(const std::string& path, const RelevanceVector& r,
                        const std::vector<std::string>& electrode_names);
// Matrix CSV with named rows and 1-based timestep column headers.
void save_matrix_csv(const std::string& path, const Mat& m, const std::string& row_header,
                     const std::vector<std::string>& row_labels);
void save_series_csv(const std::string& path, const std::string& index_header,
                     const std::string& value_header, const std::vector<double>& values);
void save_separability(const std::string& json_path, const std::string& csv_path,
                       const SeparabilityReport& rep);

struct FilterSpec {
    double low_hz = 1.0;
    double high_hz = 12.0;
    int order = 3;
};

// Loads every dataset in a directory: either window NDJSON files (grouped by
// the subject/session fields inside) or sNN_sessK_{recording,schedule}.csv
// pairs run through the preprocessing pipeline. Groups come back sorted by
// (subject, session).
std::vector<SessionGroup> load_dataset(const std::string& dir, const FilterSpec& filter = {});

} // namespace p3rnn::io
