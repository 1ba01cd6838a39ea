#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metrics/metrics.hpp"

namespace cuedecomp {

enum class RecordKind { classification, conflict, segmentation };

struct PredictionRecord {
    std::string model_id;
    std::string variant;
    std::string sample_id;
    RecordKind kind = RecordKind::classification;
    std::string true_class;      // classification
    std::string shape_class;     // conflict
    std::string texture_class;   // conflict
    std::string predicted_class; // classification and conflict
    ConfusionMatrix confusion;   // segmentation
};

struct PredictionLog {
    std::vector<PredictionRecord> records;
    void append(const PredictionLog& other);
};

// .csv is read as CSV, anything else as JSON lines. Errors carry "file:line:".
PredictionLog read_prediction_log(const std::string& path);
PredictionLog parse_prediction_log_jsonl(const std::string& text, const std::string& base_dir,
                                         const std::string& name);
PredictionLog parse_prediction_log_csv(const std::string& text, const std::string& base_dir, const std::string& name);
// One record per (model, variant, sample).
void check_unique_records(const PredictionLog& log);

// Whitespace or comma separated integers, K^2 of them, row-major.
ConfusionMatrix read_confusion_file(const std::string& path);

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};
// RFC 4180 quoting; blank lines are skipped.
std::vector<CsvRow> parse_csv(const std::string& text, const std::string& name);
std::string csv_escape(const std::string& s);

// A model's qualities plus whatever published columns came with them.
struct QualityRow {
    QualityTriple triple;
    std::optional<std::string> group;
    std::optional<double> cue_conflict;
    std::map<std::string, double> rel_rob; // corruption kind -> value
    std::optional<double> rel_rob_mean;
};

// CSV with model_id, q_o, q_s, q_t and optional group, cue_conflict,
// rel_rob_<kind>, rel_rob_mean columns. Other columns are ignored.
std::vector<QualityRow> read_quality_table(const std::string& path);
std::vector<QualityRow> parse_quality_table(const std::string& text, const std::string& name);

} // namespace cuedecomp
