#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metrics/logs.hpp"
#include "metrics/metrics.hpp"

namespace cuedecomp {

struct TableConfig {
    std::string original_variant = "original";
    std::string shape_variant = "eed";
    std::string texture_variant = "voronoi";
    std::string conflict_variant = "conflict";
    // left out of the normalizers and of table-level rank correlations, still reported
    std::vector<std::string> exclude_models;
    std::vector<std::string> exclude_groups;
    std::map<std::string, std::string> model_groups;
    RobustnessMode robustness = RobustnessMode::ratio;
};

nlohmann::ordered_json to_json(const TableConfig& c);
TableConfig table_config_from_json(const nlohmann::json& j, const TableConfig& base = {});

struct MetricRow {
    std::string model_id;
    std::optional<std::string> group;
    QualityTriple triple;
    std::optional<double> s_cd;
    std::optional<double> r_cd;
    std::optional<double> cue_conflict;
    std::map<std::string, double> rel_rob;
    std::optional<double> rel_rob_mean;
    bool normalized = true; // member of the normalization set
};

struct MetricTable {
    std::vector<MetricRow> rows;
    std::vector<std::string> rel_rob_kinds; // column order
    bool has_group = false;
    bool has_cue_conflict = false;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
    std::vector<std::string> warnings;

    const MetricRow* find(const std::string& model_id) const;
};

MetricTable build_table(const PredictionLog& log, const TableConfig& cfg);
MetricTable table_from_qualities(const std::vector<QualityRow>& rows, const TableConfig& cfg);

std::vector<std::string> table_columns(const MetricTable& t);
std::vector<std::string> numeric_columns(const MetricTable& t);
std::optional<double> cell(const MetricRow& r, const std::string& column);
// Over the normalization set, rows where both cells are present.
std::optional<double> table_spearman(const MetricTable& t, const std::string& a, const std::string& b);

std::string format_number(double v); // shortest round-trip form
std::string table_csv(const MetricTable& t);
std::string table_markdown(const MetricTable& t);

} // namespace cuedecomp
