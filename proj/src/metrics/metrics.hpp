#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cuedecomp {

// Rows are ground truth, columns are predictions.
struct ConfusionMatrix {
    int class_count = 0;
    std::vector<std::int64_t> counts;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int k);
    std::int64_t& at(int truth, int pred) { return counts[std::size_t(truth) * std::size_t(class_count) + std::size_t(pred)]; }
    std::int64_t at(int truth, int pred) const
    {
        return counts[std::size_t(truth) * std::size_t(class_count) + std::size_t(pred)];
    }
    void validate() const;
    ConfusionMatrix& operator+=(const ConfusionMatrix& o);
    bool operator==(const ConfusionMatrix&) const = default;
};

struct QualityTriple {
    std::string model_id;
    double q_o = 0;
    double q_s = 0;
    double q_t = 0;
    void validate() const;
};

struct ClassPrediction {
    std::string true_class;
    std::string predicted_class;
};

struct ConflictPrediction {
    std::string shape_class;
    std::string texture_class;
    std::string predicted_class;
};

double accuracy(const std::vector<ClassPrediction>& preds);
// Mean IoU over classes with a non-empty union.
double miou(const ConfusionMatrix& cm);

struct Normalizers {
    double s = 0;
    double t = 0;
};

Normalizers normalizers(const std::vector<QualityTriple>& triples);
// Missing when q_s = q_t = 0.
std::optional<double> s_cd(const QualityTriple& q, const Normalizers& n);
double r_cd(const QualityTriple& q);
// TP_S / (TP_S + TP_T); predictions matching neither cue are dropped. Missing when nothing matches.
std::optional<double> cue_conflict_bias(const std::vector<ConflictPrediction>& preds);
double mean_texture_quality(const std::vector<double>& values);

enum class RobustnessMode { ratio, absolute };
RobustnessMode parse_robustness_mode(const std::string& s);
const char* robustness_mode_name(RobustnessMode m);

// Mean over the grid of corrupted/clean (ratio) or of corrupted (absolute).
double relative_robustness(double clean, const std::vector<double>& corrupted,
                           RobustnessMode mode = RobustnessMode::ratio);

// Average ranks, 1-based.
std::vector<double> fractional_ranks(const std::vector<double>& v);
// Pearson correlation of average-tie ranks; missing when either side is constant.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

} // namespace cuedecomp
