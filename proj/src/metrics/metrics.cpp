#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace cuedecomp {

ConfusionMatrix::ConfusionMatrix(int k) : class_count(k)
{
    require(k >= 1, Errc::invalid_argument, "confusion matrix needs at least one class");
    counts.assign(std::size_t(k) * std::size_t(k), 0);
}

void ConfusionMatrix::validate() const
{
    require(class_count >= 1, Errc::invalid_argument, "confusion matrix needs at least one class");
    require(counts.size() == std::size_t(class_count) * std::size_t(class_count), Errc::invalid_argument,
            "confusion matrix has " + std::to_string(counts.size()) + " counts, expected " +
                std::to_string(class_count) + "^2");
    for (auto c : counts) require(c >= 0, Errc::invalid_argument, "negative confusion count");
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o)
{
    require(class_count == o.class_count, Errc::dimension_mismatch,
            "confusion matrices with " + std::to_string(class_count) + " and " + std::to_string(o.class_count) +
                " classes");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    return *this;
}

void QualityTriple::validate() const
{
    for (double q : {q_o, q_s, q_t})
        require(std::isfinite(q) && q >= 0 && q <= 1, Errc::out_of_range,
                "quality of '" + model_id + "' outside [0,1]");
}

double accuracy(const std::vector<ClassPrediction>& preds)
{
    require(!preds.empty(), Errc::invalid_argument, "accuracy of an empty record set");
    std::size_t hit = 0;
    for (const auto& p : preds) hit += p.true_class == p.predicted_class;
    return double(hit) / double(preds.size());
}

double miou(const ConfusionMatrix& cm)
{
    cm.validate();
    const int k = cm.class_count;
    std::vector<std::int64_t> row(std::size_t(k), 0), col(std::size_t(k), 0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            row[std::size_t(i)] += cm.at(i, j);
            col[std::size_t(j)] += cm.at(i, j);
        }
    double sum = 0;
    int used = 0;
    for (int i = 0; i < k; ++i) {
        const std::int64_t uni = row[std::size_t(i)] + col[std::size_t(i)] - cm.at(i, i);
        if (uni == 0) continue;
        sum += double(cm.at(i, i)) / double(uni);
        ++used;
    }
    require(used > 0, Errc::undefined, "mIoU undefined: every class has an empty union");
    return sum / used;
}

Normalizers normalizers(const std::vector<QualityTriple>& triples)
{
    require(!triples.empty(), Errc::invalid_argument, "normalizers of an empty model set");
    Normalizers n;
    for (const auto& q : triples) {
        q.validate();
        n.s += q.q_s;
        n.t += q.q_t;
    }
    n.s /= double(triples.size());
    n.t /= double(triples.size());
    require(n.s > 0 && n.t > 0, Errc::undefined, "degenerate normalization (s or t is 0)");
    return n;
}

std::optional<double> s_cd(const QualityTriple& q, const Normalizers& n)
{
    q.validate();
    require(n.s > 0 && n.t > 0, Errc::invalid_argument, "normalizers must be > 0");
    if (q.q_s + q.q_t <= 0) return std::nullopt;
    const double a = q.q_s / n.s, b = q.q_t / n.t;
    return a / (a + b);
}

double r_cd(const QualityTriple& q)
{
    q.validate();
    require(q.q_o > 0, Errc::undefined, "R_cd undefined for '" + q.model_id + "': q_o = 0");
    return (q.q_s + q.q_t) / (2.0 * q.q_o);
}

std::optional<double> cue_conflict_bias(const std::vector<ConflictPrediction>& preds)
{
    std::size_t tp_s = 0, tp_t = 0;
    for (const auto& p : preds) {
        tp_s += p.predicted_class == p.shape_class;
        tp_t += p.predicted_class == p.texture_class;
    }
    if (tp_s + tp_t == 0) return std::nullopt;
    return double(tp_s) / double(tp_s + tp_t);
}

double mean_texture_quality(const std::vector<double>& values)
{
    require(!values.empty(), Errc::invalid_argument, "mean of an empty set");
    double s = 0;
    for (double v : values) s += v;
    return s / double(values.size());
}

RobustnessMode parse_robustness_mode(const std::string& s)
{
    if (s == "ratio") return RobustnessMode::ratio;
    if (s == "absolute") return RobustnessMode::absolute;
    fail(Errc::invalid_argument, "unknown robustness mode '" + s + "' (ratio|absolute)");
}

const char* robustness_mode_name(RobustnessMode m)
{
    return m == RobustnessMode::ratio ? "ratio" : "absolute";
}

double relative_robustness(double clean, const std::vector<double>& corrupted, RobustnessMode mode)
{
    require(!corrupted.empty(), Errc::invalid_argument, "no corrupted qualities");
    require(std::isfinite(clean) && clean >= 0, Errc::out_of_range, "clean quality must be >= 0");
    if (mode == RobustnessMode::ratio) require(clean > 0, Errc::undefined, "relative robustness with clean quality 0");
    double s = 0;
    for (double q : corrupted) {
        require(std::isfinite(q) && q >= 0, Errc::out_of_range, "corrupted quality must be >= 0");
        s += mode == RobustnessMode::ratio ? q / clean : q;
    }
    return s / double(corrupted.size());
}

std::vector<double> fractional_ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * double(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y)
{
    require(x.size() == y.size(), Errc::dimension_mismatch,
            "spearman on lists of length " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
    require(x.size() >= 2, Errc::invalid_argument, "spearman needs at least two pairs");
    for (double v : x) require(std::isfinite(v), Errc::invalid_argument, "non-finite value");
    for (double v : y) require(std::isfinite(v), Errc::invalid_argument, "non-finite value");
    const auto rx = fractional_ranks(x), ry = fractional_ranks(y);
    const double n = double(x.size());
    const double mean = (n + 1.0) / 2.0; // ranks always average to this
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double a = rx[i] - mean, b = ry[i] - mean;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

} // namespace cuedecomp
