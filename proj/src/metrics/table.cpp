#include "metrics/table.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "common/error.hpp"
#include "corrupt/corrupt.hpp"

namespace cuedecomp {

nlohmann::ordered_json to_json(const TableConfig& c)
{
    nlohmann::ordered_json j;
    j["original_variant"] = c.original_variant;
    j["shape_variant"] = c.shape_variant;
    j["texture_variant"] = c.texture_variant;
    j["conflict_variant"] = c.conflict_variant;
    j["exclude_models"] = c.exclude_models;
    j["exclude_groups"] = c.exclude_groups;
    j["model_groups"] = nlohmann::ordered_json::object();
    for (const auto& [m, g] : c.model_groups) j["model_groups"][m] = g;
    j["robustness"] = robustness_mode_name(c.robustness);
    return j;
}

TableConfig table_config_from_json(const nlohmann::json& j, const TableConfig& base)
{
    require(j.is_object(), Errc::schema_error, "metrics config must be an object");
    TableConfig c = base;
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "original_variant") c.original_variant = v.get<std::string>();
            else if (k == "shape_variant") c.shape_variant = v.get<std::string>();
            else if (k == "texture_variant") c.texture_variant = v.get<std::string>();
            else if (k == "conflict_variant") c.conflict_variant = v.get<std::string>();
            else if (k == "exclude_models") c.exclude_models = v.get<std::vector<std::string>>();
            else if (k == "exclude_groups") c.exclude_groups = v.get<std::vector<std::string>>();
            else if (k == "model_groups") c.model_groups = v.get<std::map<std::string, std::string>>();
            else if (k == "robustness") c.robustness = parse_robustness_mode(v.get<std::string>());
            else fail(Errc::schema_error, "unknown metrics option '" + k + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::schema_error, std::string("metrics config: ") + e.what());
    }
    return c;
}

const MetricRow* MetricTable::find(const std::string& model_id) const
{
    for (const auto& r : rows)
        if (r.model_id == model_id) return &r;
    return nullptr;
}

namespace {

const std::vector<std::string>& kind_order()
{
    static const std::vector<std::string> k = {"contrast", "highpass", "lowpass", "noise", "phase"};
    return k;
}

bool contains(const std::vector<std::string>& v, const std::string& s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

// S_cd, R_cd, mean robustness and the normalization set; shared by both table sources.
void finish(MetricTable& t, const TableConfig& cfg)
{
    std::set<std::string> kinds;
    for (auto& r : t.rows) {
        if (!r.group) {
            auto g = cfg.model_groups.find(r.model_id);
            if (g != cfg.model_groups.end()) r.group = g->second;
        }
        r.normalized = !contains(cfg.exclude_models, r.model_id) && !(r.group && contains(cfg.exclude_groups, *r.group));
        t.has_group = t.has_group || r.group.has_value();
        t.has_cue_conflict = t.has_cue_conflict || r.cue_conflict.has_value();
        for (const auto& [k, v] : r.rel_rob) kinds.insert(k);
    }
    for (const auto& k : kind_order())
        if (kinds.count(k)) t.rel_rob_kinds.push_back(k);

    std::vector<QualityTriple> norm_set;
    std::vector<std::string> norm_ids;
    for (const auto& r : t.rows)
        if (r.normalized) {
            norm_set.push_back(r.triple);
            norm_ids.push_back(r.model_id);
        }
    std::optional<Normalizers> n;
    if (norm_set.empty()) {
        t.warnings.push_back("normalization set is empty; S_cd left missing");
    } else {
        try {
            n = normalizers(norm_set);
        } catch (const Error& e) {
            t.warnings.push_back(e.what());
        }
    }
    for (auto& r : t.rows) {
        if (n) r.s_cd = s_cd(r.triple, *n);
        if (r.triple.q_o > 0) r.r_cd = cuedecomp::r_cd(r.triple);
        if (!r.rel_rob.empty()) {
            double s = 0;
            for (const auto& [k, v] : r.rel_rob) s += v;
            r.rel_rob_mean = s / double(r.rel_rob.size());
        }
    }

    auto& m = t.metadata;
    m["normalization_models"] = norm_ids;
    m["excluded_from_normalization"] = nlohmann::ordered_json::array();
    for (const auto& r : t.rows)
        if (!r.normalized) m["excluded_from_normalization"].push_back(r.model_id);
    if (n) {
        m["s"] = n->s;
        m["t"] = n->t;
    } else {
        m["s"] = nullptr;
        m["t"] = nullptr;
    }
    m["robustness_mode"] = robustness_mode_name(cfg.robustness);
    m["config"] = to_json(cfg);
    m["warnings"] = t.warnings;
}

double quality_of(const std::vector<const PredictionRecord*>& recs)
{
    if (recs.front()->kind == RecordKind::segmentation) {
        ConfusionMatrix total(recs.front()->confusion.class_count);
        for (const auto* r : recs) total += r->confusion;
        return miou(total);
    }
    std::vector<ClassPrediction> p;
    p.reserve(recs.size());
    for (const auto* r : recs) p.push_back({r->true_class, r->predicted_class});
    return accuracy(p);
}

} // namespace

MetricTable build_table(const PredictionLog& log, const TableConfig& cfg)
{
    check_unique_records(log);
    MetricTable t;
    std::vector<std::string> models;
    std::map<std::string, std::map<std::string, std::vector<const PredictionRecord*>>> by;
    for (const auto& r : log.records) {
        if (!by.count(r.model_id)) models.push_back(r.model_id);
        by[r.model_id][r.variant].push_back(&r);
    }
    std::map<std::string, std::set<double>> grids;
    nlohmann::ordered_json excluded = nlohmann::ordered_json::array();

    for (const auto& model : models) {
        auto& vars = by[model];
        std::vector<std::string> missing;
        for (const auto* v : {&cfg.original_variant, &cfg.shape_variant, &cfg.texture_variant})
            if (!vars.count(*v)) missing.push_back(*v);
        if (!missing.empty()) {
            std::string list;
            for (const auto& v : missing) list += (list.empty() ? "" : ", ") + v;
            t.warnings.push_back("model '" + model + "' excluded: missing variant(s) " + list);
            excluded.push_back({{"model_id", model}, {"missing_variants", missing}});
            continue;
        }
        try {
            // one task type per variant
            for (auto& [variant, recs] : vars) {
                const RecordKind k = recs.front()->kind;
                for (const auto* r : recs)
                    require(r->kind == k, Errc::schema_error,
                            "model '" + model + "', variant '" + variant + "' mixes record types");
                if (variant != cfg.conflict_variant)
                    require(k != RecordKind::conflict, Errc::schema_error,
                            "cue-conflict records under variant '" + variant + "' of model '" + model + "'");
            }
            MetricRow row;
            row.model_id = model;
            row.triple = {model, quality_of(vars[cfg.original_variant]), quality_of(vars[cfg.shape_variant]),
                          quality_of(vars[cfg.texture_variant])};
            if (vars.count(cfg.conflict_variant)) {
                std::vector<ConflictPrediction> p;
                for (const auto* r : vars[cfg.conflict_variant]) {
                    require(r->kind == RecordKind::conflict, Errc::schema_error,
                            "variant '" + cfg.conflict_variant + "' of model '" + model + "' needs cue-conflict records");
                    p.push_back({r->shape_class, r->texture_class, r->predicted_class});
                }
                row.cue_conflict = cue_conflict_bias(p);
            }
            std::map<std::string, std::vector<std::pair<double, double>>> per_kind;
            for (const auto& [variant, recs] : vars) {
                if (variant.rfind("corrupt:", 0) != 0) continue;
                const auto colon = variant.find(':', 8);
                require(colon != std::string::npos, Errc::schema_error, "bad corruption variant '" + variant + "'");
                const std::string kind = variant.substr(8, colon - 8);
                parse_corruption_kind(kind);
                double level = 0;
                const std::string num = variant.substr(colon + 1);
                auto res = std::from_chars(num.data(), num.data() + num.size(), level);
                require(res.ec == std::errc() && res.ptr == num.data() + num.size(), Errc::schema_error,
                        "bad corruption intensity in '" + variant + "'");
                per_kind[kind].emplace_back(level, quality_of(recs));
                grids[kind].insert(level);
            }
            for (auto& [kind, pts] : per_kind) {
                std::sort(pts.begin(), pts.end());
                std::vector<double> q;
                for (const auto& p : pts) q.push_back(p.second);
                if (cfg.robustness == RobustnessMode::ratio && row.triple.q_o == 0) {
                    t.warnings.push_back("model '" + model + "': clean quality 0, no relative robustness");
                    continue;
                }
                row.rel_rob[kind] = relative_robustness(row.triple.q_o, q, cfg.robustness);
            }
            t.rows.push_back(std::move(row));
        } catch (const Error& e) {
            t.warnings.push_back("model '" + model + "' excluded: " + e.what());
            excluded.push_back({{"model_id", model}, {"error", e.what()}});
        }
    }
    finish(t, cfg);
    t.metadata["excluded_models"] = excluded;
    nlohmann::ordered_json g = nlohmann::ordered_json::object();
    for (const auto& [k, levels] : grids) g[k] = std::vector<double>(levels.begin(), levels.end());
    t.metadata["grids"] = g;
    return t;
}

MetricTable table_from_qualities(const std::vector<QualityRow>& rows, const TableConfig& cfg)
{
    MetricTable t;
    for (const auto& q : rows) {
        MetricRow r;
        r.model_id = q.triple.model_id;
        r.group = q.group;
        r.triple = q.triple;
        r.cue_conflict = q.cue_conflict;
        r.rel_rob = q.rel_rob;
        t.rows.push_back(std::move(r));
    }
    finish(t, cfg);
    // a published mean column is only used when no per-kind columns exist
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].rel_rob.empty() && rows[i].rel_rob_mean) t.rows[i].rel_rob_mean = rows[i].rel_rob_mean;
    t.metadata["excluded_models"] = nlohmann::ordered_json::array();
    t.metadata["grids"] = nullptr;
    return t;
}

std::vector<std::string> numeric_columns(const MetricTable& t)
{
    std::vector<std::string> c = {"q_o", "q_s", "q_t", "s_cd", "r_cd"};
    if (t.has_cue_conflict) c.push_back("cue_conflict");
    for (const auto& k : t.rel_rob_kinds) c.push_back("rel_rob_" + k);
    bool mean = false;
    for (const auto& r : t.rows) mean = mean || r.rel_rob_mean.has_value();
    if (mean) c.push_back("rel_rob_mean");
    return c;
}

std::vector<std::string> table_columns(const MetricTable& t)
{
    std::vector<std::string> c;
    if (t.has_group) c.push_back("group");
    c.push_back("model_id");
    for (auto& n : numeric_columns(t)) c.push_back(n);
    return c;
}

std::optional<double> cell(const MetricRow& r, const std::string& column)
{
    if (column == "q_o") return r.triple.q_o;
    if (column == "q_s") return r.triple.q_s;
    if (column == "q_t") return r.triple.q_t;
    if (column == "s_cd") return r.s_cd;
    if (column == "r_cd") return r.r_cd;
    if (column == "cue_conflict") return r.cue_conflict;
    if (column == "rel_rob_mean") return r.rel_rob_mean;
    if (column.rfind("rel_rob_", 0) == 0) {
        auto it = r.rel_rob.find(column.substr(8));
        if (it != r.rel_rob.end()) return it->second;
        return std::nullopt;
    }
    fail(Errc::not_found, "unknown column '" + column + "'");
}

std::optional<double> table_spearman(const MetricTable& t, const std::string& a, const std::string& b)
{
    const auto cols = numeric_columns(t);
    for (const auto* c : {&a, &b})
        require(contains(cols, *c), Errc::not_found, "column '" + *c + "' is not in the table");
    std::vector<double> x, y;
    for (const auto& r : t.rows) {
        if (!r.normalized) continue;
        auto u = cell(r, a), v = cell(r, b);
        if (u && v) {
            x.push_back(*u);
            y.push_back(*v);
        }
    }
    if (x.size() < 2) return std::nullopt;
    return spearman(x, y);
}

std::string format_number(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace {

std::vector<std::vector<std::string>> cells(const MetricTable& t, bool fixed3)
{
    std::vector<std::vector<std::string>> out;
    const auto cols = table_columns(t);
    for (const auto& r : t.rows) {
        std::vector<std::string> line;
        for (const auto& c : cols) {
            if (c == "group") line.push_back(r.group.value_or(""));
            else if (c == "model_id") line.push_back(r.model_id);
            else if (auto v = cell(r, c)) {
                if (fixed3) {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "%.3f", *v);
                    line.emplace_back(buf);
                } else {
                    line.push_back(format_number(*v));
                }
            } else {
                line.emplace_back();
            }
        }
        out.push_back(std::move(line));
    }
    return out;
}

} // namespace

std::string table_csv(const MetricTable& t)
{
    std::string s;
    const auto cols = table_columns(t);
    for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
    s += "\n";
    for (const auto& line : cells(t, false)) {
        for (std::size_t i = 0; i < line.size(); ++i) s += (i ? "," : "") + csv_escape(line[i]);
        s += "\n";
    }
    return s;
}

std::string table_markdown(const MetricTable& t)
{
    const auto cols = table_columns(t);
    const auto body = cells(t, true);
    std::vector<std::size_t> width(cols.size(), 3);
    for (std::size_t i = 0; i < cols.size(); ++i) width[i] = std::max(width[i], cols[i].size());
    for (const auto& line : body)
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    auto text_col = [&](std::size_t i) { return cols[i] == "group" || cols[i] == "model_id"; };
    auto emit = [&](const std::vector<std::string>& line) {
        std::string s = "|";
        for (std::size_t i = 0; i < line.size(); ++i) {
            const std::string pad(width[i] - line[i].size(), ' ');
            // markdown cells cannot hold a bare pipe
            std::string v = line[i];
            for (std::size_t p = 0; (p = v.find('|', p)) != std::string::npos; p += 2) v.replace(p, 1, "\\|");
            s += " " + (text_col(i) ? v + pad : pad + v) + " |";
        }
        return s + "\n";
    };
    std::string s = emit(cols);
    s += "|";
    for (std::size_t i = 0; i < cols.size(); ++i)
        s += text_col(i) ? " :" + std::string(width[i] - 1, '-') + " |" : " " + std::string(width[i] - 1, '-') + ": |";
    s += "\n";
    for (const auto& line : body) s += emit(line);
    return s;
}

} // namespace cuedecomp
