#include "metrics/logs.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "common/error.hpp"
#include "corrupt/corrupt.hpp"
#include "imagecore/image_io.hpp"

namespace cuedecomp {

namespace fs = std::filesystem;

void PredictionLog::append(const PredictionLog& other)
{
    records.insert(records.end(), other.records.begin(), other.records.end());
}

namespace {

std::string file_text(const std::string& path)
{
    const auto bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

std::string where(const std::string& name, std::size_t line)
{
    return name + ":" + std::to_string(line) + ": ";
}

std::string resolve(const std::string& p, const std::string& base_dir)
{
    fs::path path(p);
    if (path.is_relative() && !base_dir.empty()) path = fs::path(base_dir) / path;
    return path.lexically_normal().string();
}

bool parse_int(const std::string& s, std::int64_t& v)
{
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && std::isspace((unsigned char)*b)) ++b;
    while (e > b && std::isspace((unsigned char)e[-1])) --e;
    auto r = std::from_chars(b, e, v);
    return r.ec == std::errc() && r.ptr == e && b != e;
}

bool parse_double(const std::string& s, double& v)
{
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && std::isspace((unsigned char)*b)) ++b;
    while (e > b && std::isspace((unsigned char)e[-1])) --e;
    auto r = std::from_chars(b, e, v);
    return r.ec == std::errc() && r.ptr == e && b != e && std::isfinite(v);
}

ConfusionMatrix square_matrix(const std::vector<std::int64_t>& flat, const std::string& ctx)
{
    const auto k = std::int64_t(std::llround(std::sqrt(double(flat.size()))));
    require(k >= 1 && std::size_t(k * k) == flat.size(), Errc::schema_error,
            ctx + "confusion counts (" + std::to_string(flat.size()) + ") are not a square number");
    ConfusionMatrix cm(static_cast<int>(k));
    for (std::size_t i = 0; i < flat.size(); ++i) {
        require(flat[i] >= 0, Errc::schema_error, ctx + "negative confusion count");
        cm.counts[i] = flat[i];
    }
    return cm;
}

std::string label_text(const nlohmann::json& v, const std::string& ctx, const char* field)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    fail(Errc::schema_error, ctx + "field '" + field + "' must be a string or integer");
}

} // namespace

ConfusionMatrix read_confusion_file(const std::string& path)
{
    std::string text = file_text(path);
    for (char& ch : text)
        if (ch == ',') ch = ' ';
    std::istringstream in(text);
    std::vector<std::int64_t> flat;
    std::string tok;
    while (in >> tok) {
        std::int64_t v = 0;
        require(parse_int(tok, v), Errc::schema_error, path + ": not an integer count: '" + tok + "'");
        flat.push_back(v);
    }
    return square_matrix(flat, path + ": ");
}

PredictionLog parse_prediction_log_jsonl(const std::string& text, const std::string& base_dir, const std::string& name)
{
    PredictionLog log;
    std::istringstream in(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string ctx = where(name, no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(Errc::schema_error, ctx + "invalid JSON: " + e.what());
        }
        require(j.is_object(), Errc::schema_error, ctx + "record must be a JSON object");
        PredictionRecord r;
        for (auto [field, dst] : {std::pair{"model_id", &r.model_id}, std::pair{"variant", &r.variant},
                                  std::pair{"sample_id", &r.sample_id}}) {
            require(j.contains(field) && j[field].is_string() && !j[field].get<std::string>().empty(),
                    Errc::schema_error, ctx + "missing or non-string '" + field + "'");
            *dst = j[field].get<std::string>();
        }
        if (j.contains("confusion") || j.contains("confusion_path")) {
            r.kind = RecordKind::segmentation;
            if (j.contains("confusion")) {
                std::vector<std::int64_t> flat;
                const auto& c = j["confusion"];
                require(c.is_array(), Errc::schema_error, ctx + "'confusion' must be an array");
                for (const auto& row : c) {
                    if (row.is_array()) {
                        require(row.size() == c.size(), Errc::schema_error, ctx + "'confusion' must be square");
                        for (const auto& v : row) {
                            require(v.is_number_integer(), Errc::schema_error, ctx + "non-integer confusion count");
                            flat.push_back(v.get<std::int64_t>());
                        }
                    } else {
                        require(row.is_number_integer(), Errc::schema_error, ctx + "non-integer confusion count");
                        flat.push_back(row.get<std::int64_t>());
                    }
                }
                r.confusion = square_matrix(flat, ctx);
            } else {
                require(j["confusion_path"].is_string(), Errc::schema_error, ctx + "'confusion_path' must be a string");
                r.confusion = read_confusion_file(resolve(j["confusion_path"].get<std::string>(), base_dir));
            }
        } else if (j.contains("shape_class") || j.contains("texture_class")) {
            r.kind = RecordKind::conflict;
            require(j.contains("shape_class") && j.contains("texture_class") && j.contains("pred"),
                    Errc::schema_error, ctx + "conflict record needs shape_class, texture_class and pred");
            r.shape_class = label_text(j["shape_class"], ctx, "shape_class");
            r.texture_class = label_text(j["texture_class"], ctx, "texture_class");
            r.predicted_class = label_text(j["pred"], ctx, "pred");
        } else {
            r.kind = RecordKind::classification;
            require(j.contains("true") && j.contains("pred"), Errc::schema_error,
                    ctx + "classification record needs 'true' and 'pred'");
            r.true_class = label_text(j["true"], ctx, "true");
            r.predicted_class = label_text(j["pred"], ctx, "pred");
        }
        log.records.push_back(std::move(r));
    }
    return log;
}

std::vector<CsvRow> parse_csv(const std::string& text, const std::string& name)
{
    std::vector<CsvRow> rows;
    CsvRow cur;
    std::string field;
    bool quoted = false, any = false;
    std::size_t line = 1, start = 1;
    auto end_field = [&] {
        cur.fields.push_back(field);
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        const bool blank =
            !any && cur.fields.size() == 1 && cur.fields[0].find_first_not_of(" \t") == std::string::npos;
        if (!blank) {
            cur.line = start;
            rows.push_back(std::move(cur));
        }
        cur = CsvRow{};
        any = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                field += ch;
            }
            continue;
        }
        if (ch == '"') {
            quoted = true;
            any = true;
        } else if (ch == ',') {
            end_field();
            any = true;
        } else if (ch == '\n') {
            end_row();
            start = ++line;
        } else if (ch != '\r') {
            field += ch;
        }
    }
    require(!quoted, Errc::schema_error, where(name, start) + "unterminated quoted field");
    if (!field.empty() || !cur.fields.empty() || any) end_row();
    return rows;
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

PredictionLog parse_prediction_log_csv(const std::string& text, const std::string& base_dir, const std::string& name)
{
    const auto rows = parse_csv(text, name);
    PredictionLog log;
    if (rows.empty()) return log;
    const auto& header = rows[0].fields;
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        require(col.emplace(header[i], i).second, Errc::schema_error,
                where(name, rows[0].line) + "duplicate column '" + header[i] + "'");
    }
    for (const char* c : {"model_id", "variant", "sample_id"})
        require(col.count(c), Errc::schema_error, where(name, rows[0].line) + "missing column '" + c + "'");

    // cm_<truth>_<pred> columns, complete K x K
    std::vector<std::size_t> cm_cols;
    int k = 0;
    for (const auto& [h, i] : col)
        if (h.rfind("cm_", 0) == 0) ++k;
    if (k > 0) {
        const int kk = int(std::lround(std::sqrt(double(k))));
        require(kk * kk == k, Errc::schema_error, where(name, rows[0].line) + "cm_ columns do not form a square matrix");
        for (int a = 0; a < kk; ++a)
            for (int b = 0; b < kk; ++b) {
                const std::string h = "cm_" + std::to_string(a) + "_" + std::to_string(b);
                require(col.count(h), Errc::schema_error, where(name, rows[0].line) + "missing column '" + h + "'");
                cm_cols.push_back(col[h]);
            }
    }
    const bool seg = !cm_cols.empty() || col.count("confusion_path");
    const bool has_conflict = col.count("shape_class") || col.count("texture_class");
    const bool has_class = col.count("true");
    require(seg || has_conflict || has_class, Errc::schema_error,
            where(name, rows[0].line) + "no 'true', 'shape_class' or confusion columns");
    if (!seg) require(col.count("pred"), Errc::schema_error, where(name, rows[0].line) + "missing column 'pred'");
    if (has_conflict)
        require(col.count("shape_class") && col.count("texture_class"), Errc::schema_error,
                where(name, rows[0].line) + "conflict logs need both shape_class and texture_class");

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        const std::string ctx = where(name, rows[r].line);
        require(f.size() == header.size(), Errc::schema_error,
                ctx + "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        auto get = [&](const char* c) { return f[col.at(c)]; };
        PredictionRecord rec;
        rec.model_id = get("model_id");
        rec.variant = get("variant");
        rec.sample_id = get("sample_id");
        require(!rec.model_id.empty() && !rec.variant.empty() && !rec.sample_id.empty(), Errc::schema_error,
                ctx + "empty model_id, variant or sample_id");
        if (seg) {
            rec.kind = RecordKind::segmentation;
            if (col.count("confusion_path") && !get("confusion_path").empty()) {
                rec.confusion = read_confusion_file(resolve(get("confusion_path"), base_dir));
            } else {
                require(!cm_cols.empty(), Errc::schema_error, ctx + "empty confusion_path");
                std::vector<std::int64_t> flat;
                for (std::size_t c : cm_cols) {
                    std::int64_t v = 0;
                    require(parse_int(f[c], v), Errc::schema_error,
                            ctx + "column '" + header[c] + "' is not an integer: '" + f[c] + "'");
                    flat.push_back(v);
                }
                rec.confusion = square_matrix(flat, ctx);
            }
        } else if (has_conflict && !get("shape_class").empty()) {
            rec.kind = RecordKind::conflict;
            rec.shape_class = get("shape_class");
            rec.texture_class = get("texture_class");
            rec.predicted_class = get("pred");
            require(!rec.texture_class.empty(), Errc::schema_error, ctx + "empty texture_class");
        } else {
            require(has_class && !get("true").empty(), Errc::schema_error, ctx + "row has no true class");
            rec.kind = RecordKind::classification;
            rec.true_class = get("true");
            rec.predicted_class = get("pred");
        }
        log.records.push_back(std::move(rec));
    }
    return log;
}

PredictionLog read_prediction_log(const std::string& path)
{
    const std::string text = file_text(path);
    const std::string dir = fs::path(path).parent_path().string();
    PredictionLog log = fs::path(path).extension() == ".csv" ? parse_prediction_log_csv(text, dir, path)
                                                              : parse_prediction_log_jsonl(text, dir, path);
    check_unique_records(log);
    return log;
}

void check_unique_records(const PredictionLog& log)
{
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& r : log.records)
        require(seen.emplace(r.model_id, r.variant, r.sample_id).second, Errc::schema_error,
                "duplicate record for model '" + r.model_id + "', variant '" + r.variant + "', sample '" +
                    r.sample_id + "'");
}

std::vector<QualityRow> parse_quality_table(const std::string& text, const std::string& name)
{
    const auto rows = parse_csv(text, name);
    require(!rows.empty(), Errc::schema_error, name + ": empty quality table");
    const auto& header = rows[0].fields;
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i)
        require(col.emplace(header[i], i).second, Errc::schema_error,
                where(name, rows[0].line) + "duplicate column '" + header[i] + "'");
    for (const char* c : {"model_id", "q_o", "q_s", "q_t"})
        require(col.count(c), Errc::schema_error, where(name, rows[0].line) + "missing column '" + c + "'");
    std::vector<std::string> kinds;
    for (const auto& h : header) {
        if (h.rfind("rel_rob_", 0) != 0 || h == "rel_rob_mean") continue;
        const std::string kind = h.substr(8);
        parse_corruption_kind(kind); // rejects unknown kinds
        kinds.push_back(kind);
    }

    std::vector<QualityRow> out;
    std::set<std::string> ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        const std::string ctx = where(name, rows[r].line);
        require(f.size() == header.size(), Errc::schema_error,
                ctx + "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        auto number = [&](const std::string& c, bool required) -> std::optional<double> {
            const std::string& s = f[col.at(c)];
            if (s.empty()) {
                require(!required, Errc::schema_error, ctx + "empty '" + c + "'");
                return std::nullopt;
            }
            double v = 0;
            require(parse_double(s, v), Errc::schema_error, ctx + "column '" + c + "' is not a number: '" + s + "'");
            return v;
        };
        QualityRow q;
        q.triple.model_id = f[col["model_id"]];
        require(!q.triple.model_id.empty(), Errc::schema_error, ctx + "empty model_id");
        require(ids.insert(q.triple.model_id).second, Errc::schema_error,
                ctx + "duplicate model_id '" + q.triple.model_id + "'");
        q.triple.q_o = *number("q_o", true);
        q.triple.q_s = *number("q_s", true);
        q.triple.q_t = *number("q_t", true);
        try {
            q.triple.validate();
        } catch (const Error& e) {
            fail(Errc::schema_error, ctx + e.what());
        }
        if (col.count("group") && !f[col["group"]].empty()) q.group = f[col["group"]];
        if (col.count("cue_conflict")) q.cue_conflict = number("cue_conflict", false);
        for (const auto& kind : kinds)
            if (auto v = number("rel_rob_" + kind, false)) q.rel_rob[kind] = *v;
        if (col.count("rel_rob_mean")) q.rel_rob_mean = number("rel_rob_mean", false);
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<QualityRow> read_quality_table(const std::string& path)
{
    return parse_quality_table(file_text(path), path);
}

} // namespace cuedecomp
