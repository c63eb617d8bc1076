#include "nonresp/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "nonresp/rng.hpp"

namespace nonresp::tabular {

bool is_missing(double v) { return std::isnan(v); }
double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }

std::optional<std::int32_t> ColumnSpec::level_code(const std::string& level) const {
    const auto it = std::lower_bound(levels.begin(), levels.end(), level);
    if (it == levels.end() || *it != level) return std::nullopt;
    return static_cast<std::int32_t>(it - levels.begin());
}

void normalize_schema(std::vector<ColumnSpec>& schema) {
    if (schema.empty()) throw DataError("schema: no columns");
    std::size_t targets = 0;
    std::unordered_set<std::string> names;
    for (auto& col : schema) {
        if (!names.insert(col.name).second)
            throw DataError("schema: duplicate column name '" + col.name + "'");
        if (col.kind == ColumnKind::categorical) {
            if (col.levels.empty())
                throw DataError("schema: column '" + col.name + "' has no levels");
            std::sort(col.levels.begin(), col.levels.end());
            if (std::adjacent_find(col.levels.begin(), col.levels.end()) != col.levels.end())
                throw DataError("schema: column '" + col.name + "' has duplicate levels");
        } else if (!col.levels.empty()) {
            throw DataError("schema: numeric column '" + col.name + "' lists levels");
        }
        if (col.role == ColumnRole::target) {
            ++targets;
            if (col.kind != ColumnKind::categorical || col.levels != std::vector<std::string>{"0", "1"})
                throw DataError("schema: target column '" + col.name + "' must be categorical with levels {0,1}");
        }
    }
    if (targets != 1) throw DataError("schema: expected exactly one target column, found " +
                                      std::to_string(targets));
}

Table::Table(std::vector<ColumnSpec> schema, std::size_t n_rows) : schema_(std::move(schema)) {
    normalize_schema(schema_);
    cat_.resize(schema_.size());
    num_.resize(schema_.size());
    resize_rows(n_rows);
}

void Table::resize_rows(std::size_t n) {
    n_rows_ = n;
    for (std::size_t c = 0; c < schema_.size(); ++c) {
        if (schema_[c].kind == ColumnKind::categorical)
            cat_[c].resize(n, kMissingCode);
        else
            num_[c].resize(n, missing_value());
    }
}

std::size_t Table::col_index(const std::string& name) const {
    for (std::size_t c = 0; c < schema_.size(); ++c)
        if (schema_[c].name == name) return c;
    throw DataError("table: no column named '" + name + "'");
}

std::vector<std::int32_t>& Table::codes(std::size_t col) {
    if (schema_[col].kind != ColumnKind::categorical)
        throw UsageError("table: column '" + schema_[col].name + "' is not categorical");
    return cat_[col];
}

const std::vector<std::int32_t>& Table::codes(std::size_t col) const {
    return const_cast<Table*>(this)->codes(col);
}

std::vector<double>& Table::values(std::size_t col) {
    if (schema_[col].kind != ColumnKind::numeric)
        throw UsageError("table: column '" + schema_[col].name + "' is not numeric");
    return num_[col];
}

const std::vector<double>& Table::values(std::size_t col) const {
    return const_cast<Table*>(this)->values(col);
}

std::vector<std::size_t> Table::feature_cols() const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < schema_.size(); ++c)
        if (schema_[c].role == ColumnRole::feature) out.push_back(c);
    return out;
}

std::size_t Table::target_col() const {
    for (std::size_t c = 0; c < schema_.size(); ++c)
        if (schema_[c].role == ColumnRole::target) return c;
    throw DataError("table: schema has no target column");
}

std::vector<int> Table::labels() const {
    const auto& col = cat_[target_col()];
    std::vector<int> out(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) {
        if (col[i] == kMissingCode)
            throw DataError("table: missing target label at row " + std::to_string(i));
        out[i] = static_cast<int>(col[i]);
    }
    return out;
}

Table Table::take_rows(std::span<const std::size_t> rows) const {
    Table out(schema_, rows.size());
    for (std::size_t c = 0; c < schema_.size(); ++c) {
        if (schema_[c].kind == ColumnKind::categorical) {
            const auto& src = cat_[c];
            auto& dst = out.cat_[c];
            for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
        } else {
            const auto& src = num_[c];
            auto& dst = out.num_[c];
            for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
        }
    }
    return out;
}

// --- schema file ---

namespace {

std::vector<std::string> split_on(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

} // namespace

std::vector<ColumnSpec> read_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("schema: cannot open '" + path + "'");
    std::vector<ColumnSpec> schema;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto parts = split_on(line, ',');
        if (parts.size() < 3)
            throw DataError("schema: line " + std::to_string(line_no) + " needs name,kind,role");
        ColumnSpec col;
        col.name = parts[0];
        if (parts[1] == "categorical")
            col.kind = ColumnKind::categorical;
        else if (parts[1] == "numeric")
            col.kind = ColumnKind::numeric;
        else
            throw DataError("schema: line " + std::to_string(line_no) + ": unknown kind '" + parts[1] + "'");
        if (parts[2] == "feature")
            col.role = ColumnRole::feature;
        else if (parts[2] == "target")
            col.role = ColumnRole::target;
        else if (parts[2] == "id")
            col.role = ColumnRole::id;
        else
            throw DataError("schema: line " + std::to_string(line_no) + ": unknown role '" + parts[2] + "'");
        if (parts.size() > 3 && !parts[3].empty()) col.levels = split_on(parts[3], '|');
        schema.push_back(std::move(col));
    }
    normalize_schema(schema);
    return schema;
}

std::string format_schema(const std::vector<ColumnSpec>& schema) {
    std::string out;
    for (const auto& col : schema) {
        out += col.name;
        out += col.kind == ColumnKind::categorical ? ",categorical" : ",numeric";
        switch (col.role) {
            case ColumnRole::feature: out += ",feature"; break;
            case ColumnRole::target: out += ",target"; break;
            case ColumnRole::id: out += ",id"; break;
        }
        if (!col.levels.empty()) {
            out += ',';
            for (std::size_t i = 0; i < col.levels.size(); ++i) {
                if (i) out += '|';
                out += col.levels[i];
            }
        }
        out += '\n';
    }
    return out;
}

void write_schema(const std::string& path, const std::vector<ColumnSpec>& schema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("schema: cannot write '" + path + "'");
    out << format_schema(schema);
}

// --- CSV ---

namespace {

// One record per call; handles quoted fields with embedded separators,
// doubled quotes, and newlines. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool saw_any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        saw_any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (!saw_any) return false;
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(std::move(field));
    return true;
}

std::string quote_field(const std::string& field) {
    const bool needs = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

Table read_csv_stream(std::istream& in, const std::vector<ColumnSpec>& schema) {
    std::vector<ColumnSpec> checked = schema;
    normalize_schema(checked);

    std::vector<std::string> fields;
    if (!read_record(in, fields)) throw DataError("csv: missing header row");
    if (fields.size() != checked.size())
        throw DataError("csv: header has " + std::to_string(fields.size()) +
                        " columns, schema expects " + std::to_string(checked.size()));
    for (std::size_t c = 0; c < checked.size(); ++c)
        if (fields[c] != checked[c].name)
            throw DataError("csv: header column " + std::to_string(c) + " is '" + fields[c] +
                            "', schema expects '" + checked[c].name + "'");

    Table table(checked);
    std::size_t row = 0;
    while (read_record(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue; // trailing blank line
        if (fields.size() != checked.size())
            throw DataError("csv: row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(checked.size()));
        table.resize_rows(row + 1);
        for (std::size_t c = 0; c < checked.size(); ++c) {
            const std::string& text = fields[c];
            if (checked[c].kind == ColumnKind::categorical) {
                if (text.empty()) {
                    table.codes(c)[row] = kMissingCode;
                } else if (auto code = checked[c].level_code(text)) {
                    table.codes(c)[row] = *code;
                } else {
                    throw DataError("csv: row " + std::to_string(row) + ", column '" +
                                    checked[c].name + "': unknown level '" + text + "'");
                }
            } else {
                if (text.empty()) {
                    table.values(c)[row] = missing_value();
                } else {
                    double v = 0.0;
                    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
                    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
                        throw DataError("csv: row " + std::to_string(row) + ", column '" +
                                        checked[c].name + "': not numeric: '" + text + "'");
                    table.values(c)[row] = v;
                }
            }
        }
        ++row;
    }
    return table;
}

Table read_csv(const std::string& path, const std::vector<ColumnSpec>& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("csv: cannot open '" + path + "'");
    return read_csv_stream(in, schema);
}

std::string format_csv(const Table& table) {
    std::string out;
    const auto& schema = table.schema();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (c) out += ',';
        out += quote_field(schema[c].name);
    }
    out += '\n';
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (c) out += ',';
            if (schema[c].kind == ColumnKind::categorical) {
                const auto code = table.codes(c)[r];
                if (code != kMissingCode) out += quote_field(schema[c].levels[code]);
            } else {
                const double v = table.values(c)[r];
                if (!is_missing(v)) out += format_double(v);
            }
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("csv: cannot write '" + path + "'");
    out << format_csv(table);
}

// --- imputation ---

Table impute_most_frequent(const Table& table) {
    Table out = table;
    const auto& schema = out.schema();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (schema[c].kind != ColumnKind::categorical) continue;
        auto& codes = out.codes(c);
        std::vector<std::size_t> counts(schema[c].levels.size(), 0);
        bool any_missing = false;
        for (auto code : codes) {
            if (code == kMissingCode)
                any_missing = true;
            else
                ++counts[code];
        }
        if (!any_missing) continue;
        std::size_t best = 0;
        bool seen = false;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (counts[k] > 0 && (!seen || counts[k] > counts[best])) {
                best = k; // ties keep the smaller code = lexicographically smaller level
                seen = true;
            }
        }
        if (!seen)
            throw DataError("impute: column '" + schema[c].name + "' is entirely missing");
        for (auto& code : codes)
            if (code == kMissingCode) code = static_cast<std::int32_t>(best);
    }
    return out;
}

// --- splitting ---

namespace {

std::size_t checked_test_size(std::size_t n_rows, const SplitPlan& plan) {
    if (n_rows < 2) throw UsageError("split: need at least 2 rows");
    if (!(plan.test_fraction > 0.0 && plan.test_fraction < 1.0))
        throw UsageError("split: test_fraction must lie in (0,1)");
    const auto test = static_cast<std::size_t>(
        std::llround(plan.test_fraction * static_cast<double>(n_rows)));
    if (test == 0 || test >= n_rows)
        throw UsageError("split: test_fraction " + std::to_string(plan.test_fraction) +
                         " leaves an empty side for n=" + std::to_string(n_rows));
    return test;
}

IndexSplit split_once(std::size_t n_rows, const SplitPlan& plan, std::span<const int> labels,
                      Rng& rng) {
    const std::size_t test_size = checked_test_size(n_rows, plan);
    IndexSplit split;
    if (!plan.stratified) {
        auto perm = rng.permutation(n_rows);
        split.test.assign(perm.begin(), perm.begin() + test_size);
        split.train.assign(perm.begin() + test_size, perm.end());
    } else {
        if (labels.size() != n_rows)
            throw UsageError("split: stratified mode needs one label per row");
        std::vector<std::size_t> by_class[2];
        for (std::size_t i = 0; i < n_rows; ++i) {
            if (labels[i] != 0 && labels[i] != 1)
                throw UsageError("split: labels must be 0/1");
            by_class[labels[i]].push_back(i);
        }
        // Largest-remainder quotas: total is exact, each class within one row
        // of its proportional share.
        double ideal[2];
        std::size_t quota[2];
        for (int c = 0; c < 2; ++c) {
            ideal[c] = plan.test_fraction * static_cast<double>(by_class[c].size());
            quota[c] = static_cast<std::size_t>(std::floor(ideal[c]));
            quota[c] = std::min(quota[c], by_class[c].size());
        }
        while (quota[0] + quota[1] < test_size) {
            const double rem0 = ideal[0] - static_cast<double>(quota[0]);
            const double rem1 = ideal[1] - static_cast<double>(quota[1]);
            int pick = (rem1 > rem0) ? 1 : 0;
            if (quota[pick] >= by_class[pick].size()) pick = 1 - pick;
            ++quota[pick];
        }
        while (quota[0] + quota[1] > test_size) {
            const int pick = (quota[1] > 0 && ideal[1] - static_cast<double>(quota[1]) <
                                                  ideal[0] - static_cast<double>(quota[0]))
                                 ? 1
                                 : 0;
            if (quota[pick] == 0) { --quota[1 - pick]; continue; }
            --quota[pick];
        }
        for (int c = 0; c < 2; ++c) {
            rng.shuffle(by_class[c]);
            split.test.insert(split.test.end(), by_class[c].begin(),
                              by_class[c].begin() + quota[c]);
            split.train.insert(split.train.end(), by_class[c].begin() + quota[c],
                               by_class[c].end());
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

} // namespace

IndexSplit train_test_split(std::size_t n_rows, const SplitPlan& plan,
                            std::span<const int> labels) {
    Rng rng(plan.seed);
    return split_once(n_rows, plan, labels, rng);
}

std::vector<IndexSplit> shuffle_split_iter(std::size_t n_rows, const SplitPlan& plan,
                                           std::span<const int> labels) {
    if (plan.n_splits < 1) throw UsageError("split: n_splits must be >= 1");
    std::vector<IndexSplit> out;
    out.reserve(plan.n_splits);
    for (std::size_t s = 0; s < plan.n_splits; ++s) {
        Rng rng(derive_seed(plan.seed, s));
        out.push_back(split_once(n_rows, plan, labels, rng));
    }
    return out;
}

ProportionCi proportion_ci(double p, std::size_t n) {
    if (n == 0) throw UsageError("proportion_ci: n must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("proportion_ci: p must lie in [0,1]");
    ProportionCi ci;
    ci.error = 2.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    ci.lo = std::max(0.0, p - ci.error);
    ci.hi = std::min(1.0, p + ci.error);
    return ci;
}

// --- synthetic generator ---

namespace {

struct CatFeatureDef {
    const char* name;
    std::vector<std::pair<const char*, double>> level_probs; // unnormalized
    // Two-level features may load one level on the latent frailty score
    // (log-odds shift per unit). Correlated markers cluster the way real
    // comorbidities do, and risk stacks within the frail subpopulation.
    double frailty_weight = 0.0;
    const char* loaded_level = "yes";
};

// Marginals follow the survey's cohort/mode/living/smoker/area counts; the
// health and symptom features use fixed plausible prevalences.
const std::vector<CatFeatureDef>& synthetic_features() {
    static const std::vector<CatFeatureDef> defs = [] {
        std::vector<CatFeatureDef> v;
        v.push_back({"cohort",
                     {{"c1", 2819}, {"c3", 631}, {"c4", 1108}, {"c6", 489}, {"c7", 168}, {"c9", 605}}});
        v.push_back({"interview_mode", {{"phone", 1135}, {"web", 4685}}, 0.38, "phone"});
        v.push_back({"living_place",
                     {{"care_home", 6}, {"home", 5729}, {"hospital", 2}, {"other_home", 54}, {"somewhere_else", 29}}});
        v.push_back({"smoker", {{"no", 5419}, {"yes", 401}}});
        v.push_back({"rural_urban", {{"rural", 1574}, {"urban", 4246}}});
        v.push_back({"region",
                     {{"east_england", 10},
                      {"east_midlands", 9},
                      {"london", 8},
                      {"north_east", 5},
                      {"north_west", 10},
                      {"scotland", 3},
                      {"south_east", 22},
                      {"south_west", 12},
                      {"wales", 3},
                      {"west_midlands", 9},
                      {"yorkshire", 9}}});
        v.push_back({"employment",
                     {{"employed", 14}, {"family_care", 4}, {"retired", 72}, {"sick_or_disabled", 5}, {"unemployed", 5}}});
        v.push_back({"employment_pre_covid",
                     {{"employed", 18}, {"family_care", 3}, {"retired", 71}, {"sick_or_disabled", 4}, {"unemployed", 4}}});
        v.push_back({"physical_activity", {{"less", 35}, {"more", 20}, {"same", 45}}});
        v.push_back({"covid_test", {{"no", 88}, {"yes", 12}}});
        struct BinaryDef { const char* name; double pct; double frailty; };
        const BinaryDef binary[] = {
            {"hospitalised", 2, 1.8},    {"breath_short", 12, 1.4},  {"fatigue", 25, 1.0},
            {"fever", 6, 0.0},           {"cough", 14, 0.0},         {"loss_of_taste", 5, 0.0},
            {"loss_of_smell", 5, 0.0},   {"headache", 18, 0.0},      {"sore_throat", 10, 0.0},
            {"diarrhoea", 7, 0.0},       {"muscle_ache", 20, 0.3},   {"chest_pain", 5, 0.7},
            {"dizziness", 9, 0.7},       {"nausea", 6, 0.0},         {"dementia", 3, 2.2},
            {"disability", 16, 1.8},     {"arthritis", 35, 1.0},     {"high_blood_pressure", 38, 0.5},
            {"diabetes", 11, 0.5},       {"heart_problem", 14, 1.4}, {"lung_problem", 8, 1.0},
            {"asthma", 13, 0.3},         {"cancer", 9, 0.5},         {"stroke", 4, 1.4},
            {"ear_disease", 12, 0.7},    {"eye_problem", 15, 0.7},   {"osteoporosis", 7, 1.0},
            {"depression", 12, 0.7},     {"anxiety", 14, 0.7},       {"sleep_problem", 28, 0.5},
            {"memory_problem", 10, 1.8}, {"mobility_problem", 17, 1.8}, {"falls", 8, 1.4},
            {"incontinence", 11, 1.4},   {"chronic_pain", 22, 0.8},  {"obesity", 24, 0.3},
            {"alcohol_risk", 9, 0.0},    {"shielding", 21, 0.8},     {"key_worker", 6, 0.0}};
        for (const auto& def : binary)
            v.push_back({def.name, {{"no", 100.0 - def.pct}, {"yes", def.pct}}, def.frailty});
        return v;
    }();
    return defs;
}

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

std::vector<ColumnSpec> synthetic_schema() {
    std::vector<ColumnSpec> schema;
    schema.push_back({"id", ColumnKind::numeric, ColumnRole::id, {}});
    for (const auto& def : synthetic_features()) {
        ColumnSpec col;
        col.name = def.name;
        col.kind = ColumnKind::categorical;
        col.role = ColumnRole::feature;
        for (const auto& [level, prob] : def.level_probs) col.levels.emplace_back(level);
        schema.push_back(std::move(col));
    }
    schema.push_back({"age", ColumnKind::numeric, ColumnRole::feature, {}});
    schema.push_back({"nonresponse", ColumnKind::categorical, ColumnRole::target, {"0", "1"}});
    normalize_schema(schema);
    return schema;
}

std::vector<PlantedEffect> default_planted_effects() {
    return {
        {"interview_mode", "phone", 2.00},
        {"dementia", "yes", 1.55},
        {"disability", "yes", 0.80},
        {"mobility_problem", "yes", 0.70},
        {"memory_problem", "yes", 0.70},
        {"hospitalised", "yes", 1.70},
        {"falls", "yes", 0.60},
        {"breath_short", "yes", 0.60},
        {"employment", "sick_or_disabled", 1.05},
        {"employment", "employed", -0.30},
        {"physical_activity", "less", 0.50},
        {"physical_activity", "more", -0.45},
        {"covid_test", "yes", 0.50},
        {"region", "london", 0.45},
        {"region", "scotland", -0.45},
    };
}

Table synth_generate(const SyntheticConfig& config) {
    if (config.n_rows == 0) throw UsageError("synth: n_rows must be >= 1");
    if (!(config.positive_rate > 0.0 && config.positive_rate < 1.0))
        throw UsageError("synth: positive_rate must lie in (0,1)");

    auto schema = synthetic_schema();
    Table table(schema, config.n_rows);
    const std::size_t n = config.n_rows;

    // Per-(column, level) log-odds shifts, validated against the schema.
    std::vector<std::vector<double>> shifts(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c)
        shifts[c].assign(schema[c].levels.size(), 0.0);
    for (const auto& effect : config.effects) {
        std::size_t c;
        try {
            c = table.col_index(effect.feature);
        } catch (const DataError&) {
            throw UsageError("synth: planted effect names unknown feature '" + effect.feature + "'");
        }
        if (schema[c].kind != ColumnKind::categorical || schema[c].role != ColumnRole::feature)
            throw UsageError("synth: planted effect feature '" + effect.feature +
                             "' is not a categorical feature");
        const auto code = schema[c].level_code(effect.level);
        if (!code)
            throw UsageError("synth: planted effect names unknown level '" + effect.level +
                             "' of '" + effect.feature + "'");
        shifts[c][*code] += effect.log_odds_shift;
    }

    // Age first: the latent frailty score is age plus noise, and the health
    // markers load on it. Each column still owns a derived stream, so rows
    // are i.i.d. and the table is seed-reproducible.
    std::vector<double> age(n), frailty(n);
    {
        Rng rng(derive_seed(config.seed, 2));
        Rng noise(derive_seed(config.seed, 3));
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (rng.next_double() + rng.next_double() + rng.next_double()) / 3.0;
            age[i] = 50.0 + std::floor(u * 39.0);
            const double eps =
                noise.next_double() + noise.next_double() + noise.next_double() - 1.5;
            frailty[i] = (age[i] - 68.0) / 9.5 + 1.15 * eps;
        }
    }

    std::vector<double> row_shift(n, 0.0);
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const auto& spec = schema[c];
        if (spec.role == ColumnRole::id) {
            auto& vals = table.values(c);
            for (std::size_t i = 0; i < n; ++i) vals[i] = static_cast<double>(i + 1);
            continue;
        }
        if (spec.role == ColumnRole::target) continue;
        if (spec.kind == ColumnKind::numeric) {
            table.values(c) = age;
            continue;
        }
        Rng rng(derive_seed(config.seed, 1000 + c));
        const CatFeatureDef* def = nullptr;
        for (const auto& d : synthetic_features())
            if (spec.name == d.name) { def = &d; break; }
        auto& codes = table.codes(c);
        if (def->frailty_weight != 0.0) {
            // Frailty-loaded two-level feature.
            double loaded_mass = 0.0, total_mass = 0.0;
            for (const auto& [level, w] : def->level_probs) {
                total_mass += w;
                if (std::string_view(level) == def->loaded_level) loaded_mass = w;
            }
            const double base = loaded_mass / total_mass;
            const double base_logit = std::log(base / (1.0 - base));
            const auto loaded = spec.level_code(def->loaded_level);
            for (std::size_t i = 0; i < n; ++i) {
                const double p = logistic(base_logit + def->frailty_weight * frailty[i]);
                codes[i] = rng.next_double() < p ? *loaded : 1 - *loaded;
                row_shift[i] += shifts[c][codes[i]];
            }
            continue;
        }
        // Inverse-CDF draw over the feature's level weights, looked up by
        // level name so schema sorting cannot skew marginals.
        std::vector<double> cdf(spec.levels.size(), 0.0);
        double total = 0.0;
        for (const auto& [level, w] : def->level_probs) {
            const auto code = spec.level_code(level);
            cdf[*code] = w;
        }
        for (double w : cdf) total += w;
        double acc = 0.0;
        for (auto& w : cdf) { acc += w / total; w = acc; }
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.next_double();
            std::int32_t code = 0;
            while (code + 1 < static_cast<std::int32_t>(cdf.size()) && u >= cdf[code]) ++code;
            codes[i] = code;
            row_shift[i] += shifts[c][code];
        }
    }

    // Calibrate the intercept so the mean label probability over the realized
    // covariates equals the requested positive rate.
    double lo = -30.0, hi = 30.0;
    for (int iter = 0; iter < 100; ++iter) {
        const double mid = 0.5 * (lo + hi);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += logistic(mid + row_shift[i]);
        mean /= static_cast<double>(n);
        if (mean < config.positive_rate) lo = mid; else hi = mid;
    }
    const double intercept = 0.5 * (lo + hi);

    Rng label_rng(derive_seed(config.seed, 7));
    auto& target = table.codes(table.target_col());
    for (std::size_t i = 0; i < n; ++i)
        target[i] = label_rng.next_double() < logistic(intercept + row_shift[i]) ? 1 : 0;
    return table;
}

} // namespace nonresp::tabular
