#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nonresp/errors.hpp"

namespace nonresp::tabular {

enum class ColumnKind { categorical, numeric };
enum class ColumnRole { feature, target, id };

/// Code stored for a missing categorical cell.
inline constexpr std::int32_t kMissingCode = -1;

/// Missing numeric cells are NaN.
bool is_missing(double v);
double missing_value();

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::categorical;
    ColumnRole role = ColumnRole::feature;
    std::vector<std::string> levels; // categorical only; lexicographic, unique

    std::optional<std::int32_t> level_code(const std::string& level) const;
};

/// Sorts level lists, then checks the schema invariants: non-empty unique
/// levels, exactly one target, target levels {0,1}.
void normalize_schema(std::vector<ColumnSpec>& schema);

/// Column-major table. Categorical columns hold level codes (index into the
/// spec's sorted level list, kMissingCode when absent); numeric columns hold
/// doubles with NaN as the missing marker.
class Table {
public:
    Table() = default;
    explicit Table(std::vector<ColumnSpec> schema, std::size_t n_rows = 0);

    const std::vector<ColumnSpec>& schema() const { return schema_; }
    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return schema_.size(); }

    std::size_t col_index(const std::string& name) const;

    std::vector<std::int32_t>& codes(std::size_t col);
    const std::vector<std::int32_t>& codes(std::size_t col) const;
    std::vector<double>& values(std::size_t col);
    const std::vector<double>& values(std::size_t col) const;

    void resize_rows(std::size_t n);

    /// Indices of feature columns in schema order.
    std::vector<std::size_t> feature_cols() const;
    std::size_t target_col() const;

    /// Target codes as 0/1 labels. Missing target cells are a data error.
    std::vector<int> labels() const;

    /// New table holding the given rows, in the given order.
    Table take_rows(std::span<const std::size_t> rows) const;

private:
    std::vector<ColumnSpec> schema_;
    std::vector<std::vector<std::int32_t>> cat_;
    std::vector<std::vector<double>> num_;
    std::size_t n_rows_ = 0;
};

// --- schema file: one line per column, "name,kind,role[,level1|level2|...]" ---

std::vector<ColumnSpec> read_schema(const std::string& path);
std::string format_schema(const std::vector<ColumnSpec>& schema);
void write_schema(const std::string& path, const std::vector<ColumnSpec>& schema);

// --- CSV: comma separator, double-quote escaping, mandatory header, UTF-8,
//     empty field = missing ---

Table read_csv(const std::string& path, const std::vector<ColumnSpec>& schema);
Table read_csv_stream(std::istream& in, const std::vector<ColumnSpec>& schema);
std::string format_csv(const Table& table);
void write_csv(const std::string& path, const Table& table);

/// Replace every missing categorical cell by the column's modal level over
/// non-missing cells, ties to the lexicographically smallest level. Numeric
/// columns are untouched.
Table impute_most_frequent(const Table& table);

// --- splitting ---

struct SplitPlan {
    double test_fraction = 0.25;
    std::size_t n_splits = 5;
    std::uint64_t seed = 0;
    bool stratified = false;
};

struct IndexSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Random train/test partition; |test| = round(test_fraction * n_rows).
/// `labels` is required when plan.stratified is set and ignored otherwise;
/// stratification keeps each class within one row of its proportional share.
IndexSplit train_test_split(std::size_t n_rows, const SplitPlan& plan,
                            std::span<const int> labels = {});

/// plan.n_splits independent train/validation partitions, each drawn from a
/// seed-derived stream so the sequence is reproducible.
std::vector<IndexSplit> shuffle_split_iter(std::size_t n_rows, const SplitPlan& plan,
                                           std::span<const int> labels = {});

// --- cohort confidence interval ---

struct ProportionCi {
    double error;
    double lo;
    double hi;
};

/// error = 2 * sqrt(p * (1 - p) / n), interval clipped to [0, 1].
ProportionCi proportion_ci(double p, std::size_t n);

// --- synthetic ELSA-like generator ---

struct PlantedEffect {
    std::string feature;
    std::string level;
    double log_odds_shift;
};

struct SyntheticConfig {
    std::size_t n_rows = 5820;
    double positive_rate = 0.083;
    std::vector<PlantedEffect> effects; // see default_planted_effects()
    std::uint64_t seed = 0;
};

/// Bundled survey-like schema: id, 49 categorical features, numeric age, and
/// the binary nonresponse target.
std::vector<ColumnSpec> synthetic_schema();

/// Default plant: interview mode dominates (phone non-response around 0.20
/// versus 0.05 for web), with smaller health/activity/region effects.
std::vector<PlantedEffect> default_planted_effects();

/// Rows drawn independently; the label follows a logistic model over the
/// planted effects with the intercept calibrated so the expected positive
/// rate equals config.positive_rate on the realized covariates.
Table synth_generate(const SyntheticConfig& config);

} // namespace nonresp::tabular
