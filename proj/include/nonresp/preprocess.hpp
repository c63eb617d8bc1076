#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nonresp/classifier.hpp"
#include "nonresp/matrix.hpp"
#include "nonresp/tabular.hpp"

namespace nonresp::preprocess {

using tabular::Table;

// --- imputation (fit on train rows, transform anywhere) ---

/// Per-column fill statistics: modal level for categoricals, median for
/// numerics. Fitted from the given rows only.
struct ImputerState {
    std::vector<std::int32_t> modal_code; // kMissingCode for numeric columns
    std::vector<double> median;           // NaN for categorical columns
};

ImputerState imputer_fit(const Table& table, std::span<const std::size_t> rows);
Table imputer_transform(const ImputerState& state, const Table& table);

// --- encoders ---

enum class EncoderKind { ordinal, one_hot };

/// Level dictionaries snapshotted at fit time plus the derived output layout.
/// one_hot with drop_first omits the lexicographically first level of each
/// column, so a k-level feature contributes k-1 indicator columns.
struct EncoderState {
    EncoderKind kind = EncoderKind::ordinal;
    bool drop_first = false;
    struct ColumnPlan {
        std::string name;
        bool categorical = false;
        std::vector<std::string> levels; // categorical only
        std::size_t out_offset = 0;
        std::size_t out_width = 1;
    };
    std::vector<ColumnPlan> columns; // feature columns in schema order
    std::vector<std::string> feature_names;
    std::size_t out_cols = 0;
};

EncoderState encoder_fit(const Table& table, EncoderKind kind, bool drop_first = false);

/// Encode all rows of `table` against a fitted state. Level lookups go by
/// name, so a table whose dictionaries differ from the fitted ones works as
/// long as every observed level was seen at fit time; anything else is a
/// data error naming the level.
Matrix encoder_transform(const EncoderState& state, const Table& table);

std::pair<EncoderState, Matrix> encoder_fit_transform(const Table& table, EncoderKind kind,
                                                      bool drop_first = false);

// --- scalers ---

enum class ScalerKind { standard, min_max };

/// standard: center = mean, scale = population standard deviation.
/// min_max: center = min, scale = max - min.
struct ScalerState {
    ScalerKind kind = ScalerKind::standard;
    std::vector<double> center;
    std::vector<double> scale;
};

ScalerState scaler_fit(const Matrix& matrix, ScalerKind kind);

/// (x - center) / scale; columns with zero scale map to 0.
Matrix scaler_transform(const ScalerState& state, const Matrix& matrix);

// --- pipeline ---

struct Recipe {
    bool impute = true;
    EncoderKind encoder = EncoderKind::ordinal;
    bool drop_first = true; // used by one_hot only
    std::optional<ScalerKind> scaler = ScalerKind::standard;
};

/// Transformers fitted on the recorded training rows only, plus the fitted
/// classifier. transform/predict/score apply the frozen statistics to all
/// rows of the table they are given.
class FittedPipeline {
public:
    FittedPipeline(const Table& table, std::vector<std::size_t> train_rows, Recipe recipe,
                   std::unique_ptr<Classifier> classifier);

    Matrix transform(const Table& table) const;
    std::vector<int> predict(const Table& table) const;
    std::vector<double> score(const Table& table) const;

    const Classifier& classifier() const { return *classifier_; }
    const std::optional<ScalerState>& scaler_state() const { return scaler_; }
    const EncoderState& encoder_state() const { return encoder_; }
    const std::vector<std::size_t>& train_rows() const { return train_rows_; }
    const std::vector<std::string>& feature_names() const { return encoder_.feature_names; }

private:
    std::vector<std::size_t> train_rows_;
    std::optional<ImputerState> imputer_;
    EncoderState encoder_;
    std::optional<ScalerState> scaler_;
    std::unique_ptr<Classifier> classifier_;
};

struct PipelineResult {
    std::shared_ptr<FittedPipeline> pipeline;
    std::vector<int> test_predictions;
    std::vector<double> test_scores;
};

/// Fit transformers and classifier on the train rows, then predict the test
/// rows. The index sets must be disjoint.
PipelineResult pipeline_fit_predict(const Table& table, std::span<const std::size_t> train_rows,
                                    std::span<const std::size_t> test_rows, const Recipe& recipe,
                                    std::unique_ptr<Classifier> classifier);

} // namespace nonresp::preprocess
