#include "nonresp/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace nonresp::preprocess {

using tabular::ColumnKind;
using tabular::ColumnRole;
using tabular::kMissingCode;

ImputerState imputer_fit(const Table& table, std::span<const std::size_t> rows) {
    const auto& schema = table.schema();
    ImputerState state;
    state.modal_code.assign(schema.size(), kMissingCode);
    state.median.assign(schema.size(), tabular::missing_value());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (schema[c].role == ColumnRole::id) continue;
        if (schema[c].kind == ColumnKind::categorical) {
            const auto& codes = table.codes(c);
            std::vector<std::size_t> counts(schema[c].levels.size(), 0);
            bool seen = false;
            for (auto r : rows) {
                if (codes[r] == kMissingCode) continue;
                ++counts[codes[r]];
                seen = true;
            }
            if (!seen)
                throw DataError("impute: column '" + schema[c].name +
                                "' is entirely missing in the fitted rows");
            std::size_t best = 0;
            for (std::size_t k = 1; k < counts.size(); ++k)
                if (counts[k] > counts[best]) best = k; // strict: ties keep smaller code
            state.modal_code[c] = static_cast<std::int32_t>(best);
        } else {
            const auto& vals = table.values(c);
            std::vector<double> present;
            present.reserve(rows.size());
            for (auto r : rows)
                if (!tabular::is_missing(vals[r])) present.push_back(vals[r]);
            if (present.empty())
                throw DataError("impute: column '" + schema[c].name +
                                "' is entirely missing in the fitted rows");
            std::sort(present.begin(), present.end());
            const std::size_t n = present.size();
            state.median[c] =
                n % 2 ? present[n / 2] : 0.5 * (present[n / 2 - 1] + present[n / 2]);
        }
    }
    return state;
}

Table imputer_transform(const ImputerState& state, const Table& table) {
    Table out = table;
    const auto& schema = out.schema();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (schema[c].role == ColumnRole::id) continue;
        if (schema[c].kind == ColumnKind::categorical) {
            if (state.modal_code[c] == kMissingCode) continue;
            for (auto& code : out.codes(c))
                if (code == kMissingCode) code = state.modal_code[c];
        } else {
            if (tabular::is_missing(state.median[c])) continue;
            for (auto& v : out.values(c))
                if (tabular::is_missing(v)) v = state.median[c];
        }
    }
    return out;
}

EncoderState encoder_fit(const Table& table, EncoderKind kind, bool drop_first) {
    EncoderState state;
    state.kind = kind;
    state.drop_first = drop_first;
    std::size_t offset = 0;
    for (std::size_t c : table.feature_cols()) {
        const auto& spec = table.schema()[c];
        EncoderState::ColumnPlan plan;
        plan.name = spec.name;
        plan.out_offset = offset;
        if (spec.kind == ColumnKind::categorical) {
            plan.categorical = true;
            plan.levels = spec.levels;
            if (kind == EncoderKind::one_hot) {
                const std::size_t first = drop_first ? 1 : 0;
                plan.out_width = spec.levels.size() - first;
                for (std::size_t k = first; k < spec.levels.size(); ++k)
                    state.feature_names.push_back(spec.name + "=" + spec.levels[k]);
            } else {
                plan.out_width = 1;
                state.feature_names.push_back(spec.name);
            }
        } else {
            plan.out_width = 1;
            state.feature_names.push_back(spec.name);
        }
        offset += plan.out_width;
        state.columns.push_back(std::move(plan));
    }
    if (state.columns.empty()) throw UsageError("encoder: table has no feature columns");
    state.out_cols = offset;
    return state;
}

Matrix encoder_transform(const EncoderState& state, const Table& table) {
    const std::size_t n = table.n_rows();
    Matrix out(n, state.out_cols);
    for (const auto& plan : state.columns) {
        const std::size_t c = table.col_index(plan.name);
        const auto& spec = table.schema()[c];
        if (plan.categorical != (spec.kind == ColumnKind::categorical))
            throw DataError("encoder: column '" + plan.name + "' changed kind");
        if (!plan.categorical) {
            const auto& vals = table.values(c);
            for (std::size_t r = 0; r < n; ++r) {
                if (tabular::is_missing(vals[r]))
                    throw DataError("encoder: missing value in numeric column '" + plan.name +
                                    "' at row " + std::to_string(r) + "; impute first");
                out(r, plan.out_offset) = vals[r];
            }
            continue;
        }
        // Map this table's codes onto the fitted dictionary by level name.
        std::vector<std::int32_t> remap(spec.levels.size());
        for (std::size_t k = 0; k < spec.levels.size(); ++k) {
            const auto it = std::lower_bound(plan.levels.begin(), plan.levels.end(), spec.levels[k]);
            if (it == plan.levels.end() || *it != spec.levels[k])
                remap[k] = kMissingCode;
            else
                remap[k] = static_cast<std::int32_t>(it - plan.levels.begin());
        }
        const auto& codes = table.codes(c);
        const std::size_t first = state.kind == EncoderKind::one_hot && state.drop_first ? 1 : 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (codes[r] == kMissingCode)
                throw DataError("encoder: missing value in column '" + plan.name + "' at row " +
                                std::to_string(r) + "; impute first");
            const std::int32_t code = remap[codes[r]];
            if (code == kMissingCode)
                throw DataError("encoder: unseen level '" + spec.levels[codes[r]] +
                                "' in column '" + plan.name + "'");
            if (state.kind == EncoderKind::one_hot) {
                if (static_cast<std::size_t>(code) >= first)
                    out(r, plan.out_offset + code - first) = 1.0;
            } else {
                out(r, plan.out_offset) = static_cast<double>(code);
            }
        }
    }
    return out;
}

std::pair<EncoderState, Matrix> encoder_fit_transform(const Table& table, EncoderKind kind,
                                                      bool drop_first) {
    auto state = encoder_fit(table, kind, drop_first);
    auto matrix = encoder_transform(state, table);
    return {std::move(state), std::move(matrix)};
}

ScalerState scaler_fit(const Matrix& matrix, ScalerKind kind) {
    if (matrix.rows() == 0) throw UsageError("scaler: empty matrix");
    const std::size_t n = matrix.rows(), d = matrix.cols();
    ScalerState state;
    state.kind = kind;
    state.center.assign(d, 0.0);
    state.scale.assign(d, 0.0);
    if (kind == ScalerKind::standard) {
        for (std::size_t c = 0; c < d; ++c) {
            double mean = 0.0;
            for (std::size_t r = 0; r < n; ++r) mean += matrix(r, c);
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double dl = matrix(r, c) - mean;
                var += dl * dl;
            }
            state.center[c] = mean;
            state.scale[c] = std::sqrt(var / static_cast<double>(n));
        }
    } else {
        for (std::size_t c = 0; c < d; ++c) {
            double lo = matrix(0, c), hi = matrix(0, c);
            for (std::size_t r = 1; r < n; ++r) {
                lo = std::min(lo, matrix(r, c));
                hi = std::max(hi, matrix(r, c));
            }
            state.center[c] = lo;
            state.scale[c] = hi - lo;
        }
    }
    return state;
}

Matrix scaler_transform(const ScalerState& state, const Matrix& matrix) {
    check_width(matrix, state.center.size(), "scaler_transform");
    Matrix out(matrix.rows(), matrix.cols());
    for (std::size_t r = 0; r < matrix.rows(); ++r)
        for (std::size_t c = 0; c < matrix.cols(); ++c)
            out(r, c) = state.scale[c] == 0.0
                            ? 0.0
                            : (matrix(r, c) - state.center[c]) / state.scale[c];
    return out;
}

FittedPipeline::FittedPipeline(const Table& table, std::vector<std::size_t> train_rows,
                               Recipe recipe, std::unique_ptr<Classifier> classifier)
    : train_rows_(std::move(train_rows)), classifier_(std::move(classifier)) {
    const Table train = table.take_rows(train_rows_);
    const Table* fit_view = &train;
    Table imputed_train;
    if (recipe.impute) {
        std::vector<std::size_t> all(train.n_rows());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        imputer_ = imputer_fit(train, all);
        imputed_train = imputer_transform(*imputer_, train);
        fit_view = &imputed_train;
    }
    encoder_ = encoder_fit(*fit_view, recipe.encoder, recipe.drop_first);
    Matrix x = encoder_transform(encoder_, *fit_view);
    if (recipe.scaler) {
        scaler_ = scaler_fit(x, *recipe.scaler);
        x = scaler_transform(*scaler_, x);
    }
    classifier_->fit(x, fit_view->labels());
}

Matrix FittedPipeline::transform(const Table& table) const {
    const Table* view = &table;
    Table imputed;
    if (imputer_) {
        imputed = imputer_transform(*imputer_, table);
        view = &imputed;
    }
    Matrix x = encoder_transform(encoder_, *view);
    if (scaler_) x = scaler_transform(*scaler_, x);
    return x;
}

std::vector<int> FittedPipeline::predict(const Table& table) const {
    return classifier_->predict(transform(table));
}

std::vector<double> FittedPipeline::score(const Table& table) const {
    return classifier_->score(transform(table));
}

PipelineResult pipeline_fit_predict(const Table& table, std::span<const std::size_t> train_rows,
                                    std::span<const std::size_t> test_rows, const Recipe& recipe,
                                    std::unique_ptr<Classifier> classifier) {
    std::unordered_set<std::size_t> seen(train_rows.begin(), train_rows.end());
    for (auto r : test_rows)
        if (seen.count(r))
            throw UsageError("pipeline: train and test indices overlap at row " +
                             std::to_string(r));
    PipelineResult result;
    result.pipeline = std::make_shared<FittedPipeline>(
        table, std::vector<std::size_t>(train_rows.begin(), train_rows.end()), recipe,
        std::move(classifier));
    const Table test = table.take_rows(test_rows);
    result.test_predictions = result.pipeline->predict(test);
    result.test_scores = result.pipeline->score(test);
    return result;
}

} // namespace nonresp::preprocess
