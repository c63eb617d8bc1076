#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nonresp/classifier.hpp"
#include "nonresp/preprocess.hpp"
#include "nonresp/tabular.hpp"

namespace nonresp::eval {

using preprocess::Recipe;
using tabular::SplitPlan;
using tabular::Table;

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t total() const { return tp + tn + fp + fn; }
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

/// Derived rates. Undefined ratios are absent, not zero: precision when
/// nothing was predicted positive, recall/balanced when the truth is
/// single-class, specificity/fpr when there are no negatives.
struct MetricsReport {
    double accuracy = 0.0;
    double misclassification = 0.0;
    std::optional<double> balanced_accuracy;
    std::optional<double> recall;
    std::optional<double> precision;
    std::optional<double> specificity;
    std::optional<double> fpr;
    std::optional<double> auc;
};

MetricsReport metrics(const ConfusionMatrix& cm);
MetricsReport metrics(const ConfusionMatrix& cm, std::span<const int> y_true,
                      std::span<const double> scores);

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

/// Thresholds walk the distinct scores in descending order, predicting
/// positive at score >= threshold; tied scores collapse into one step. The
/// curve runs from (inf, 0, 0) to (min score, 1, 1).
struct RocCurve {
    std::vector<RocPoint> points;
};

RocCurve roc_curve(std::span<const int> y_true, std::span<const double> scores);

/// Trapezoidal area over fpr; equals the Mann-Whitney pair statistic.
double auc(const RocCurve& curve);

std::string roc_to_csv(const RocCurve& curve);

// --- cross-validated curves and grids --------------------------------------

using ModelFactory = std::function<std::unique_ptr<Classifier>(double value)>;

struct CurvePoint {
    double value = 0.0;
    double train_mean = 0.0;
    double train_std = 0.0;
    double val_mean = 0.0;
    double val_std = 0.0;
};

struct ValidationCurveResult {
    std::vector<CurvePoint> points;
};

/// Fit one leak-free pipeline per (grid value, shuffle split) and record
/// train/validation accuracy; means and population stds are over splits.
/// use_balanced switches the recorded metric to balanced accuracy.
ValidationCurveResult validation_curve(const ModelFactory& factory,
                                       std::span<const double> grid, const Table& table,
                                       const Recipe& recipe, const SplitPlan& plan,
                                       bool use_balanced = false);

std::string curve_to_csv(const ValidationCurveResult& result);

using ParamMap = std::map<std::string, double>;
using GridFactory = std::function<std::unique_ptr<Classifier>(const ParamMap& params)>;

struct GridCell {
    ParamMap params;
    double train_mean = 0.0;
    double val_mean = 0.0;
    double val_std = 0.0;
};

struct GridSearchResult {
    ParamMap best;
    double best_score = 0.0;
    std::vector<GridCell> table;
};

/// Cross-product search; cells enumerate with sorted keys, first key slowest,
/// each key in its given grid order. Ties keep the earliest cell.
GridSearchResult grid_search(const GridFactory& factory,
                             const std::map<std::string, std::vector<double>>& grid,
                             const Table& table, const Recipe& recipe, const SplitPlan& plan,
                             bool use_balanced = false);

std::string grid_to_csv(const GridSearchResult& result);

} // namespace nonresp::eval
