#include "nonresp/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

namespace nonresp::eval {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) throw UsageError("confusion: length mismatch");
    check_binary_labels(y_true);
    check_binary_labels(y_pred);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1)
            ++(y_pred[i] == 1 ? cm.tp : cm.fn);
        else
            ++(y_pred[i] == 1 ? cm.fp : cm.tn);
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw UsageError("metrics: empty confusion matrix");
    const double total = static_cast<double>(cm.total());
    MetricsReport report;
    report.accuracy = static_cast<double>(cm.tp + cm.tn) / total;
    report.misclassification = static_cast<double>(cm.fp + cm.fn) / total;
    if (cm.tp + cm.fn > 0)
        report.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (cm.tp + cm.fp > 0)
        report.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    if (cm.tn + cm.fp > 0) {
        report.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
        report.fpr = static_cast<double>(cm.fp) / static_cast<double>(cm.tn + cm.fp);
    }
    if (report.recall && report.specificity)
        report.balanced_accuracy = 0.5 * (*report.recall + *report.specificity);
    return report;
}

MetricsReport metrics(const ConfusionMatrix& cm, std::span<const int> y_true,
                      std::span<const double> scores) {
    MetricsReport report = metrics(cm);
    report.auc = auc(roc_curve(y_true, scores));
    return report;
}

RocCurve roc_curve(std::span<const int> y_true, std::span<const double> scores) {
    if (y_true.size() != scores.size()) throw UsageError("roc: length mismatch");
    check_binary_labels(y_true);
    std::size_t positives = 0;
    for (int y : y_true) positives += static_cast<std::size_t>(y);
    const std::size_t negatives = y_true.size() - positives;
    if (positives == 0 || negatives == 0)
        throw UsageError("roc: curve undefined for single-class truth");

    std::vector<std::size_t> order(y_true.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        // consume the whole tie group in one step
        while (i < order.size() && scores[order[i]] == threshold) {
            if (y_true[order[i]] == 1) ++tp; else ++fp;
            ++i;
        }
        curve.points.push_back({threshold,
                                static_cast<double>(fp) / static_cast<double>(negatives),
                                static_cast<double>(tp) / static_cast<double>(positives)});
    }
    return curve;
}

double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
    }
    return area;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double fold_metric(const ConfusionMatrix& cm, bool use_balanced) {
    const auto report = metrics(cm);
    if (!use_balanced) return report.accuracy;
    if (!report.balanced_accuracy)
        throw UsageError("metrics: balanced accuracy undefined on a single-class fold");
    return *report.balanced_accuracy;
}

struct FoldScores {
    double train = 0.0;
    double validation = 0.0;
};

template <typename MakeClassifier>
std::vector<FoldScores> run_folds(const MakeClassifier& make, const Table& table,
                                  const Recipe& recipe,
                                  const std::vector<tabular::IndexSplit>& splits,
                                  bool use_balanced) {
    const auto labels = table.labels();
    std::vector<FoldScores> scores;
    scores.reserve(splits.size());
    for (const auto& split : splits) {
        auto result = preprocess::pipeline_fit_predict(table, split.train, split.test, recipe,
                                                       make());
        std::vector<int> val_truth, train_truth;
        for (auto r : split.test) val_truth.push_back(labels[r]);
        for (auto r : split.train) train_truth.push_back(labels[r]);
        const auto train_pred = result.pipeline->predict(table.take_rows(split.train));
        FoldScores fold;
        fold.validation = fold_metric(confusion(val_truth, result.test_predictions), use_balanced);
        fold.train = fold_metric(confusion(train_truth, train_pred), use_balanced);
        scores.push_back(fold);
    }
    return scores;
}

std::pair<double, double> mean_std(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / n)};
}

} // namespace

ValidationCurveResult validation_curve(const ModelFactory& factory,
                                       std::span<const double> grid, const Table& table,
                                       const Recipe& recipe, const SplitPlan& plan,
                                       bool use_balanced) {
    if (grid.empty()) throw UsageError("validation_curve: empty grid");
    const auto labels = table.labels();
    const auto splits = tabular::shuffle_split_iter(table.n_rows(), plan,
                                                    plan.stratified ? labels : std::vector<int>{});
    ValidationCurveResult result;
    for (double value : grid) {
        std::vector<FoldScores> folds;
        try {
            folds = run_folds([&] { return factory(value); }, table, recipe, splits, use_balanced);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("validation_curve: value " + fmt(value) + ": " + e.what());
        }
        std::vector<double> train, val;
        for (const auto& f : folds) {
            train.push_back(f.train);
            val.push_back(f.validation);
        }
        CurvePoint point;
        point.value = value;
        std::tie(point.train_mean, point.train_std) = mean_std(train);
        std::tie(point.val_mean, point.val_std) = mean_std(val);
        result.points.push_back(point);
    }
    return result;
}

std::string curve_to_csv(const ValidationCurveResult& result) {
    std::string out = "param,train_mean,train_std,val_mean,val_std\n";
    for (const auto& p : result.points)
        out += fmt(p.value) + "," + fmt(p.train_mean) + "," + fmt(p.train_std) + "," +
               fmt(p.val_mean) + "," + fmt(p.val_std) + "\n";
    return out;
}

std::string roc_to_csv(const RocCurve& curve) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : curve.points)
        out += fmt(p.threshold) + "," + fmt(p.fpr) + "," + fmt(p.tpr) + "\n";
    return out;
}

GridSearchResult grid_search(const GridFactory& factory,
                             const std::map<std::string, std::vector<double>>& grid,
                             const Table& table, const Recipe& recipe, const SplitPlan& plan,
                             bool use_balanced) {
    if (grid.empty()) throw UsageError("grid_search: empty grid");
    for (const auto& [key, values] : grid)
        if (values.empty()) throw UsageError("grid_search: empty grid for '" + key + "'");

    const auto labels = table.labels();
    const auto splits = tabular::shuffle_split_iter(table.n_rows(), plan,
                                                    plan.stratified ? labels : std::vector<int>{});

    // Odometer over sorted keys; the first key varies slowest.
    std::vector<std::string> keys;
    for (const auto& [key, values] : grid) keys.push_back(key);
    std::vector<std::size_t> at(keys.size(), 0);

    GridSearchResult result;
    bool done = false;
    while (!done) {
        ParamMap params;
        for (std::size_t k = 0; k < keys.size(); ++k) params[keys[k]] = grid.at(keys[k])[at[k]];

        std::vector<FoldScores> folds;
        try {
            folds = run_folds([&] { return factory(params); }, table, recipe, splits,
                              use_balanced);
        } catch (const std::runtime_error& e) {
            std::string context;
            for (const auto& [key, value] : params)
                context += (context.empty() ? "" : ",") + key + "=" + fmt(value);
            throw std::runtime_error("grid_search: cell {" + context + "}: " + e.what());
        }
        std::vector<double> train, val;
        for (const auto& f : folds) {
            train.push_back(f.train);
            val.push_back(f.validation);
        }
        GridCell cell;
        cell.params = params;
        cell.train_mean = mean_std(train).first;
        std::tie(cell.val_mean, cell.val_std) = mean_std(val);
        result.table.push_back(cell);

        if (result.best.empty() || cell.val_mean > result.best_score) {
            result.best = params;
            result.best_score = cell.val_mean;
        }

        // advance the odometer, last key fastest
        done = true;
        for (std::size_t k = keys.size(); k-- > 0;) {
            if (++at[k] < grid.at(keys[k]).size()) {
                done = false;
                break;
            }
            at[k] = 0;
        }
    }
    return result;
}

std::string grid_to_csv(const GridSearchResult& result) {
    std::string header;
    for (const auto& [key, value] : result.table.front().params)
        header += key + ",";
    std::string out = header + "train_mean,val_mean,val_std\n";
    for (const auto& cell : result.table) {
        std::string line;
        for (const auto& [key, value] : cell.params) line += fmt(value) + ",";
        out += line + fmt(cell.train_mean) + "," + fmt(cell.val_mean) + "," +
               fmt(cell.val_std) + "\n";
    }
    return out;
}

} // namespace nonresp::eval
