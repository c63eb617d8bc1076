#include "nonresp/classify_core.hpp"

#include <algorithm>
#include <numeric>

#include "nonresp/parallel.hpp"

namespace nonresp::classify_core {

void NullModel::fit(const Matrix&, std::span<const int> labels) {
    if (labels.empty()) throw UsageError("null model: empty training labels");
    check_binary_labels(labels);
    std::size_t ones = 0;
    for (int y : labels) ones += static_cast<std::size_t>(y);
    majority_ = 2 * ones > labels.size() ? 1 : 0;
    fitted_ = true;
}

std::vector<double> NullModel::score(const Matrix& features) const {
    if (!fitted_) throw UsageError("null model: not fitted");
    return std::vector<double>(features.rows(), static_cast<double>(majority_));
}

std::vector<int> null_fit_predict(std::span<const int> train_labels, std::size_t n_test) {
    NullModel model;
    model.fit(Matrix(train_labels.size(), 1), train_labels);
    return std::vector<int>(n_test, model.majority());
}

Knn::Knn(std::size_t k) : k_(k) {
    if (k == 0) throw UsageError("knn: k must be >= 1");
}

void Knn::fit(const Matrix& features, std::span<const int> labels) {
    if (labels.size() != features.rows()) throw UsageError("knn: one label per row required");
    check_binary_labels(labels);
    if (k_ > features.rows())
        throw UsageError("knn: k=" + std::to_string(k_) + " exceeds training size " +
                         std::to_string(features.rows()));
    train_ = features;
    labels_.assign(labels.begin(), labels.end());
}

std::vector<double> Knn::score(const Matrix& queries) const {
    if (train_.rows() == 0) throw UsageError("knn: not fitted");
    check_width(queries, train_.cols(), "knn score");

    const std::size_t n = train_.rows();
    std::vector<double> scores(queries.rows(), 0.0);
    parallel::for_range(queries.rows(), [&](std::size_t q) {
        std::vector<double> dist(n);
        const auto query = queries.row(q);
        for (std::size_t i = 0; i < n; ++i)
            dist[i] = squared_distance(query, train_.row(i));

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::nth_element(order.begin(), order.begin() + (k_ - 1), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             if (dist[a] != dist[b]) return dist[a] < dist[b];
                             return a < b; // tie to the lower training index
                         });
        std::size_t positives = 0;
        for (std::size_t j = 0; j < k_; ++j)
            positives += static_cast<std::size_t>(labels_[order[j]]);
        scores[q] = static_cast<double>(positives) / static_cast<double>(k_);
    });
    return scores;
}

} // namespace nonresp::classify_core
