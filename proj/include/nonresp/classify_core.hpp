#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nonresp/classifier.hpp"
#include "nonresp/matrix.hpp"

namespace nonresp::classify_core {

/// Constant majority-class predictor; the accuracy floor on imbalanced data.
/// A 50/50 tie predicts class 0.
class NullModel : public Classifier {
public:
    void fit(const Matrix& features, std::span<const int> labels) override;
    std::vector<double> score(const Matrix& features) const override;
    int majority() const { return majority_; }

private:
    int majority_ = 0;
    bool fitted_ = false;
};

std::vector<int> null_fit_predict(std::span<const int> train_labels, std::size_t n_test);

/// Lazy learner: stores the training data verbatim and scores a query as the
/// positive fraction among its k nearest rows by squared Euclidean distance.
/// Distance ties go to the lower training-row index; a 0.5 vote predicts 0.
class Knn : public Classifier {
public:
    explicit Knn(std::size_t k);

    void fit(const Matrix& features, std::span<const int> labels) override;
    std::vector<double> score(const Matrix& queries) const override;

    std::size_t k() const { return k_; }
    std::size_t n_train() const { return train_.rows(); }

private:
    std::size_t k_;
    Matrix train_;
    std::vector<int> labels_;
};

} // namespace nonresp::classify_core
