#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nonresp/matrix.hpp"

namespace nonresp {

/// Common contract for every binary classifier in the toolkit.
///
/// score() returns one real per row, higher meaning more positive. Models
/// with probability-scaled scores keep the default 0.5 threshold; margin
/// models (SVC, AdaBoost) report 0. predict() is 1 iff score exceeds the
/// threshold, so an exact tie always resolves to class 0.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual void fit(const Matrix& features, std::span<const int> labels) = 0;
    virtual std::vector<double> score(const Matrix& features) const = 0;
    virtual double decision_threshold() const { return 0.5; }

    virtual std::vector<int> predict(const Matrix& features) const {
        const auto s = score(features);
        std::vector<int> labels(s.size());
        const double threshold = decision_threshold();
        for (std::size_t i = 0; i < s.size(); ++i) labels[i] = s[i] > threshold ? 1 : 0;
        return labels;
    }
};

inline void check_binary_labels(std::span<const int> labels) {
    for (int y : labels)
        if (y != 0 && y != 1) throw UsageError("labels must be 0/1");
}

inline bool both_classes_present(std::span<const int> labels) {
    bool zero = false, one = false;
    for (int y : labels) (y == 0 ? zero : one) = true;
    return zero && one;
}

} // namespace nonresp
