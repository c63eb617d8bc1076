#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "nonresp/classifier.hpp"
#include "nonresp/matrix.hpp"

namespace nonresp::trees {

/// Gini impurity 2p(1-p).
double gini(double p);

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

struct SplitChoice {
    std::size_t feature = 0;
    double threshold = 0.0;
    double reduction = 0.0;
};

/// Best (feature, midpoint) split by weighted Gini cost reduction over the
/// given candidate features. Ties break to the lower feature index, then the
/// lower threshold. Returns nullopt when no split reduces the cost.
std::optional<SplitChoice> best_split(const Matrix& features, std::span<const int> labels,
                                      std::span<const double> weights,
                                      std::span<const std::size_t> candidate_features);

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double p = 0.0;       // weighted positive fraction at the node
    std::size_t count = 0; // rows reaching the node at fit time
};

/// Binary CART stored as a flat arena, root at index 0. Rows route left when
/// feature value <= threshold.
struct Tree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(std::span<const double> row) const;
    double leaf_score(std::span<const double> row) const { return leaf_for(row).p; }
    int predict_row(std::span<const double> row) const { return leaf_for(row).p > 0.5 ? 1 : 0; }
    std::size_t depth() const;
};

struct CartConfig {
    std::size_t max_depth = kUnlimitedDepth;
    std::size_t min_samples_leaf = 1;
    std::size_t min_samples_split = 2;
};

/// Greedy weighted-Gini tree. Empty weights mean uniform.
Tree cart_fit(const Matrix& features, std::span<const int> labels,
              std::span<const double> weights, const CartConfig& config);

/// Classifier adapter over a single tree; score is the leaf positive fraction.
class Cart : public Classifier {
public:
    explicit Cart(CartConfig config = {}) : config_(config) {}
    void fit(const Matrix& features, std::span<const int> labels) override;
    std::vector<double> score(const Matrix& features) const override;
    const Tree& tree() const { return tree_; }

private:
    CartConfig config_;
    Tree tree_;
};

struct ForestConfig {
    std::size_t n_trees = 10;
    std::size_t max_features = 0; // 0 = round(sqrt(d)); d = bagging
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Bootstrap ensemble of fully grown trees with per-split feature sampling.
/// Prediction is the majority vote (score = vote fraction), ties to class 0.
/// Trees fit in parallel from pre-derived per-tree seeds, so the forest is
/// identical to a sequential build.
class Forest : public Classifier {
public:
    explicit Forest(ForestConfig config = {}) : config_(config) {}
    void fit(const Matrix& features, std::span<const int> labels) override;
    std::vector<double> score(const Matrix& features) const override;
    const std::vector<Tree>& tree_list() const { return trees_; }

private:
    ForestConfig config_;
    std::vector<Tree> trees_;
};

/// Stage weight 0.5 * log((1 - e) / e).
double stage_weight(double weighted_error);

/// Weighted error floor used when a stump classifies everything correctly.
inline constexpr double kBoostErrorFloor = 1e-10;

struct BoostStage {
    double alpha = 0.0;
    double error = 0.0; // weighted error e_t under the weights it was fit with
    Tree stump;
};

/// Discrete AdaBoost over depth-1 weighted-Gini stumps. Internally labels map
/// to {-1,+1}; the score is the stage-weighted margin, threshold 0.
class AdaBoost : public Classifier {
public:
    explicit AdaBoost(std::size_t n_stages, std::uint64_t = 0) : n_stages_(n_stages) {}
    void fit(const Matrix& features, std::span<const int> labels) override;
    std::vector<double> score(const Matrix& features) const override;
    double decision_threshold() const override { return 0.0; }

    const std::vector<BoostStage>& stages() const { return stages_; }
    int fallback_majority() const { return fallback_majority_; }

private:
    std::size_t n_stages_;
    std::vector<BoostStage> stages_;
    int fallback_majority_ = 0;
    bool fitted_ = false;
};

} // namespace nonresp::trees
