#include "nonresp/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nonresp/parallel.hpp"
#include "nonresp/rng.hpp"

namespace nonresp::trees {

namespace {

// Reductions this small are treated as zero so degenerate splits never win.
constexpr double kMinReduction = 1e-12;

struct WeightedCounts {
    double mass = 0.0;
    double positive = 0.0;
    // Weight sums can land a hair outside [0,1] in floating point.
    double fraction() const {
        return mass > 0.0 ? std::clamp(positive / mass, 0.0, 1.0) : 0.0;
    }
    double impurity() const { return gini(fraction()); }
};

// Split search over an explicit row subset; rows may repeat (bootstrap).
std::optional<SplitChoice> best_split_rows(const Matrix& x, std::span<const int> y,
                                           std::span<const double> w,
                                           std::span<const std::size_t> rows,
                                           std::span<const std::size_t> features,
                                           std::size_t min_samples_leaf,
                                           std::vector<std::size_t>& order_scratch) {
    const std::size_t m = rows.size();
    if (m < 2) return std::nullopt;

    WeightedCounts total;
    for (auto r : rows) {
        const double wr = w.empty() ? 1.0 : w[r];
        total.mass += wr;
        total.positive += wr * y[r];
    }
    const double parent_cost = total.impurity();
    if (parent_cost == 0.0) return std::nullopt;

    std::optional<SplitChoice> best;
    auto& order = order_scratch;
    order.assign(rows.begin(), rows.end());

    for (std::size_t f : features) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return x(a, f) < x(b, f);
        });
        WeightedCounts left;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const std::size_t r = order[i];
            const double wr = w.empty() ? 1.0 : w[r];
            left.mass += wr;
            left.positive += wr * y[r];
            const double v = x(r, f), next = x(order[i + 1], f);
            if (v == next) continue; // only split between distinct values
            if (i + 1 < min_samples_leaf || m - i - 1 < min_samples_leaf) continue;
            WeightedCounts right{total.mass - left.mass, total.positive - left.positive};
            const double cost = (left.mass / total.mass) * left.impurity() +
                                (right.mass / total.mass) * right.impurity();
            const double reduction = parent_cost - cost;
            if (reduction > kMinReduction && (!best || reduction > best->reduction))
                best = SplitChoice{f, v + 0.5 * (next - v), reduction};
        }
    }
    return best;
}

class CartBuilder {
public:
    CartBuilder(const Matrix& x, std::span<const int> y, std::span<const double> w,
                const CartConfig& config, std::size_t max_features, Rng* rng)
        : x_(x), y_(y), w_(w), config_(config), max_features_(max_features), rng_(rng) {
        all_features_.resize(x.cols());
        std::iota(all_features_.begin(), all_features_.end(), 0);
    }

    Tree build(std::vector<std::size_t> rows) {
        Tree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    int grow(Tree& tree, std::vector<std::size_t> rows, std::size_t depth) {
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        WeightedCounts counts;
        for (auto r : rows) {
            const double wr = w_.empty() ? 1.0 : w_[r];
            counts.mass += wr;
            counts.positive += wr * y_[r];
        }
        tree.nodes[index].p = counts.fraction();
        tree.nodes[index].count = rows.size();

        if (depth >= config_.max_depth || rows.size() < config_.min_samples_split)
            return index;

        std::optional<SplitChoice> split;
        if (max_features_ >= x_.cols()) {
            split = best_split_rows(x_, y_, w_, rows, all_features_, config_.min_samples_leaf,
                                    order_scratch_);
        } else {
            // Partial Fisher-Yates draw of distinct features, sorted so the
            // tie rule stays an index comparison.
            sampled_.assign(all_features_.begin(), all_features_.end());
            for (std::size_t i = 0; i < max_features_; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng_->below(sampled_.size() - i));
                std::swap(sampled_[i], sampled_[j]);
            }
            sampled_.resize(max_features_);
            std::sort(sampled_.begin(), sampled_.end());
            split = best_split_rows(x_, y_, w_, rows, sampled_, config_.min_samples_leaf,
                                    order_scratch_);
        }
        if (!split) return index;

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (auto r : rows)
            (x_(r, split->feature) <= split->threshold ? left_rows : right_rows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        tree.nodes[index].feature = static_cast<int>(split->feature);
        tree.nodes[index].threshold = split->threshold;
        const int left = grow(tree, std::move(left_rows), depth + 1);
        tree.nodes[index].left = left;
        const int right = grow(tree, std::move(right_rows), depth + 1);
        tree.nodes[index].right = right;
        return index;
    }

    const Matrix& x_;
    std::span<const int> y_;
    std::span<const double> w_;
    const CartConfig config_;
    const std::size_t max_features_;
    Rng* rng_;
    std::vector<std::size_t> all_features_;
    std::vector<std::size_t> sampled_;
    std::vector<std::size_t> order_scratch_;
};

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

} // namespace

double gini(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("gini: p must lie in [0,1]");
    return 2.0 * p * (1.0 - p);
}

std::optional<SplitChoice> best_split(const Matrix& features, std::span<const int> labels,
                                      std::span<const double> weights,
                                      std::span<const std::size_t> candidate_features) {
    if (!weights.empty())
        for (double w : weights)
            if (!(w > 0.0)) throw UsageError("best_split: weights must be positive");
    std::vector<std::size_t> scratch;
    return best_split_rows(features, labels, weights, iota_rows(features.rows()),
                           candidate_features, 1, scratch);
}

const TreeNode& Tree::leaf_for(std::span<const double> row) const {
    const TreeNode* node = &nodes[0];
    while (node->feature >= 0)
        node = &nodes[row[node->feature] <= node->threshold ? node->left : node->right];
    return *node;
}

std::size_t Tree::depth() const {
    // Depth by walking; the arena stores children after their parent.
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (nodes[i].feature >= 0) {
            stack.push_back({nodes[i].left, d + 1});
            stack.push_back({nodes[i].right, d + 1});
        }
    }
    return deepest;
}

Tree cart_fit(const Matrix& features, std::span<const int> labels,
              std::span<const double> weights, const CartConfig& config) {
    if (features.rows() == 0) throw UsageError("cart: empty training data");
    if (labels.size() != features.rows()) throw UsageError("cart: one label per row required");
    check_binary_labels(labels);
    if (config.min_samples_leaf < 1) throw UsageError("cart: min_samples_leaf must be >= 1");
    CartBuilder builder(features, labels, weights, config, features.cols(), nullptr);
    return builder.build(iota_rows(features.rows()));
}

void Cart::fit(const Matrix& features, std::span<const int> labels) {
    tree_ = cart_fit(features, labels, {}, config_);
}

std::vector<double> Cart::score(const Matrix& features) const {
    if (tree_.nodes.empty()) throw UsageError("cart: not fitted");
    std::vector<double> out(features.rows());
    parallel::for_range(features.rows(), [&](std::size_t r) {
        out[r] = tree_.leaf_score(features.row(r));
    });
    return out;
}

void Forest::fit(const Matrix& features, std::span<const int> labels) {
    if (config_.n_trees < 1) throw UsageError("forest: n_trees must be >= 1");
    check_binary_labels(labels);
    const std::size_t d = features.cols();
    std::size_t max_features = config_.max_features;
    if (max_features == 0)
        max_features = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(d))));
    max_features = std::min(std::max<std::size_t>(1, max_features), d);

    const std::size_t n = features.rows();
    trees_.assign(config_.n_trees, Tree{});
    CartConfig tree_config; // fully grown
    parallel::for_range(config_.n_trees, [&](std::size_t t) {
        Rng rng(derive_seed(config_.seed, t));
        std::vector<std::size_t> rows;
        if (config_.bootstrap) {
            rows.resize(n);
            for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
        } else {
            rows = iota_rows(n);
        }
        CartBuilder builder(features, labels, {}, tree_config, max_features, &rng);
        trees_[t] = builder.build(std::move(rows));
    });
}

std::vector<double> Forest::score(const Matrix& features) const {
    if (trees_.empty()) throw UsageError("forest: not fitted");
    std::vector<double> votes(features.rows(), 0.0);
    parallel::for_range(features.rows(), [&](std::size_t r) {
        const auto row = features.row(r);
        double positive = 0.0;
        for (const auto& tree : trees_) positive += tree.predict_row(row);
        votes[r] = positive / static_cast<double>(trees_.size());
    });
    return votes;
}

double stage_weight(double weighted_error) {
    return 0.5 * std::log((1.0 - weighted_error) / weighted_error);
}

void AdaBoost::fit(const Matrix& features, std::span<const int> labels) {
    if (n_stages_ < 1) throw UsageError("adaboost: need at least one stage");
    check_binary_labels(labels);
    if (!both_classes_present(labels)) throw UsageError("adaboost: both classes required");
    const std::size_t n = features.rows();

    std::size_t ones = 0;
    for (int y : labels) ones += static_cast<std::size_t>(y);
    fallback_majority_ = 2 * ones > n ? 1 : 0;
    fitted_ = true;

    // Signed labels and uniform starting weights.
    std::vector<double> signed_y(n);
    for (std::size_t i = 0; i < n; ++i) signed_y[i] = labels[i] ? 1.0 : -1.0;
    std::vector<double> w(n, 1.0 / static_cast<double>(n));

    stages_.clear();
    CartConfig stump_config;
    stump_config.max_depth = 1;
    std::vector<int> h(n);

    for (std::size_t t = 0; t < n_stages_; ++t) {
        Tree stump = cart_fit(features, labels, w, stump_config);
        double error = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            h[i] = stump.predict_row(features.row(i)) ? 1 : -1;
            if (h[i] * signed_y[i] < 0.0) error += w[i];
        }
        if (error >= 0.5) break; // no better than chance: discard and stop

        const bool perfect = error == 0.0;
        const double alpha = stage_weight(perfect ? kBoostErrorFloor : error);
        stages_.push_back({alpha, error, std::move(stump)});
        if (perfect) break;

        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= std::exp(-alpha * signed_y[i] * h[i]);
            mass += w[i];
        }
        for (auto& wi : w) wi /= mass;
    }
}

std::vector<double> AdaBoost::score(const Matrix& features) const {
    if (!fitted_) throw UsageError("adaboost: not fitted");
    std::vector<double> out(features.rows(), 0.0);
    if (stages_.empty()) {
        // Degenerate fit: constant majority-class margin.
        std::fill(out.begin(), out.end(), fallback_majority_ ? 1.0 : -1.0);
        return out;
    }
    parallel::for_range(features.rows(), [&](std::size_t r) {
        const auto row = features.row(r);
        double margin = 0.0;
        for (const auto& stage : stages_)
            margin += stage.alpha * (stage.stump.predict_row(row) ? 1.0 : -1.0);
        out[r] = margin;
    });
    return out;
}

} // namespace nonresp::trees
