#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "nonresp/rng.hpp"
#include "nonresp/trees.hpp"

using namespace nonresp;
using namespace nonresp::trees;

namespace {

Matrix column(std::vector<double> xs) {
    Matrix m(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) m(i, 0) = xs[i];
    return m;
}

// ---- brute-force CART reference -----------------------------------------
// Recomputes every candidate split with fresh passes instead of a sweep; the
// cost formula is shared, the search machinery is not.

struct OracleSplit {
    std::size_t feature;
    double threshold;
    double reduction;
};

double oracle_impurity(const std::vector<std::size_t>& rows, std::span<const int> y) {
    if (rows.empty()) return 0.0;
    double pos = 0.0;
    for (auto r : rows) pos += y[r];
    return gini(pos / static_cast<double>(rows.size()));
}

std::optional<OracleSplit> oracle_best_split(const Matrix& x, std::span<const int> y,
                                             const std::vector<std::size_t>& rows) {
    std::optional<OracleSplit> best;
    const double parent = oracle_impurity(rows, y);
    for (std::size_t f = 0; f < x.cols(); ++f) {
        std::vector<double> values;
        for (auto r : rows) values.push_back(x(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double threshold = values[i] + 0.5 * (values[i + 1] - values[i]);
            std::vector<std::size_t> left, right;
            for (auto r : rows) (x(r, f) <= threshold ? left : right).push_back(r);
            const double total = static_cast<double>(rows.size());
            const double cost =
                (static_cast<double>(left.size()) / total) * oracle_impurity(left, y) +
                (static_cast<double>(right.size()) / total) * oracle_impurity(right, y);
            const double reduction = parent - cost;
            if (reduction > 1e-12 && (!best || reduction > best->reduction))
                best = OracleSplit{f, threshold, reduction};
        }
    }
    return best;
}

int oracle_predict(const Matrix& x, std::span<const int> y, std::vector<std::size_t> rows,
                   std::span<const double> query) {
    for (;;) {
        double pos = 0.0;
        for (auto r : rows) pos += y[r];
        const double p = pos / static_cast<double>(rows.size());
        if (rows.size() < 2 || p == 0.0 || p == 1.0) return p > 0.5 ? 1 : 0;
        const auto split = oracle_best_split(x, y, rows);
        if (!split) return p > 0.5 ? 1 : 0;
        std::vector<std::size_t> next;
        const bool go_left = query[split->feature] <= split->threshold;
        for (auto r : rows)
            if ((x(r, split->feature) <= split->threshold) == go_left) next.push_back(r);
        rows = std::move(next);
    }
}

// ---- exact weighted 0/1 stump search (reference for boosting) ------------

double oracle_stump_error(const Matrix& x, std::span<const int> y, std::span<const double> w) {
    double best = 1.0;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        std::vector<double> values;
        for (std::size_t r = 0; r < x.rows(); ++r) values.push_back(x(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        std::vector<double> cuts{values.front() - 1.0};
        for (std::size_t i = 0; i + 1 < values.size(); ++i)
            cuts.push_back(values[i] + 0.5 * (values[i + 1] - values[i]));
        for (double cut : cuts) {
            // left predicts a, right predicts b, over all four sign choices
            for (int a = 0; a <= 1; ++a)
                for (int b = 0; b <= 1; ++b) {
                    double err = 0.0;
                    for (std::size_t r = 0; r < x.rows(); ++r) {
                        const int pred = x(r, f) <= cut ? a : b;
                        if (pred != y[r]) err += w[r];
                    }
                    best = std::min(best, err);
                }
        }
    }
    return best;
}

struct RandomInstance {
    Matrix x;
    std::vector<int> y;
};

RandomInstance random_instance(Rng& rng, std::size_t max_rows, std::size_t max_cols) {
    const std::size_t n = 4 + rng.below(max_rows - 3);
    const std::size_t d = 1 + rng.below(max_cols);
    RandomInstance inst{Matrix(n, d), std::vector<int>(n)};
    for (auto& v : inst.x.data()) v = static_cast<double>(rng.below(7)); // integer grid: ties happen
    bool has0 = false, has1 = false;
    for (auto& label : inst.y) {
        label = rng.below(2) ? 1 : 0;
        (label ? has1 : has0) = true;
    }
    if (!has0) inst.y[0] = 0;
    if (!has1) inst.y[1 % n] = 1;
    return inst;
}

} // namespace

TEST_CASE("gini impurity") {
    CHECK(gini(0.0) == 0.0);
    CHECK(gini(1.0) == 0.0);
    CHECK(gini(0.5) == 0.5);
    CHECK(gini(0.9) == doctest::Approx(0.18).epsilon(1e-12));
    CHECK_THROWS_AS(gini(-0.1), UsageError);
    CHECK_THROWS_AS(gini(1.1), UsageError);
}

TEST_CASE("best_split finds the separating midpoint") {
    const auto x = column({0, 1, 2, 3});
    const std::vector<int> y{0, 0, 1, 1};
    const std::vector<std::size_t> features{0};
    const auto split = best_split(x, y, {}, features);
    REQUIRE(split.has_value());
    CHECK(split->feature == 0);
    CHECK(split->threshold == doctest::Approx(1.5));
    CHECK(split->reduction == doctest::Approx(0.5).epsilon(1e-12));

    SUBCASE("pure node yields no split") {
        const std::vector<int> pure{1, 1, 1, 1};
        CHECK_FALSE(best_split(x, pure, {}, features).has_value());
    }
    SUBCASE("constant feature contributes no candidates") {
        Matrix two(4, 2);
        for (std::size_t r = 0; r < 4; ++r) {
            two(r, 0) = 5.0; // constant
            two(r, 1) = static_cast<double>(r);
        }
        const std::vector<std::size_t> both{0, 1};
        const auto s = best_split(two, y, {}, both);
        REQUIRE(s.has_value());
        CHECK(s->feature == 1);
    }
    SUBCASE("non-positive weights are rejected") {
        const std::vector<double> w{1.0, 0.0, 1.0, 1.0};
        CHECK_THROWS_AS(best_split(x, y, w, features), UsageError);
    }
}

TEST_CASE("cart separates 1d data at depth one") {
    const auto x = column({0, 1, 2, 3, 10, 11, 12});
    const std::vector<int> y{0, 0, 0, 0, 1, 1, 1};
    const auto tree = cart_fit(x, y, {}, CartConfig{});
    CHECK(tree.depth() == 1);
    for (std::size_t r = 0; r < x.rows(); ++r) CHECK(tree.predict_row(x.row(r)) == y[r]);
}

TEST_CASE("depth zero forces a single majority leaf") {
    const auto x = column({0, 1, 2});
    const std::vector<int> y{1, 0, 0};
    CartConfig config;
    config.max_depth = 0;
    const auto tree = cart_fit(x, y, {}, config);
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.predict_row(x.row(0)) == 0);
    CHECK(tree.nodes[0].p == doctest::Approx(1.0 / 3.0));
    CHECK(tree.nodes[0].count == 3);
}

TEST_CASE("cart matches the exhaustive-split reference on small instances") {
    Rng rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const auto inst = random_instance(rng, 64, 4);
        const auto tree = cart_fit(inst.x, inst.y, {}, CartConfig{});
        std::vector<std::size_t> all(inst.x.rows());
        std::iota(all.begin(), all.end(), 0);
        for (std::size_t r = 0; r < inst.x.rows(); ++r) {
            const int got = tree.predict_row(inst.x.row(r));
            const int want = oracle_predict(inst.x, inst.y, all, inst.x.row(r));
            REQUIRE(got == want);
        }
    }
}

TEST_CASE("cart training accuracy is non-decreasing in depth") {
    Rng rng(7);
    const auto inst = random_instance(rng, 60, 3);
    double previous = -1.0;
    for (std::size_t depth = 0; depth <= 6; ++depth) {
        CartConfig config;
        config.max_depth = depth;
        const auto tree = cart_fit(inst.x, inst.y, {}, config);
        std::size_t hits = 0;
        for (std::size_t r = 0; r < inst.x.rows(); ++r)
            hits += tree.predict_row(inst.x.row(r)) == inst.y[r];
        const double accuracy = static_cast<double>(hits) / static_cast<double>(inst.x.rows());
        CHECK(accuracy >= previous);
        previous = accuracy;
    }
}

TEST_CASE("tree predictions survive monotone feature transforms") {
    Rng rng(13);
    const auto inst = random_instance(rng, 40, 3);
    const auto base = cart_fit(inst.x, inst.y, {}, CartConfig{});

    Matrix warped = inst.x;
    for (std::size_t r = 0; r < warped.rows(); ++r) {
        const double v = warped(r, 0);
        warped(r, 0) = v * v * v + 2.0 * v; // strictly increasing
    }
    const auto tree2 = cart_fit(warped, inst.y, {}, CartConfig{});
    for (std::size_t r = 0; r < inst.x.rows(); ++r)
        CHECK(base.predict_row(inst.x.row(r)) == tree2.predict_row(warped.row(r)));
}

TEST_CASE("forest with one tree, no bootstrap, all features reduces to cart") {
    Rng rng(21);
    const auto inst = random_instance(rng, 50, 3);
    ForestConfig config;
    config.n_trees = 1;
    config.bootstrap = false;
    config.max_features = inst.x.cols();
    Forest forest(config);
    forest.fit(inst.x, inst.y);
    const auto tree = cart_fit(inst.x, inst.y, {}, CartConfig{});
    for (std::size_t r = 0; r < inst.x.rows(); ++r)
        CHECK(forest.predict(inst.x)[r] == tree.predict_row(inst.x.row(r)));
}

TEST_CASE("forest score is the fraction of positive tree votes") {
    Rng rng(33);
    const auto inst = random_instance(rng, 48, 3);
    ForestConfig config;
    config.n_trees = 5;
    config.seed = 2;
    Forest forest(config);
    forest.fit(inst.x, inst.y);
    const auto scores = forest.score(inst.x);
    for (std::size_t r = 0; r < inst.x.rows(); ++r) {
        double votes = 0.0;
        for (const auto& tree : forest.tree_list()) votes += tree.predict_row(inst.x.row(r));
        CHECK(scores[r] == votes / 5.0);
        CHECK(forest.predict(inst.x)[r] == (scores[r] > 0.5 ? 1 : 0)); // tie goes to 0
    }
}

TEST_CASE("forest is seed-deterministic and trees differ across sub-seeds") {
    Rng rng(55);
    const auto inst = random_instance(rng, 64, 4);
    ForestConfig config;
    config.n_trees = 4;
    config.seed = 17;
    Forest a(config), b(config);
    a.fit(inst.x, inst.y);
    b.fit(inst.x, inst.y);
    CHECK(a.score(inst.x) == b.score(inst.x));

    bool some_disagreement = false;
    for (std::size_t r = 0; r < inst.x.rows() && !some_disagreement; ++r)
        some_disagreement = a.tree_list()[0].predict_row(inst.x.row(r)) !=
                            a.tree_list()[1].predict_row(inst.x.row(r));
    CHECK(some_disagreement);
}

TEST_CASE("stage weight formula") {
    CHECK(stage_weight(0.5) == 0.0);
    CHECK(stage_weight(0.1) == doctest::Approx(0.5 * std::log(9.0)).epsilon(1e-15));
    CHECK(stage_weight(0.1) == doctest::Approx(1.09861).epsilon(1e-5));
    CHECK(stage_weight(0.25) == doctest::Approx(0.54931).epsilon(1e-5));
}

TEST_CASE("adaboost drives separable data to zero training error") {
    const auto x = column({0, 1, 2, 3, 10, 11, 12, 13});
    const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
    AdaBoost model(3);
    model.fit(x, y);
    CHECK(model.predict(x) == y);
    REQUIRE(!model.stages().empty());
    CHECK(model.stages()[0].error == 0.0); // perfect stump, capped alpha
    CHECK(model.stages()[0].alpha == stage_weight(kBoostErrorFloor));
}

TEST_CASE("a single stage predicts exactly as its stump") {
    Rng rng(8);
    const auto inst = random_instance(rng, 32, 2);
    AdaBoost model(1);
    model.fit(inst.x, inst.y);
    if (model.stages().empty()) return; // degenerate instance
    const auto& stump = model.stages()[0].stump;
    for (std::size_t r = 0; r < inst.x.rows(); ++r)
        CHECK(model.predict(inst.x)[r] == stump.predict_row(inst.x.row(r)));
}

TEST_CASE("adaboost rejects single-class input and unfitted prediction") {
    const auto x = column({0, 1});
    CHECK_THROWS_AS(AdaBoost(3).fit(x, std::vector<int>{1, 1}), UsageError);
    AdaBoost unfitted(3);
    CHECK_THROWS_AS(unfitted.score(x), UsageError);
}

TEST_CASE("reweighting replay: optimal alpha balances each stump at exactly 0.5") {
    Rng rng(123);
    int checked_stages = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto inst = random_instance(rng, 64, 4);
        AdaBoost model(5);
        model.fit(inst.x, inst.y);
        const std::size_t n = inst.x.rows();

        std::vector<double> w(n, 1.0 / static_cast<double>(n));
        std::vector<double> signed_y(n);
        for (std::size_t i = 0; i < n; ++i) signed_y[i] = inst.y[i] ? 1.0 : -1.0;
        double exp_loss_prev = static_cast<double>(n); // sum of exp(0)
        std::vector<double> margin(n, 0.0);

        for (const auto& stage : model.stages()) {
            std::vector<double> h(n);
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                h[i] = stage.stump.predict_row(inst.x.row(i)) ? 1.0 : -1.0;
                if (h[i] * signed_y[i] < 0.0) err += w[i];
            }
            CHECK(err == doctest::Approx(stage.error).epsilon(1e-12));
            if (stage.error == 0.0) break; // capped stage ends the replay

            // alpha must be the exact closed form of the stored error
            CHECK(stage.alpha == stage_weight(stage.error));

            // the exact weighted-0/1 reference can only be at least as good
            CHECK(oracle_stump_error(inst.x, inst.y, w) <= err + 1e-12);

            double mass = 0.0;
            std::vector<double> w_new(n);
            for (std::size_t i = 0; i < n; ++i) {
                w_new[i] = w[i] * std::exp(-stage.alpha * signed_y[i] * h[i]);
                mass += w_new[i];
            }
            double post_error = 0.0, total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w_new[i] /= mass;
                total += w_new[i];
                if (h[i] * signed_y[i] < 0.0) post_error += w_new[i];
            }
            CHECK(std::fabs(post_error - 0.5) <= 1e-10);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            for (std::size_t i = 0; i < n; ++i)
                if (h[i] * signed_y[i] < 0.0) CHECK(w_new[i] > w[i]);

            // exponential training loss is non-increasing stage over stage
            double exp_loss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                margin[i] += stage.alpha * h[i];
                exp_loss += std::exp(-signed_y[i] * margin[i]);
            }
            CHECK(exp_loss <= exp_loss_prev + 1e-9);
            exp_loss_prev = exp_loss;

            w = std::move(w_new);
            ++checked_stages;
        }
    }
    CHECK(checked_stages > 40); // the suite exercised plenty of regular stages
}

TEST_CASE("chance-level first stump degenerates to the majority model") {
    // XOR-like data: no stump beats 0.5, so the fit keeps zero stages.
    Matrix x(4, 2);
    x(0, 0) = 0; x(0, 1) = 0;
    x(1, 0) = 0; x(1, 1) = 1;
    x(2, 0) = 1; x(2, 1) = 0;
    x(3, 0) = 1; x(3, 1) = 1;
    const std::vector<int> y{0, 1, 1, 0};
    AdaBoost model(5);
    model.fit(x, y);
    CHECK(model.stages().empty());
    CHECK(model.fallback_majority() == 0);
    CHECK(model.predict(x) == std::vector<int>{0, 0, 0, 0});
}
