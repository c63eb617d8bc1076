#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nonresp/classify_core.hpp"
#include "nonresp/rng.hpp"

using namespace nonresp;
using namespace nonresp::classify_core;

namespace {

Matrix column(std::vector<double> xs) {
    Matrix m(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) m(i, 0) = xs[i];
    return m;
}

// Full-sort reference: average label over the k nearest by (distance, index).
std::vector<double> knn_oracle(const Matrix& train, const std::vector<int>& labels,
                               const Matrix& queries, std::size_t k) {
    std::vector<double> out(queries.rows());
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        std::vector<std::pair<double, std::size_t>> ranked(train.rows());
        for (std::size_t i = 0; i < train.rows(); ++i) {
            double d = 0.0;
            for (std::size_t c = 0; c < train.cols(); ++c) {
                const double diff = queries(q, c) - train(i, c);
                d += diff * diff;
            }
            ranked[i] = {d, i};
        }
        std::sort(ranked.begin(), ranked.end());
        double pos = 0.0;
        for (std::size_t j = 0; j < k; ++j) pos += labels[ranked[j].second];
        out[q] = pos / static_cast<double>(k);
    }
    return out;
}

} // namespace

TEST_CASE("knn fit validates k against the training size") {
    const auto x = column({0.0, 1.0, 10.0});
    const std::vector<int> y{0, 0, 1};
    CHECK_THROWS_AS(Knn(0), UsageError);
    Knn too_big(4);
    CHECK_THROWS_AS(too_big.fit(x, y), UsageError);
    Knn boundary(3); // k = n is valid
    boundary.fit(x, y);
    CHECK(boundary.n_train() == 3);
}

TEST_CASE("nearest neighbour dominates for k=1") {
    Knn model(1);
    model.fit(column({0.0, 1.0, 10.0}), std::vector<int>{0, 0, 1});
    const auto s = model.score(column({9.0}));
    CHECK(s[0] == 1.0);
    CHECK(model.predict(column({9.0})) == std::vector<int>{1});
}

TEST_CASE("score is the positive fraction among the k nearest") {
    std::vector<double> xs(10);
    std::vector<int> ys(10, 0);
    for (std::size_t i = 0; i < 10; ++i) xs[i] = static_cast<double>(i);
    ys[1] = ys[4] = ys[7] = 1; // 3 positives
    Knn model(10);
    model.fit(column(xs), ys);
    CHECK(model.score(column({3.3}))[0] == doctest::Approx(0.3));
}

TEST_CASE("a 0.5 vote predicts the majority class 0") {
    Knn model(2);
    model.fit(column({0.0, 1.0}), std::vector<int>{0, 1});
    CHECK(model.score(column({0.5}))[0] == 0.5);
    CHECK(model.predict(column({0.5})) == std::vector<int>{0});
}

TEST_CASE("knn agrees exactly with the full-sort oracle") {
    Rng rng(17);
    Matrix train(50, 3);
    for (auto& v : train.data()) v = rng.uniform(-1.0, 1.0);
    std::vector<int> labels(50);
    for (auto& y : labels) y = rng.below(2) ? 1 : 0;
    Matrix queries(40, 3);
    for (auto& v : queries.data()) v = rng.uniform(-1.2, 1.2);

    for (std::size_t k : {1u, 5u, 13u}) {
        Knn model(k);
        model.fit(train, labels);
        const auto got = model.score(queries);
        const auto want = knn_oracle(train, labels, queries, k);
        for (std::size_t q = 0; q < queries.rows(); ++q) CHECK(got[q] == want[q]);
    }
}

TEST_CASE("distance ties resolve to the lower training index") {
    // Two training points equidistant from the query, opposite labels.
    Matrix train(2, 1);
    train(0, 0) = -1.0;
    train(1, 0) = 1.0;
    Knn model(1);
    model.fit(train, std::vector<int>{1, 0});
    CHECK(model.score(column({0.0}))[0] == 1.0); // row 0 wins the tie
}

TEST_CASE("knn with k = n reproduces the null model") {
    Rng rng(3);
    Matrix train(30, 2);
    for (auto& v : train.data()) v = rng.uniform(0.0, 4.0);
    std::vector<int> labels(30, 0);
    for (std::size_t i = 0; i < 9; ++i) labels[i] = 1;
    Knn model(30);
    model.fit(train, labels);
    const auto null_pred = null_fit_predict(labels, 5);
    Matrix queries(5, 2);
    for (auto& v : queries.data()) v = rng.uniform(0.0, 4.0);
    CHECK(model.predict(queries) == null_pred);
}

TEST_CASE("uniform feature scaling leaves neighbours and scores unchanged") {
    Rng rng(23);
    Matrix train(40, 2);
    for (auto& v : train.data()) v = rng.uniform(-2.0, 2.0);
    std::vector<int> labels(40);
    for (auto& y : labels) y = rng.below(2) ? 1 : 0;
    Matrix queries(15, 2);
    for (auto& v : queries.data()) v = rng.uniform(-2.0, 2.0);

    Knn model(5);
    model.fit(train, labels);
    const auto base = model.score(queries);
    for (double v : base) {
        const double scaled = v * 5.0; // scores live on the 1/k grid
        CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
    }

    Matrix train2 = train, queries2 = queries;
    for (auto& v : train2.data()) v *= 3.5;
    for (auto& v : queries2.data()) v *= 3.5;
    Knn model2(5);
    model2.fit(train2, labels);
    CHECK(model2.score(queries2) == base);
}

TEST_CASE("duplicating training rows preserves k=1 predictions") {
    Rng rng(31);
    Matrix train(20, 2);
    for (auto& v : train.data()) v = rng.uniform(-1.0, 1.0);
    std::vector<int> labels(20);
    for (auto& y : labels) y = rng.below(2) ? 1 : 0;
    Matrix queries(10, 2);
    for (auto& v : queries.data()) v = rng.uniform(-1.0, 1.0);

    Knn model(1);
    model.fit(train, labels);
    const auto base = model.predict(queries);

    Matrix doubled(40, 2);
    std::vector<int> labels2(40);
    for (std::size_t i = 0; i < 20; ++i) {
        for (std::size_t c = 0; c < 2; ++c) {
            doubled(i, c) = train(i, c);
            doubled(i + 20, c) = train(i, c);
        }
        labels2[i] = labels2[i + 20] = labels[i];
    }
    Knn model2(1);
    model2.fit(doubled, labels2);
    CHECK(model2.predict(queries) == base);
}

TEST_CASE("null model") {
    std::vector<int> labels(100, 0);
    for (std::size_t i = 0; i < 10; ++i) labels[i] = 1;
    CHECK(null_fit_predict(labels, 4) == std::vector<int>{0, 0, 0, 0});

    SUBCASE("all-negative predictions on a 117/1455 test set give 0.9196") {
        // 1455 rows, 117 positives: the null model gets the 1338 negatives.
        const double accuracy = 1338.0 / 1455.0;
        CHECK(accuracy == doctest::Approx(0.9196).epsilon(1e-4));
    }
    SUBCASE("an exact 50/50 training set predicts 0") {
        std::vector<int> even{1, 0, 1, 0};
        CHECK(null_fit_predict(even, 2) == std::vector<int>{0, 0});
    }
    SUBCASE("empty training labels are a usage error") {
        CHECK_THROWS_AS(null_fit_predict({}, 1), UsageError);
    }
}
