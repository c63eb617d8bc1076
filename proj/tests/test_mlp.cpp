#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nonresp/linear_margin.hpp"
#include "nonresp/mlp.hpp"
#include "nonresp/rng.hpp"

using namespace nonresp;
using namespace nonresp::mlp;

namespace {

Matrix xor_features() {
    Matrix x(4, 2);
    x(0, 0) = 0; x(0, 1) = 0;
    x(1, 0) = 0; x(1, 1) = 1;
    x(2, 0) = 1; x(2, 1) = 0;
    x(3, 0) = 1; x(3, 1) = 1;
    return x;
}

const std::vector<int> kXorLabels{0, 1, 1, 0};

// Loss as a function of the flattened parameters, for finite differences.
double loss_at(MlpParams params, const Matrix& x, const std::vector<int>& y,
               std::size_t flat_index, double bump) {
    std::size_t at = 0;
    for (std::size_t layer = 0; layer < params.n_layers(); ++layer) {
        auto& w = params.weights[layer].data();
        if (flat_index < at + w.size()) {
            w[flat_index - at] += bump;
            break;
        }
        at += w.size();
        auto& b = params.biases[layer];
        if (flat_index < at + b.size()) {
            b[flat_index - at] += bump;
            break;
        }
        at += b.size();
    }
    return mean_cross_entropy(forward(params, x).first, y);
}

std::vector<double> flat_gradients(const MlpParams& params, const Matrix& x,
                                   const std::vector<int>& y) {
    const auto cache = forward(params, x).second;
    const auto grads = backward(params, cache, x, y);
    std::vector<double> flat;
    for (std::size_t layer = 0; layer < grads.weights.size(); ++layer) {
        flat.insert(flat.end(), grads.weights[layer].data().begin(),
                    grads.weights[layer].data().end());
        flat.insert(flat.end(), grads.biases[layer].begin(), grads.biases[layer].end());
    }
    return flat;
}

} // namespace

TEST_CASE("all-zero parameters output one half everywhere") {
    MlpConfig config;
    auto params = mlp_init(3, config);
    for (auto& w : params.weights) std::fill(w.data().begin(), w.data().end(), 0.0);
    Matrix x(5, 3);
    Rng rng(2);
    for (auto& v : x.data()) v = rng.uniform(-3.0, 3.0);
    for (double p : forward(params, x).first) CHECK(p == 0.5);
    CHECK(mlp_predict(params, x) == std::vector<int>(5, 0)); // 0.5 ties to class 0
}

TEST_CASE("no hidden layers reduces to logistic regression") {
    MlpConfig config;
    config.hidden.clear();
    auto params = mlp_init(3, config);
    params.weights[0](0, 0) = 0.7;
    params.weights[0](0, 1) = -1.2;
    params.weights[0](0, 2) = 0.3;
    params.biases[0][0] = 0.4;

    linear_margin::LogRegModel logistic;
    logistic.coef = {0.7, -1.2, 0.3};
    logistic.intercept = 0.4;

    Matrix x(6, 3);
    Rng rng(5);
    for (auto& v : x.data()) v = rng.uniform(-2.0, 2.0);
    const auto net = forward(params, x).first;
    const auto ref = linear_margin::logreg_predict_proba(logistic, x);
    for (std::size_t i = 0; i < net.size(); ++i)
        CHECK(net[i] == doctest::Approx(ref[i]).epsilon(1e-15));
}

TEST_CASE("tanh odd symmetry: negating inputs and first-layer weights") {
    MlpConfig config;
    config.hidden = {{4, Activation::tanh_fn}};
    config.seed = 8;
    auto params = mlp_init(2, config);
    // zero first-layer biases so the pre-activations are odd in x
    std::fill(params.biases[0].begin(), params.biases[0].end(), 0.0);

    Matrix x(5, 2);
    Rng rng(9);
    for (auto& v : x.data()) v = rng.uniform(-1.0, 1.0);
    const auto base = forward(params, x).first;

    auto negated = params;
    for (auto& v : negated.weights[0].data()) v = -v;
    Matrix neg_x = x;
    for (auto& v : neg_x.data()) v = -v;
    const auto flipped = forward(negated, neg_x).first;
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(base[i] == doctest::Approx(flipped[i]).epsilon(1e-15));
}

TEST_CASE("backward matches central finite differences for every activation") {
    for (auto g : {Activation::tanh_fn, Activation::sigmoid_fn, Activation::relu}) {
        MlpConfig config;
        config.hidden = {{3, g}, {2, g}};
        config.seed = 31;
        auto params = mlp_init(3, config);

        Matrix x(7, 3);
        Rng rng(14);
        for (auto& v : x.data()) v = rng.uniform(-1.5, 1.5);
        // Non-zero biases keep every relu pre-activation away from its kink.
        for (auto& layer_bias : params.biases)
            for (auto& b : layer_bias) b = rng.uniform(0.1, 0.5);
        std::vector<int> y{1, 0, 1, 1, 0, 0, 1};

        if (g == Activation::relu) {
            const auto cache = forward(params, x).second;
            for (const auto& z : cache.pre_activation)
                for (double v : z.data()) REQUIRE(std::fabs(v) > 1e-3);
        }

        const auto grads = flat_gradients(params, x, y);
        const double h = 1e-5;
        for (std::size_t k = 0; k < grads.size(); ++k) {
            const double plus = loss_at(params, x, y, k, h);
            const double minus = loss_at(params, x, y, k, -h);
            const double fd = (plus - minus) / (2.0 * h);
            const double rel = std::fabs(fd - grads[k]) / std::max(1.0, std::fabs(grads[k]));
            CHECK(rel < 1e-6);
        }
    }
}

TEST_CASE("output-layer gradient is (a - y) a_prev / batch on a bare net") {
    MlpConfig config;
    config.hidden.clear();
    auto params = mlp_init(2, config);
    Matrix x(3, 2);
    Rng rng(3);
    for (auto& v : x.data()) v = rng.uniform(-1.0, 1.0);
    const std::vector<int> y{1, 0, 1};

    auto [probs, cache] = forward(params, x);
    const auto grads = backward(params, cache, x, y);
    for (std::size_t c = 0; c < 2; ++c) {
        double expect = 0.0;
        for (std::size_t r = 0; r < 3; ++r)
            expect += (probs[r] - y[r]) * x(r, c) / 3.0;
        CHECK(grads.weights[0](0, c) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("a saturated exactly-correct batch has zero gradients") {
    MlpConfig config;
    config.hidden.clear();
    auto params = mlp_init(1, config);
    params.weights[0](0, 0) = 50.0; // sigmoid(50) rounds to exactly 1.0
    params.biases[0][0] = 0.0;
    Matrix x(2, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 2.0;
    const std::vector<int> y{1, 1};
    auto [probs, cache] = forward(params, x);
    REQUIRE(probs[0] == 1.0);
    const auto grads = backward(params, cache, x, y);
    CHECK(grads.weights[0](0, 0) == 0.0);
    CHECK(grads.biases[0][0] == 0.0);
}

TEST_CASE("xor trains to perfect accuracy for at least 8 of 10 seeds") {
    const auto x = xor_features();
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        MlpConfig config;
        config.seed = seed;
        config.batch_size = 4;
        const auto params = mlp_train(x, kXorLabels, config);
        if (mlp_predict(params, x) == kXorLabels) ++wins;
    }
    CHECK(wins >= 8);
}

TEST_CASE("zero epochs returns the seeded initialization") {
    const auto x = xor_features();
    MlpConfig config;
    config.epochs = 0;
    config.seed = 77;
    const auto trained = mlp_train(x, kXorLabels, config);
    const auto init = mlp_init(2, config);
    for (std::size_t layer = 0; layer < trained.n_layers(); ++layer) {
        CHECK(trained.weights[layer].data() == init.weights[layer].data());
        CHECK(trained.biases[layer] == init.biases[layer]);
    }
}

TEST_CASE("training is bit-deterministic given the seed") {
    const auto x = xor_features();
    MlpConfig config;
    config.seed = 5;
    config.epochs = 50;
    config.batch_size = 2;
    const auto a = mlp_train(x, kXorLabels, config);
    const auto b = mlp_train(x, kXorLabels, config);
    for (std::size_t layer = 0; layer < a.n_layers(); ++layer)
        CHECK(a.weights[layer].data() == b.weights[layer].data());
}

TEST_CASE("full-batch training ignores the shuffle seed entirely") {
    const auto x = xor_features();
    MlpConfig a_config;
    a_config.epochs = 40;
    a_config.batch_size = 4;
    a_config.seed = 1;
    MlpConfig b_config = a_config;
    // Same init seed, different shuffle behaviour cannot matter at full batch;
    // verify via an explicitly permuted epoch order by retraining twice.
    const auto a = mlp_train(x, kXorLabels, a_config);
    const auto b = mlp_train(x, kXorLabels, b_config);
    for (std::size_t layer = 0; layer < a.n_layers(); ++layer)
        CHECK(a.weights[layer].data() == b.weights[layer].data());

    SUBCASE("and physically permuted rows only move sums by rounding noise") {
        const std::vector<std::size_t> perm{2, 0, 3, 1};
        const Matrix x_perm = x.take_rows(perm);
        std::vector<int> y_perm(4);
        for (std::size_t i = 0; i < 4; ++i) y_perm[i] = kXorLabels[perm[i]];
        MlpConfig short_config = a_config;
        short_config.epochs = 5;
        const auto base = mlp_train(x, kXorLabels, short_config);
        const auto permuted = mlp_train(x_perm, y_perm, short_config);
        for (std::size_t layer = 0; layer < base.n_layers(); ++layer)
            for (std::size_t i = 0; i < base.weights[layer].data().size(); ++i)
                CHECK(base.weights[layer].data()[i] ==
                      doctest::Approx(permuted.weights[layer].data()[i]).epsilon(1e-9));
    }
}

TEST_CASE("loss trace stays finite and improves by the final epoch") {
    const auto x = xor_features();
    MlpConfig config;
    config.seed = 3;
    config.batch_size = 4;
    std::vector<double> trace;
    mlp_train(x, kXorLabels, config, &trace);
    REQUIRE(trace.size() == config.epochs);
    for (double loss : trace) CHECK(std::isfinite(loss));
    CHECK(trace.back() < trace.front());
}

TEST_CASE("outputs are valid probabilities for roc consumption") {
    MlpConfig config;
    config.seed = 12;
    auto params = mlp_init(4, config);
    Matrix x(50, 4);
    Rng rng(66);
    for (auto& v : x.data()) v = rng.uniform(-8.0, 8.0);
    for (double p : forward(params, x).first) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("classifier adapter clamps the batch size and thresholds at 0.5") {
    const auto x = xor_features();
    MlpConfig config;
    config.seed = 0;
    config.batch_size = 200; // larger than n: clamped to full batch
    Mlp model(config);
    model.fit(x, kXorLabels);
    CHECK(model.predict(x) == kXorLabels);
    REQUIRE(model.loss_trace().size() == config.epochs);
}
