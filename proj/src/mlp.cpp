#include "nonresp/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "nonresp/linear_margin.hpp"
#include "nonresp/parallel.hpp"
#include "nonresp/rng.hpp"

namespace nonresp::mlp {

namespace {

double activate(Activation g, double z) {
    switch (g) {
        case Activation::tanh_fn: return std::tanh(z);
        case Activation::sigmoid_fn: return linear_margin::sigmoid(z);
        case Activation::relu: return z > 0.0 ? z : 0.0;
    }
    return z;
}

// Derivative expressed through the cached activation value where possible.
double activate_grad(Activation g, double z, double a) {
    switch (g) {
        case Activation::tanh_fn: return 1.0 - a * a;
        case Activation::sigmoid_fn: return a * (1.0 - a);
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

std::vector<double> flatten(const MlpParams& params) {
    std::vector<double> flat;
    flat.reserve(params.parameter_count());
    for (std::size_t layer = 0; layer < params.n_layers(); ++layer) {
        flat.insert(flat.end(), params.weights[layer].data().begin(),
                    params.weights[layer].data().end());
        flat.insert(flat.end(), params.biases[layer].begin(), params.biases[layer].end());
    }
    return flat;
}

void unflatten(std::span<const double> flat, MlpParams& params) {
    std::size_t at = 0;
    for (std::size_t layer = 0; layer < params.n_layers(); ++layer) {
        auto& w = params.weights[layer].data();
        std::copy(flat.begin() + at, flat.begin() + at + w.size(), w.begin());
        at += w.size();
        auto& b = params.biases[layer];
        std::copy(flat.begin() + at, flat.begin() + at + b.size(), b.begin());
        at += b.size();
    }
}

std::vector<double> flatten_gradients(const Gradients& grads) {
    std::vector<double> flat;
    for (std::size_t layer = 0; layer < grads.weights.size(); ++layer) {
        flat.insert(flat.end(), grads.weights[layer].data().begin(),
                    grads.weights[layer].data().end());
        flat.insert(flat.end(), grads.biases[layer].begin(), grads.biases[layer].end());
    }
    return flat;
}

} // namespace

std::size_t MlpParams::parameter_count() const {
    std::size_t count = 0;
    for (std::size_t layer = 0; layer < weights.size(); ++layer)
        count += weights[layer].rows() * weights[layer].cols() + biases[layer].size();
    return count;
}

MlpParams mlp_init(std::size_t input_dim, const MlpConfig& config) {
    if (input_dim == 0) throw UsageError("mlp: input dimension must be >= 1");
    for (const auto& layer : config.hidden)
        if (layer.units == 0) throw UsageError("mlp: hidden layers need at least one unit");

    MlpParams params;
    params.input_dim = input_dim;
    Rng rng(derive_seed(config.seed, 0xA11));
    std::size_t fan_in = input_dim;
    auto add_layer = [&](std::size_t units, Activation g) {
        Matrix w(units, fan_in);
        const double r = std::sqrt(6.0 / static_cast<double>(fan_in + units));
        for (auto& v : w.data()) v = rng.uniform(-r, r);
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(units, 0.0);
        params.activations.push_back(g);
        fan_in = units;
    };
    for (const auto& layer : config.hidden) add_layer(layer.units, layer.activation);
    add_layer(1, Activation::sigmoid_fn); // binary output unit
    return params;
}

std::pair<std::vector<double>, ForwardCache> forward(const MlpParams& params,
                                                     const Matrix& rows) {
    check_width(rows, params.input_dim, "mlp forward");
    ForwardCache cache;
    cache.pre_activation.reserve(params.n_layers());
    cache.activation.reserve(params.n_layers());

    const Matrix* input = &rows;
    for (std::size_t layer = 0; layer < params.n_layers(); ++layer) {
        const Matrix& w = params.weights[layer];
        const auto& b = params.biases[layer];
        Matrix z(input->rows(), w.rows());
        for (std::size_t r = 0; r < input->rows(); ++r) {
            const auto in_row = input->row(r);
            for (std::size_t u = 0; u < w.rows(); ++u)
                z(r, u) = b[u] + dot(w.row(u), in_row);
        }
        Matrix a(z.rows(), z.cols());
        const Activation g = params.activations[layer];
        for (std::size_t i = 0; i < z.data().size(); ++i)
            a.data()[i] = activate(g, z.data()[i]);
        cache.pre_activation.push_back(std::move(z));
        cache.activation.push_back(std::move(a));
        input = &cache.activation.back();
    }
    std::vector<double> out(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) out[r] = cache.activation.back()(r, 0);
    return {std::move(out), std::move(cache)};
}

double mean_cross_entropy(std::span<const double> probabilities, std::span<const int> labels) {
    double loss = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = std::clamp(probabilities[i], 1e-12, 1.0 - 1e-12);
        loss += labels[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    return loss / static_cast<double>(probabilities.size());
}

Gradients backward(const MlpParams& params, const ForwardCache& cache, const Matrix& rows,
                   std::span<const int> labels) {
    const std::size_t batch = rows.rows();
    const std::size_t layers = params.n_layers();
    Gradients grads;
    grads.weights.reserve(layers);
    grads.biases.reserve(layers);
    for (std::size_t layer = 0; layer < layers; ++layer) {
        grads.weights.emplace_back(params.weights[layer].rows(), params.weights[layer].cols());
        grads.biases.emplace_back(params.biases[layer].size(), 0.0);
    }

    // Output unit: sigmoid with cross-entropy gives delta = (a - y) / batch.
    Matrix delta(batch, 1);
    for (std::size_t r = 0; r < batch; ++r)
        delta(r, 0) = (cache.activation.back()(r, 0) - static_cast<double>(labels[r])) /
                      static_cast<double>(batch);

    for (std::size_t layer = layers; layer-- > 0;) {
        const Matrix& input =
            layer == 0 ? rows : cache.activation[layer - 1];
        Matrix& dw = grads.weights[layer];
        auto& db = grads.biases[layer];
        for (std::size_t r = 0; r < batch; ++r) {
            const auto in_row = input.row(r);
            for (std::size_t u = 0; u < dw.rows(); ++u) {
                const double d = delta(r, u);
                db[u] += d;
                auto w_row = dw.row(u);
                for (std::size_t c = 0; c < dw.cols(); ++c) w_row[c] += d * in_row[c];
            }
        }
        if (layer == 0) break;

        const Matrix& w = params.weights[layer];
        const Matrix& z_prev = cache.pre_activation[layer - 1];
        const Matrix& a_prev = cache.activation[layer - 1];
        const Activation g = params.activations[layer - 1];
        Matrix next(batch, w.cols());
        for (std::size_t r = 0; r < batch; ++r)
            for (std::size_t c = 0; c < w.cols(); ++c) {
                double acc = 0.0;
                for (std::size_t u = 0; u < w.rows(); ++u) acc += delta(r, u) * w(u, c);
                next(r, c) = acc * activate_grad(g, z_prev(r, c), a_prev(r, c));
            }
        delta = std::move(next);
    }
    return grads;
}

MlpParams mlp_train(const Matrix& features, std::span<const int> labels, const MlpConfig& config,
                    std::vector<double>* loss_trace) {
    if (labels.size() != features.rows()) throw UsageError("mlp: one label per row required");
    check_binary_labels(labels);
    if (!both_classes_present(labels)) throw UsageError("mlp: both classes required");

    MlpParams params = mlp_init(features.cols(), config);
    if (config.epochs == 0) return params;

    const std::size_t n = features.rows();
    const std::size_t batch_size = std::min(config.batch_size, n);
    optim::Minibatcher batcher(n, batch_size, derive_seed(config.seed, 0xB47C));

    std::vector<double> flat = flatten(params);
    auto state = optim::OptimizerState::zeros(flat.size());

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        auto batches = batcher.epoch(epoch);
        for (auto& batch : batches) {
            // Canonical within-batch order: membership is what the shuffle
            // decides; a full batch then accumulates identically every epoch.
            std::sort(batch.begin(), batch.end());
            const Matrix x_batch = features.take_rows(batch);
            std::vector<int> y_batch(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) y_batch[i] = labels[batch[i]];

            auto [probs, cache] = forward(params, x_batch);
            const double loss = mean_cross_entropy(probs, y_batch);
            if (!std::isfinite(loss)) throw NumericError("mlp: non-finite training loss");
            epoch_loss += loss * static_cast<double>(batch.size());

            const auto grads = backward(params, cache, x_batch, y_batch);
            const auto flat_grads = flatten_gradients(grads);
            optim::first_order_step(config.optimizer, state, flat, flat_grads);
            unflatten(flat, params);
        }
        if (loss_trace) loss_trace->push_back(epoch_loss / static_cast<double>(n));
    }
    return params;
}

std::vector<int> mlp_predict(const MlpParams& params, const Matrix& rows) {
    const auto probs = forward(params, rows).first;
    std::vector<int> labels(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) labels[i] = probs[i] > 0.5 ? 1 : 0;
    return labels;
}

void Mlp::fit(const Matrix& features, std::span<const int> labels) {
    loss_trace_.clear();
    params_ = mlp_train(features, labels, config_, &loss_trace_);
}

std::vector<double> Mlp::score(const Matrix& features) const {
    if (params_.n_layers() == 0) throw UsageError("mlp: not fitted");
    // Row shards through the pure forward pass.
    std::vector<double> out(features.rows());
    parallel::for_range(features.rows(), [&](std::size_t r) {
        Matrix one(1, features.cols());
        auto dst = one.row(0);
        const auto src = features.row(r);
        for (std::size_t c = 0; c < features.cols(); ++c) dst[c] = src[c];
        out[r] = forward(params_, one).first[0];
    });
    return out;
}
} // namespace nonresp::mlp
