#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nonresp/classifier.hpp"
#include "nonresp/matrix.hpp"
#include "nonresp/optim.hpp"

namespace nonresp::mlp {

enum class Activation { tanh_fn, sigmoid_fn, relu };

struct LayerSpec {
    std::size_t units = 1;
    Activation activation = Activation::tanh_fn;
};

struct MlpConfig {
    std::vector<LayerSpec> hidden{{4, Activation::tanh_fn}, {2, Activation::tanh_fn}};
    std::size_t epochs = 1000;
    std::size_t batch_size = 200; // clamped to the training size
    optim::FirstOrderConfig optimizer{.kind = optim::OptimizerKind::adam};
    std::uint64_t seed = 0;
};

/// Dense parameters; layer L holds weights (units x fan_in) and one bias per
/// unit. The output layer is a single sigmoid unit.
struct MlpParams {
    std::size_t input_dim = 0;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    std::vector<Activation> activations;

    std::size_t n_layers() const { return weights.size(); }
    std::size_t parameter_count() const;
};

struct ForwardCache {
    std::vector<Matrix> pre_activation; // z per layer
    std::vector<Matrix> activation;     // a per layer (last = output column)
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

/// Seeded uniform init on [-r, r], r = sqrt(6 / (fan_in + fan_out)); biases 0.
MlpParams mlp_init(std::size_t input_dim, const MlpConfig& config);

/// Full forward pass; outputs are the final sigmoid activations in (0,1).
std::pair<std::vector<double>, ForwardCache> forward(const MlpParams& params,
                                                     const Matrix& rows);

/// Exact gradients of the mean binary cross-entropy over the batch.
Gradients backward(const MlpParams& params, const ForwardCache& cache, const Matrix& rows,
                   std::span<const int> labels);

double mean_cross_entropy(std::span<const double> probabilities, std::span<const int> labels);

/// Mini-batch adam training; trace (when given) receives one mean training
/// loss per epoch.
MlpParams mlp_train(const Matrix& features, std::span<const int> labels, const MlpConfig& config,
                    std::vector<double>* loss_trace = nullptr);

std::vector<int> mlp_predict(const MlpParams& params, const Matrix& rows);

class Mlp : public Classifier {
public:
    explicit Mlp(MlpConfig config = {}) : config_(config) {}
    void fit(const Matrix& features, std::span<const int> labels) override;
    std::vector<double> score(const Matrix& features) const override;
    const MlpParams& params() const { return params_; }
    const std::vector<double>& loss_trace() const { return loss_trace_; }

private:
    MlpConfig config_;
    MlpParams params_;
    std::vector<double> loss_trace_;
};

} // namespace nonresp::mlp
