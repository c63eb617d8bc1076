#include "nonresp/optim.hpp"

#include <algorithm>
#include <cmath>

#include "nonresp/rng.hpp"

namespace nonresp::optim {

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

} // namespace

double FirstOrderConfig::learning_rate() const {
    if (alpha > 0.0) return alpha;
    switch (kind) {
        case OptimizerKind::adam: return 0.001;
        case OptimizerKind::adagrad: return 0.01;
        default: return 0.1;
    }
}

void first_order_step(const FirstOrderConfig& config, OptimizerState& state,
                      std::vector<double>& params, std::span<const double> gradient) {
    const std::size_t dim = params.size();
    if (gradient.size() != dim)
        throw UsageError("first_order_step: gradient length does not match parameters");
    if (!all_finite(gradient)) throw NumericError("first_order_step: non-finite gradient");
    if (state.velocity.size() != dim) state = OptimizerState::zeros(dim);

    const double a = config.learning_rate();
    ++state.step_count;

    switch (config.kind) {
        case OptimizerKind::gd:
            for (std::size_t i = 0; i < dim; ++i) params[i] -= a * gradient[i];
            break;
        case OptimizerKind::momentum:
        case OptimizerKind::nesterov:
            // Identical recursion; nesterov differs only in where the caller
            // evaluated the gradient.
            for (std::size_t i = 0; i < dim; ++i) {
                state.velocity[i] = config.beta * state.velocity[i] - a * gradient[i];
                params[i] += state.velocity[i];
            }
            break;
        case OptimizerKind::adagrad:
            for (std::size_t i = 0; i < dim; ++i) {
                state.accumulator[i] += gradient[i] * gradient[i];
                params[i] -= a * gradient[i] / (config.epsilon + std::sqrt(state.accumulator[i]));
            }
            break;
        case OptimizerKind::rmsprop:
            for (std::size_t i = 0; i < dim; ++i) {
                state.accumulator[i] = config.gamma * state.accumulator[i] +
                                       (1.0 - config.gamma) * gradient[i] * gradient[i];
                params[i] -= a * gradient[i] / (config.epsilon + std::sqrt(state.accumulator[i]));
            }
            break;
        case OptimizerKind::adam: {
            const double t = static_cast<double>(state.step_count);
            const double v_corr = 1.0 - std::pow(config.gamma_v, t);
            const double s_corr = 1.0 - std::pow(config.gamma_s, t);
            for (std::size_t i = 0; i < dim; ++i) {
                state.velocity[i] =
                    config.gamma_v * state.velocity[i] + (1.0 - config.gamma_v) * gradient[i];
                state.accumulator[i] = config.gamma_s * state.accumulator[i] +
                                       (1.0 - config.gamma_s) * gradient[i] * gradient[i];
                const double v_hat = state.velocity[i] / v_corr;
                const double s_hat = state.accumulator[i] / s_corr;
                params[i] -= a * v_hat / (config.epsilon + std::sqrt(s_hat));
            }
            break;
        }
    }
    if (!all_finite(params)) throw NumericError("first_order_step: parameters diverged");
}

MinimizeResult minimize(const FirstOrderConfig& config, const Objective& objective,
                        std::vector<double> init, std::size_t max_iter, double tol) {
    MinimizeResult result;
    result.params = std::move(init);
    OptimizerState state = OptimizerState::zeros(result.params.size());

    std::vector<double> gradient(result.params.size(), 0.0);
    std::vector<double> lookahead, lookahead_grad;

    for (std::size_t iter = 0; iter <= max_iter; ++iter) {
        const double loss = objective(result.params, gradient);
        if (!std::isfinite(loss)) throw NumericError("minimize: non-finite loss");
        result.loss_trace.push_back(loss);

        double grad_inf = 0.0;
        for (double g : gradient) grad_inf = std::max(grad_inf, std::fabs(g));
        if (grad_inf < tol) {
            result.converged = true;
            result.iterations = iter;
            return result;
        }
        if (iter == max_iter) break;

        if (config.kind == OptimizerKind::nesterov) {
            lookahead = result.params;
            for (std::size_t i = 0; i < lookahead.size(); ++i)
                lookahead[i] += config.beta * state.velocity[i];
            lookahead_grad.assign(lookahead.size(), 0.0);
            const double look_loss = objective(lookahead, lookahead_grad);
            if (!std::isfinite(look_loss)) throw NumericError("minimize: non-finite loss");
            first_order_step(config, state, result.params, lookahead_grad);
        } else {
            first_order_step(config, state, result.params, gradient);
        }
    }
    result.iterations = max_iter;
    return result;
}

// --- SAGA ---

SagaSolver::SagaSolver(const SagaConfig& config, const FiniteSumObjective& objective,
                       std::vector<double> init)
    : config_(config), objective_(objective), params_(std::move(init)), rng_(config.seed) {
    if (config_.alpha <= 0.0) throw UsageError("saga: step size must be positive");
    if (config_.lambda < 0.0) throw UsageError("saga: lambda must be non-negative");
    if (config_.tol <= 0.0) throw UsageError("saga: tol must be positive");
    const std::size_t n = objective_.n_examples();
    const std::size_t d = objective_.dim();
    if (params_.size() != d) throw UsageError("saga: init length does not match objective");
    penalized_dim_ = d - std::min(config_.unpenalized_tail, d);

    table_.assign(n * d, 0.0);
    mean_.assign(d, 0.0);
    scratch_.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<double> row(table_.data() + i * d, d);
        objective_.example_gradient(params_, i, row);
        for (std::size_t k = 0; k < d; ++k) mean_[k] += row[k];
    }
    for (auto& m : mean_) m /= static_cast<double>(n);
}

std::span<const double> SagaSolver::stored_gradient(std::size_t example) const {
    const std::size_t d = objective_.dim();
    return {table_.data() + example * d, d};
}

void SagaSolver::step() {
    const std::size_t n = objective_.n_examples();
    const std::size_t d = objective_.dim();
    const std::size_t j = static_cast<std::size_t>(rng_.below(n)); // with replacement

    objective_.example_gradient(params_, j, scratch_);
    std::span<double> stored(table_.data() + j * d, d);

    const double a = config_.alpha;
    const double l2 = config_.penalty == Penalty::l2 ? config_.lambda : 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        double estimate = scratch_[k] - stored[k] + mean_[k];
        if (l2 != 0.0 && k < penalized_dim_) estimate += l2 * params_[k];
        params_[k] -= a * estimate;
    }
    if (config_.penalty == Penalty::l1) {
        const double t = a * config_.lambda;
        for (std::size_t k = 0; k < penalized_dim_; ++k)
            params_[k] = soft_threshold(params_[k], t);
    }
    if (!all_finite(params_)) throw NumericError("saga: parameters diverged");

    // Refresh the stored entry; the mean is maintained incrementally.
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < d; ++k) {
        mean_[k] += (scratch_[k] - stored[k]) * inv_n;
        stored[k] = scratch_[k];
    }
}

bool SagaSolver::run_epoch() {
    const std::size_t n = objective_.n_examples();
    const std::vector<double> before = params_;
    for (std::size_t s = 0; s < n; ++s) step();
    double change = 0.0;
    for (std::size_t k = 0; k < params_.size(); ++k)
        change = std::max(change, std::fabs(params_[k] - before[k]));
    return change < config_.tol;
}

std::vector<double> saga_minimize(const SagaConfig& config, const FiniteSumObjective& objective,
                                  std::vector<double> init) {
    if (config.max_epochs == 0) return init;
    SagaSolver solver(config, objective, std::move(init));
    for (std::size_t e = 0; e < config.max_epochs; ++e)
        if (solver.run_epoch()) break;
    return solver.params();
}

// --- mini-batches ---

Minibatcher::Minibatcher(std::size_t n_rows, std::size_t batch_size, std::uint64_t seed)
    : n_rows_(n_rows), batch_size_(batch_size), seed_(seed) {
    if (batch_size == 0) throw UsageError("minibatch: batch_size must be >= 1");
    if (batch_size > n_rows) throw UsageError("minibatch: batch_size exceeds row count");
}

std::size_t Minibatcher::batches_per_epoch() const {
    return (n_rows_ + batch_size_ - 1) / batch_size_;
}

std::vector<std::vector<std::size_t>> Minibatcher::epoch(std::size_t epoch_index) const {
    Rng rng(derive_seed(seed_, epoch_index));
    const auto perm = rng.permutation(n_rows_);
    std::vector<std::vector<std::size_t>> batches;
    batches.reserve(batches_per_epoch());
    for (std::size_t start = 0; start < n_rows_; start += batch_size_) {
        const std::size_t stop = std::min(start + batch_size_, n_rows_);
        batches.emplace_back(perm.begin() + start, perm.begin() + stop);
    }
    return batches;
}

} // namespace nonresp::optim
