#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nonresp/errors.hpp"
#include "nonresp/rng.hpp"

namespace nonresp::optim {

enum class OptimizerKind { gd, momentum, nesterov, adagrad, rmsprop, adam };

struct FirstOrderConfig {
    OptimizerKind kind = OptimizerKind::gd;
    double alpha = 0.0; // 0 picks the per-kind default
    double beta = 0.9;  // momentum / nesterov coefficient
    double gamma = 0.9; // rmsprop decay
    double gamma_v = 0.9;
    double gamma_s = 0.999;
    double epsilon = 1e-8;

    /// 0.001 for adam, 0.01 for adagrad, 0.1 otherwise.
    double learning_rate() const;
};

struct OptimizerState {
    std::vector<double> velocity;
    std::vector<double> accumulator; // squared-gradient running term, elementwise >= 0
    std::size_t step_count = 0;

    static OptimizerState zeros(std::size_t dim) {
        return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), 0};
    }
};

/// One in-place parameter update.
///
/// gd            x := x - a g
/// momentum      v := b v - a g;  x := x + v
/// nesterov      same recursion, but the caller must have evaluated the
///               gradient at x + b v (minimize() does this internally)
/// adagrad       s += g^2;               x -= a g / (e + sqrt(s))
/// rmsprop       s := c s + (1-c) g^2;   x -= a g / (e + sqrt(s))
/// adam          v,s as exponential averages, bias-corrected by 1-c^t,
///               x -= a vhat / (e + sqrt(shat))
void first_order_step(const FirstOrderConfig& config, OptimizerState& state,
                      std::vector<double>& params, std::span<const double> gradient);

/// loss and gradient at the given point; gradient written in place.
using Objective =
    std::function<double(std::span<const double> params, std::vector<double>& gradient)>;

struct MinimizeResult {
    std::vector<double> params;
    std::vector<double> loss_trace; // one entry per evaluated iterate, init included
    std::size_t iterations = 0;
    bool converged = false;
};

/// Driver loop: stops when the gradient max-norm drops below tol or after
/// max_iter steps. Non-finite loss or parameters raise NumericError.
MinimizeResult minimize(const FirstOrderConfig& config, const Objective& objective,
                        std::vector<double> init, std::size_t max_iter, double tol);

// --- SAGA ---

enum class Penalty { none, l1, l2 };

struct SagaConfig {
    double alpha = 0.0;   // step size; must be > 0
    double lambda = 0.0;  // penalty strength on the averaged objective
    Penalty penalty = Penalty::none;
    std::size_t max_epochs = 100;
    double tol = 1e-4;    // max-abs parameter change per epoch
    std::uint64_t seed = 0;
    std::size_t unpenalized_tail = 0; // trailing coordinates exempt (intercept)
};

/// Finite-sum objective: F(params) = (1/n) sum_i loss_i(params) + penalty.
/// example_gradient returns the data term of one example only; the solver
/// owns the penalty (l2 added in-gradient, l1 via a proximal step).
class FiniteSumObjective {
public:
    virtual ~FiniteSumObjective() = default;
    virtual std::size_t n_examples() const = 0;
    virtual std::size_t dim() const = 0;
    virtual void example_gradient(std::span<const double> params, std::size_t example,
                                  std::span<double> gradient) const = 0;
    /// Full objective value including penalty; used for traces and tests.
    virtual double loss(std::span<const double> params) const = 0;
};

/// Incremental-gradient solver with a stored gradient table. Exposed as a
/// class so tests can drive single steps and audit the running average.
class SagaSolver {
public:
    SagaSolver(const SagaConfig& config, const FiniteSumObjective& objective,
               std::vector<double> init);

    /// One sampled update. Order: draw j, form g_j(new) - g_j(stored) + mean,
    /// add the l2 term, take the step, soft-threshold for l1, then refresh
    /// the stored entry and its running mean.
    void step();

    /// n steps; returns true once the epoch-to-epoch parameter change is
    /// below tol.
    bool run_epoch();

    const std::vector<double>& params() const { return params_; }
    std::span<const double> stored_gradient(std::size_t example) const;
    const std::vector<double>& stored_mean() const { return mean_; }

private:
    const SagaConfig config_;
    const FiniteSumObjective& objective_;
    std::vector<double> params_;
    std::vector<double> table_; // n x dim stored gradients
    std::vector<double> mean_;
    std::vector<double> scratch_;
    Rng rng_;
    std::size_t penalized_dim_;
};

std::vector<double> saga_minimize(const SagaConfig& config, const FiniteSumObjective& objective,
                                  std::vector<double> init);

// --- mini-batches ---

/// Seeded epoch iterator: every epoch is a fresh permutation of 0..n-1 cut
/// into batches; the last batch may be short.
class Minibatcher {
public:
    Minibatcher(std::size_t n_rows, std::size_t batch_size, std::uint64_t seed);
    std::vector<std::vector<std::size_t>> epoch(std::size_t epoch_index) const;
    std::size_t batches_per_epoch() const;

private:
    std::size_t n_rows_;
    std::size_t batch_size_;
    std::uint64_t seed_;
};

} // namespace nonresp::optim
