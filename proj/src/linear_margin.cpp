#include "nonresp/linear_margin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nonresp/parallel.hpp"

namespace nonresp::linear_margin {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

// Logistic data term as a finite sum for SAGA; the intercept rides along as a
// trailing coordinate with constant feature 1.
class LogisticObjective : public optim::FiniteSumObjective {
public:
    LogisticObjective(const Matrix& x, std::span<const int> y) : x_(x), y_(y) {}

    std::size_t n_examples() const override { return x_.rows(); }
    std::size_t dim() const override { return x_.cols() + 1; }

    void example_gradient(std::span<const double> params, std::size_t i,
                          std::span<double> gradient) const override {
        const auto row = x_.row(i);
        double z = params[x_.cols()];
        for (std::size_t k = 0; k < x_.cols(); ++k) z += params[k] * row[k];
        const double residual = sigmoid(z) - static_cast<double>(y_[i]);
        for (std::size_t k = 0; k < x_.cols(); ++k) gradient[k] = residual * row[k];
        gradient[x_.cols()] = residual;
    }

    double loss(std::span<const double> params) const override {
        double total = 0.0;
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            const auto row = x_.row(i);
            double z = params[x_.cols()];
            for (std::size_t k = 0; k < x_.cols(); ++k) z += params[k] * row[k];
            const double h = clamp_prob(sigmoid(z));
            total += y_[i] ? -std::log(h) : -std::log(1.0 - h);
        }
        return total / static_cast<double>(x_.rows());
    }

private:
    const Matrix& x_;
    std::span<const int> y_;
};

} // namespace

std::pair<double, std::vector<double>> logreg_nll(std::span<const double> coef, double intercept,
                                                  const Matrix& features,
                                                  std::span<const int> labels,
                                                  optim::Penalty penalty, double lambda) {
    check_width(features, coef.size(), "logreg_nll");
    const std::size_t n = features.rows(), d = features.cols();
    double loss = 0.0;
    std::vector<double> gradient(d + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = features.row(i);
        double z = intercept;
        for (std::size_t k = 0; k < d; ++k) z += coef[k] * row[k];
        const double h = clamp_prob(sigmoid(z));
        loss -= labels[i] ? std::log(h) : std::log(1.0 - h);
        const double residual = sigmoid(z) - static_cast<double>(labels[i]);
        for (std::size_t k = 0; k < d; ++k) gradient[k] += residual * row[k];
        gradient[d] += residual;
    }
    if (penalty == optim::Penalty::l2) {
        double sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            sq += coef[k] * coef[k];
            gradient[k] += lambda * coef[k];
        }
        loss += 0.5 * lambda * sq;
    } else if (penalty == optim::Penalty::l1) {
        for (std::size_t k = 0; k < d; ++k) loss += lambda * std::fabs(coef[k]);
        // l1 is non-smooth: its contribution stays out of the gradient.
    }
    return {loss, std::move(gradient)};
}

LogRegModel logreg_fit(const Matrix& features, std::span<const int> labels,
                       const LogRegConfig& config) {
    if (labels.size() != features.rows()) throw UsageError("logreg: one label per row required");
    check_binary_labels(labels);
    if (!both_classes_present(labels)) throw UsageError("logreg: both classes required");
    if (config.c <= 0.0) throw UsageError("logreg: c must be positive");

    const std::size_t n = features.rows(), d = features.cols();
    LogisticObjective objective(features, labels);

    // Penalty strength on the averaged objective; the paper's lambda = 1/C
    // multiplies the summed NLL.
    const double lambda_bar =
        config.penalty == optim::Penalty::none ? 0.0 : 1.0 / (config.c * static_cast<double>(n));

    // SAGA step 1/(3L) with L the largest per-example smoothness constant.
    // Only l2 contributes smoothness; l1 enters through the proximal step.
    double max_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 1.0; // intercept coordinate
        for (double v : features.row(i)) sq += v * v;
        max_sq = std::max(max_sq, sq);
    }
    const double lipschitz =
        0.25 * max_sq + (config.penalty == optim::Penalty::l2 ? lambda_bar : 0.0);

    optim::SagaConfig saga;
    saga.alpha = 1.0 / (3.0 * lipschitz);
    saga.lambda = lambda_bar;
    saga.penalty = config.penalty;
    saga.max_epochs = config.max_iter ? config.max_iter
                                      : (config.penalty == optim::Penalty::none ? 3000 : 4000);
    saga.tol = config.tol;
    saga.seed = config.seed;
    saga.unpenalized_tail = 1;

    const auto params = optim::saga_minimize(saga, objective, std::vector<double>(d + 1, 0.0));
    LogRegModel model;
    model.coef.assign(params.begin(), params.begin() + d);
    model.intercept = params[d];
    return model;
}

std::vector<double> logreg_predict_proba(const LogRegModel& model, const Matrix& features) {
    check_width(features, model.coef.size(), "logreg_predict_proba");
    std::vector<double> proba(features.rows());
    parallel::for_range(features.rows(), [&](std::size_t i) {
        proba[i] = sigmoid(model.intercept + dot(features.row(i), model.coef));
    });
    return proba;
}

void LogReg::fit(const Matrix& features, std::span<const int> labels) {
    model_ = logreg_fit(features, labels, config_);
    fitted_ = true;
}

std::vector<double> LogReg::score(const Matrix& features) const {
    if (!fitted_) throw UsageError("logreg: not fitted");
    return logreg_predict_proba(model_, features);
}

// --- kernels ---------------------------------------------------------------

double kernel_eval(KernelKind kind, double gamma, std::span<const double> a,
                   std::span<const double> b) {
    if (a.size() != b.size()) throw UsageError("kernel: length mismatch");
    if (kind == KernelKind::linear) return dot(a, b);
    return std::exp(-gamma * squared_distance(a, b));
}

// --- SMO -------------------------------------------------------------------

namespace {

struct SmoState {
    const Matrix& x;
    std::span<const double> y;
    const SvcConfig& config;
    std::vector<double> gram; // n*n, rows computed in parallel
    std::vector<double> a;
    std::vector<double> error; // E_i = f(x_i) - y_i with the working bias
    double bias = 0.0;

    double k(std::size_t i, std::size_t j) const { return gram[i * x.rows() + j]; }
};

// Feasible-bias interval endpoints, expressed through the error cache. The
// working bias cancels in differences, so the gap is a sound optimality
// measure even while the bias estimate is off. Index t constrains the bias
// from below when raising a_t y_t could still increase the decision there,
// from above in the mirror case; free vectors constrain both sides.
bool lower_set(const SmoState& s, std::size_t t) {
    return (s.a[t] < s.config.c && s.y[t] > 0.0) || (s.a[t] > 0.0 && s.y[t] < 0.0);
}

bool upper_set(const SmoState& s, std::size_t t) {
    return (s.a[t] < s.config.c && s.y[t] < 0.0) || (s.a[t] > 0.0 && s.y[t] > 0.0);
}

bool take_step(SmoState& s, std::size_t i, std::size_t j) {
    if (i == j) return false;
    const double yi = s.y[i], yj = s.y[j];
    const double ai_old = s.a[i], aj_old = s.a[j];
    const double c = s.config.c;

    double low, high;
    if (yi != yj) {
        low = std::max(0.0, aj_old - ai_old);
        high = std::min(c, c + aj_old - ai_old);
    } else {
        low = std::max(0.0, ai_old + aj_old - c);
        high = std::min(c, ai_old + aj_old);
    }
    if (low >= high) return false;

    const double eta = s.k(i, i) + s.k(j, j) - 2.0 * s.k(i, j);
    double aj_new;
    if (eta > 1e-12) {
        aj_new = std::clamp(aj_old + yj * (s.error[i] - s.error[j]) / eta, low, high);
    } else {
        // Flat or numerically degenerate direction: the dual is linear along
        // it, so the maximum sits at an end of the feasible segment.
        const double slope = yj * (s.error[i] - s.error[j]);
        if (slope > 0.0)
            aj_new = high;
        else if (slope < 0.0)
            aj_new = low;
        else
            return false;
    }
    if (std::fabs(aj_new - aj_old) < 1e-12 * (aj_new + aj_old + 1e-12)) return false;

    double ai_new = ai_old + yi * yj * (aj_old - aj_new);
    // The derived multiplier picks up rounding dust; snap it back onto the box.
    if (ai_new < 1e-12 * c) ai_new = 0.0;
    if (ai_new > c - 1e-12 * c) ai_new = c;
    const double di = yi * (ai_new - ai_old), dj = yj * (aj_new - aj_old);

    const double b1 = s.bias - s.error[i] - di * s.k(i, i) - dj * s.k(i, j);
    const double b2 = s.bias - s.error[j] - di * s.k(i, j) - dj * s.k(j, j);
    double b_new;
    if (ai_new > 0.0 && ai_new < c)
        b_new = b1;
    else if (aj_new > 0.0 && aj_new < c)
        b_new = b2;
    else
        b_new = 0.5 * (b1 + b2);

    const double b_delta = b_new - s.bias;
    const std::size_t n = s.x.rows();
    for (std::size_t k = 0; k < n; ++k)
        s.error[k] += di * s.k(i, k) + dj * s.k(j, k) + b_delta;
    s.a[i] = ai_new;
    s.a[j] = aj_new;
    s.bias = b_new;
    return true;
}

} // namespace

DualSolution svc_fit(const Matrix& features, std::span<const double> signed_labels,
                     const SvcConfig& config) {
    const std::size_t n = features.rows();
    if (signed_labels.size() != n) throw UsageError("svc: one label per row required");
    bool pos = false, neg = false;
    for (double y : signed_labels) {
        if (y == 1.0) pos = true;
        else if (y == -1.0) neg = true;
        else throw UsageError("svc: labels must be -1/+1");
    }
    if (!pos || !neg) throw UsageError("svc: both classes required");
    if (config.c <= 0.0) throw UsageError("svc: c must be positive");
    if (config.kernel == KernelKind::rbf && config.gamma <= 0.0)
        throw UsageError("svc: gamma must be positive");

    SmoState s{features, signed_labels, config, {}, {}, {}, 0.0};
    s.gram.resize(n * n);
    parallel::for_range(n, [&](std::size_t i) {
        const auto row = features.row(i);
        for (std::size_t j = 0; j < n; ++j)
            s.gram[i * n + j] = kernel_eval(config.kernel, config.gamma, row, features.row(j));
    });
    s.a.assign(n, 0.0);
    s.error.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) s.error[i] = -signed_labels[i]; // f = 0 initially

    DualSolution solution;
    const std::size_t max_updates = config.max_updates ? config.max_updates : 200000;
    std::size_t updates = 0;

    while (updates < max_updates) {
        // Maximal violating pair: the lower-set index demanding the largest
        // bias against the upper-set index demanding the smallest. Their
        // error-cache gap bounds the worst KKT violation, bias-free.
        std::size_t i1 = n, i2 = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (lower_set(s, t) && (i1 == n || s.error[t] < s.error[i1])) i1 = t;
            if (upper_set(s, t) && (i2 == n || s.error[t] > s.error[i2])) i2 = t;
        }
        if (i1 == n || i2 == n || s.error[i2] - s.error[i1] <= 2.0 * config.tol) {
            solution.converged = true;
            break;
        }

        bool progressed = take_step(s, i1, i2);
        if (!progressed) {
            // Numeric corner: walk partners for the worse-violating side by
            // decreasing error spread until one admits a step.
            std::vector<std::size_t> order(n);
            for (std::size_t j = 0; j < n; ++j) order[j] = j;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double da = std::fabs(s.error[i1] - s.error[a]);
                const double db = std::fabs(s.error[i1] - s.error[b]);
                if (da != db) return da > db;
                return a < b;
            });
            for (std::size_t j : order) {
                if (j == i1 || j == i2) continue;
                if (take_step(s, i1, j) || take_step(s, i2, j)) {
                    progressed = true;
                    break;
                }
            }
        }
        if (!progressed) break; // no pair admits a numeric step: best effort

        ++updates;
        if (config.record_dual_trace)
            solution.dual_trace.push_back(
                svc_dual_objective(features, signed_labels, s.a, config));
    }

    solution.a = std::move(s.a);

    // Final bias from the KKT structure; the working bias only steered SMO.
    std::vector<double> u(n, 0.0); // decision values without bias
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (solution.a[j] > 0.0) acc += solution.a[j] * signed_labels[j] * s.gram[j * n + i];
        u[i] = acc;
    }
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (solution.a[i] > 0.0 && solution.a[i] < config.c) {
            free_sum += signed_labels[i] - u[i];
            ++free_count;
        }
    }
    if (free_count > 0) {
        solution.bias = free_sum / static_cast<double>(free_count);
    } else {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double bound = signed_labels[i] - u[i]; // +-1 - u
            const bool at_zero = solution.a[i] == 0.0;
            if ((at_zero && signed_labels[i] > 0.0) || (!at_zero && signed_labels[i] < 0.0))
                lo = std::max(lo, bound);
            else
                hi = std::min(hi, bound);
        }
        solution.bias = 0.5 * (lo + hi);
    }

    for (std::size_t i = 0; i < n; ++i)
        if (solution.a[i] > 0.0) solution.support.push_back(i);
    if (config.kernel == KernelKind::linear) {
        solution.theta.assign(features.cols(), 0.0);
        for (std::size_t i : solution.support)
            for (std::size_t c = 0; c < features.cols(); ++c)
                solution.theta[c] += solution.a[i] * signed_labels[i] * features(i, c);
    }
    return solution;
}

std::vector<double> svc_decision(const DualSolution& solution, const SvcConfig& config,
                                 const Matrix& train_features,
                                 std::span<const double> signed_labels, const Matrix& queries) {
    check_width(queries, train_features.cols(), "svc_decision");
    std::vector<double> out(queries.rows());
    parallel::for_range(queries.rows(), [&](std::size_t q) {
        const auto row = queries.row(q);
        double f = solution.bias;
        for (std::size_t i : solution.support)
            f += solution.a[i] * signed_labels[i] *
                 kernel_eval(config.kernel, config.gamma, train_features.row(i), row);
        out[q] = f;
    });
    return out;
}

double svc_dual_objective(const Matrix& features, std::span<const double> signed_labels,
                          std::span<const double> a, const SvcConfig& config) {
    const std::size_t n = features.rows();
    double sum_a = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0.0) continue;
        sum_a += a[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (a[j] == 0.0) continue;
            quad += a[i] * a[j] * signed_labels[i] * signed_labels[j] *
                    kernel_eval(config.kernel, config.gamma, features.row(i), features.row(j));
        }
    }
    return sum_a - 0.5 * quad;
}

double svc_primal_objective(const Matrix& features, std::span<const double> signed_labels,
                            const DualSolution& solution, const SvcConfig& config) {
    if (config.kernel != KernelKind::linear)
        throw UsageError("svc primal objective: linear kernel only");
    double norm_sq = 0.0;
    for (double t : solution.theta) norm_sq += t * t;
    double hinge = 0.0;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const double f = dot(features.row(i), solution.theta) + solution.bias;
        hinge += std::max(0.0, 1.0 - signed_labels[i] * f);
    }
    return 0.5 * norm_sq + config.c * hinge;
}

void Svc::fit(const Matrix& features, std::span<const int> labels) {
    check_binary_labels(labels);
    signed_labels_.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) signed_labels_[i] = labels[i] ? 1.0 : -1.0;
    train_ = features;
    solution_ = svc_fit(train_, signed_labels_, config_);
}

std::vector<double> Svc::score(const Matrix& features) const {
    if (solution_.a.empty()) throw UsageError("svc: not fitted");
    return svc_decision(solution_, config_, train_, signed_labels_, features);
}

} // namespace nonresp::linear_margin
