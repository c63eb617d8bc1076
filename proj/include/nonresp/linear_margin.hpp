#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nonresp/classifier.hpp"
#include "nonresp/matrix.hpp"
#include "nonresp/optim.hpp"

namespace nonresp::linear_margin {

/// 1/(1+exp(-x)), branch on sign so large |x| never overflows.
double sigmoid(double x);

// --- logistic regression -------------------------------------------------

struct LogRegModel {
    std::vector<double> coef;
    double intercept = 0.0;
};

struct LogRegConfig {
    optim::Penalty penalty = optim::Penalty::l2;
    double c = 1.0;            // inverse regularization strength, lambda = 1/c
    std::size_t max_iter = 0;  // epochs; 0 = 4000 penalized, 3000 without penalty
    double tol = 1e-4;
    std::uint64_t seed = 0;
};

/// Summed negative log-likelihood plus the penalty value; the returned
/// gradient covers the smooth part only (data term, plus l2; l1 is handled
/// proximally by the solver). Layout: one slot per coefficient, intercept
/// last and never penalized. Probabilities are clamped to [1e-12, 1-1e-12].
std::pair<double, std::vector<double>> logreg_nll(std::span<const double> coef, double intercept,
                                                  const Matrix& features,
                                                  std::span<const int> labels,
                                                  optim::Penalty penalty, double lambda);

LogRegModel logreg_fit(const Matrix& features, std::span<const int> labels,
                       const LogRegConfig& config);

std::vector<double> logreg_predict_proba(const LogRegModel& model, const Matrix& features);

class LogReg : public Classifier {
public:
    explicit LogReg(LogRegConfig config = {}) : config_(config) {}
    void fit(const Matrix& features, std::span<const int> labels) override;
    std::vector<double> score(const Matrix& features) const override;
    const LogRegModel& model() const { return model_; }

private:
    LogRegConfig config_;
    LogRegModel model_;
    bool fitted_ = false;
};

// --- kernels and the dual-solved SVC --------------------------------------

enum class KernelKind { linear, rbf };

double kernel_eval(KernelKind kind, double gamma, std::span<const double> a,
                   std::span<const double> b);

struct SvcConfig {
    double c = 1.0;
    KernelKind kernel = KernelKind::rbf;
    double gamma = 0.1;
    double tol = 1e-3;            // KKT tolerance
    std::size_t max_updates = 0;  // successful pair updates; 0 = 200000
    bool record_dual_trace = false;
};

struct DualSolution {
    std::vector<double> a;              // multipliers, 0 <= a_i <= C
    double bias = 0.0;                  // theta0
    std::vector<std::size_t> support;   // indices with a_i > 0
    std::vector<double> theta;          // materialized weights, linear kernel only
    bool converged = false;
    std::vector<double> dual_trace;     // dual objective after each update, on request
};

/// Pairwise SMO ascent on the dual. Selection: take the largest KKT violator,
/// pair it with the index maximizing |E_i - E_j|, ties to the lowest index;
/// the two-variable subproblem is solved in closed form under the box and the
/// equality constraint. The final bias averages y_k - sum_i a_i y_i K(x_i,x_k)
/// over free vectors, or takes the midpoint of the feasible interval when no
/// vector is free.
DualSolution svc_fit(const Matrix& features, std::span<const double> signed_labels,
                     const SvcConfig& config);

std::vector<double> svc_decision(const DualSolution& solution, const SvcConfig& config,
                                 const Matrix& train_features,
                                 std::span<const double> signed_labels, const Matrix& queries);

/// sum a - 1/2 sum_ij a_i a_j y_i y_j K_ij, for gap checks.
double svc_dual_objective(const Matrix& features, std::span<const double> signed_labels,
                          std::span<const double> a, const SvcConfig& config);

/// 1/2 ||theta||^2 + C sum max(0, 1 - y f), linear kernel only.
double svc_primal_objective(const Matrix& features, std::span<const double> signed_labels,
                            const DualSolution& solution, const SvcConfig& config);

class Svc : public Classifier {
public:
    explicit Svc(SvcConfig config = {}) : config_(config) {}
    void fit(const Matrix& features, std::span<const int> labels) override;
    std::vector<double> score(const Matrix& features) const override;
    double decision_threshold() const override { return 0.0; }
    const DualSolution& solution() const { return solution_; }

private:
    SvcConfig config_;
    DualSolution solution_;
    Matrix train_;
    std::vector<double> signed_labels_;
};

} // namespace nonresp::linear_margin
