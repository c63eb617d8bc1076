#pragma once

#include <map>
#include <memory>
#include <string>

#include "nonresp/classifier.hpp"

namespace nonresp::models {

/// Model selection by name plus flat hyperparameters, as the CLI and the
/// cross-validation drivers see them. Numeric knobs live in params, string
/// knobs (penalty, kernel, activation, hidden sizes) in options.
struct ModelSpec {
    std::string name = "rf";
    std::map<std::string, double> params;
    std::map<std::string, std::string> options;
    std::uint64_t seed = 0;
};

/// Valid names: null knn cart rf adaboost logreg svc mlp. Defaults follow the
/// tuned survey settings: knn k=10, rf trees=10, adaboost stages=3, logreg
/// l2 C=1, svc rbf C=1 gamma=0.1, mlp (4,2) tanh with 1000 adam epochs.
/// Unknown names or parameter keys are usage errors.
std::unique_ptr<Classifier> make_classifier(const ModelSpec& spec);

/// The survey recipe pairs min-max scaling with knn, no scaling with the
/// tree models, and standard scaling with everything else.
enum class ScalerChoice { standard, min_max, none };
ScalerChoice default_scaler_for(const std::string& model_name);

} // namespace nonresp::models
