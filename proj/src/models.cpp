#include "nonresp/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nonresp/classify_core.hpp"
#include "nonresp/linear_margin.hpp"
#include "nonresp/mlp.hpp"
#include "nonresp/trees.hpp"

namespace nonresp::models {

namespace {

class SpecReader {
public:
    SpecReader(const ModelSpec& spec) : spec_(spec) {}

    double number(const std::string& key, double fallback) {
        used_params_.insert(key);
        const auto it = spec_.params.find(key);
        return it == spec_.params.end() ? fallback : it->second;
    }

    std::string text(const std::string& key, const std::string& fallback) {
        used_options_.insert(key);
        const auto it = spec_.options.find(key);
        return it == spec_.options.end() ? fallback : it->second;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : spec_.params)
            if (!used_params_.count(key))
                throw UsageError("model '" + spec_.name + "': unknown parameter '" + key + "'");
        for (const auto& [key, value] : spec_.options)
            if (!used_options_.count(key))
                throw UsageError("model '" + spec_.name + "': unknown option '" + key + "'");
    }

private:
    const ModelSpec& spec_;
    std::set<std::string> used_params_;
    std::set<std::string> used_options_;
};

std::size_t as_count(double v, const std::string& what) {
    if (v < 0.0 || v != std::floor(v))
        throw UsageError(what + " must be a non-negative integer, got " + std::to_string(v));
    return static_cast<std::size_t>(v);
}

std::vector<mlp::LayerSpec> parse_hidden(const std::string& text, mlp::Activation g) {
    std::vector<mlp::LayerSpec> layers;
    if (text.empty() || text == "none") return layers;
    std::size_t at = 0;
    while (at < text.size()) {
        std::size_t comma = text.find(',', at);
        if (comma == std::string::npos) comma = text.size();
        const std::string token = text.substr(at, comma - at);
        try {
            layers.push_back({static_cast<std::size_t>(std::stoul(token)), g});
        } catch (...) {
            throw UsageError("mlp: bad hidden layer size '" + token + "'");
        }
        at = comma + 1;
    }
    return layers;
}

} // namespace

std::unique_ptr<Classifier> make_classifier(const ModelSpec& spec) {
    SpecReader read(spec);
    std::unique_ptr<Classifier> built;

    if (spec.name == "null") {
        built = std::make_unique<classify_core::NullModel>();
    } else if (spec.name == "knn") {
        built = std::make_unique<classify_core::Knn>(as_count(read.number("k", 10), "knn k"));
    } else if (spec.name == "cart") {
        trees::CartConfig config;
        const double depth = read.number("max_depth", 5);
        config.max_depth = depth <= 0 ? trees::kUnlimitedDepth : as_count(depth, "cart max_depth");
        config.min_samples_leaf = as_count(read.number("min_samples_leaf", 1), "cart min_samples_leaf");
        config.min_samples_split =
            as_count(read.number("min_samples_split", 2), "cart min_samples_split");
        built = std::make_unique<trees::Cart>(config);
    } else if (spec.name == "rf") {
        trees::ForestConfig config;
        config.n_trees = as_count(read.number("trees", 10), "rf trees");
        config.max_features = as_count(read.number("max_features", 0), "rf max_features");
        config.bootstrap = read.number("bootstrap", 1) != 0.0;
        config.seed = spec.seed;
        built = std::make_unique<trees::Forest>(config);
    } else if (spec.name == "adaboost") {
        built = std::make_unique<trees::AdaBoost>(as_count(read.number("stages", 3), "adaboost stages"));
    } else if (spec.name == "logreg") {
        linear_margin::LogRegConfig config;
        const std::string penalty = read.text("penalty", "l2");
        if (penalty == "l1") config.penalty = optim::Penalty::l1;
        else if (penalty == "l2") config.penalty = optim::Penalty::l2;
        else if (penalty == "none") config.penalty = optim::Penalty::none;
        else throw UsageError("logreg: unknown penalty '" + penalty + "'");
        config.c = read.number("c", 1.0);
        config.max_iter = as_count(read.number("max_iter", 0), "logreg max_iter");
        config.tol = read.number("tol", 1e-4);
        config.seed = spec.seed;
        built = std::make_unique<linear_margin::LogReg>(config);
    } else if (spec.name == "svc") {
        linear_margin::SvcConfig config;
        const std::string kernel = read.text("kernel", "rbf");
        if (kernel == "rbf") config.kernel = linear_margin::KernelKind::rbf;
        else if (kernel == "linear") config.kernel = linear_margin::KernelKind::linear;
        else throw UsageError("svc: unknown kernel '" + kernel + "'");
        config.c = read.number("c", 1.0);
        config.gamma = read.number("gamma", 0.1);
        config.tol = read.number("tol", 1e-3);
        config.max_updates = as_count(read.number("max_updates", 0), "svc max_updates");
        built = std::make_unique<linear_margin::Svc>(config);
    } else if (spec.name == "mlp") {
        mlp::MlpConfig config;
        const std::string activation = read.text("activation", "tanh");
        mlp::Activation g;
        if (activation == "tanh") g = mlp::Activation::tanh_fn;
        else if (activation == "sigmoid") g = mlp::Activation::sigmoid_fn;
        else if (activation == "relu") g = mlp::Activation::relu;
        else throw UsageError("mlp: unknown activation '" + activation + "'");
        config.hidden = parse_hidden(read.text("hidden", "4,2"), g);
        config.epochs = as_count(read.number("epochs", 1000), "mlp epochs");
        config.batch_size = as_count(read.number("batch", 200), "mlp batch");
        const double alpha = read.number("alpha", 0.0);
        if (alpha > 0.0) config.optimizer.alpha = alpha;
        config.seed = spec.seed;
        built = std::make_unique<mlp::Mlp>(config);
    } else {
        throw UsageError("unknown model '" + spec.name +
                         "'; expected one of null knn cart rf adaboost logreg svc mlp");
    }
    read.reject_unknown();
    return built;
}

ScalerChoice default_scaler_for(const std::string& model_name) {
    if (model_name == "knn") return ScalerChoice::min_max;
    if (model_name == "cart" || model_name == "rf" || model_name == "adaboost")
        return ScalerChoice::none;
    return ScalerChoice::standard;
}

} // namespace nonresp::models
