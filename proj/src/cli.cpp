#include "nonresp/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "nonresp/classify_core.hpp"
#include "nonresp/eval.hpp"
#include "nonresp/interpret.hpp"
#include "nonresp/parallel.hpp"
#include "nonresp/svg.hpp"

namespace nonresp::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using tabular::Table;

namespace {

const char* kModelNames[] = {"null", "knn", "cart", "rf", "adaboost", "logreg", "svc", "mlp"};

bool is_model_name(const std::string& name) {
    for (const char* m : kModelNames)
        if (name == m) return true;
    return false;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw UsageError("config: " + key + " wants a number, got '" + text + "'");
    return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (v < 0.0) throw UsageError("config: " + key + " must be non-negative");
    return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "on" || text == "true" || text == "1") return true;
    if (text == "off" || text == "false" || text == "0") return false;
    throw UsageError("config: " + key + " wants on/off, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> values;
    std::size_t at = 0;
    while (at <= text.size()) {
        std::size_t comma = text.find(',', at);
        if (comma == std::string::npos) comma = text.size();
        values.push_back(parse_double(key, text.substr(at, comma - at)));
        at = comma + 1;
    }
    if (values.empty()) throw UsageError("config: " + key + " wants a comma list");
    return values;
}

// Numbers and on/off become model params; anything else is a string option.
void assign_model_param(models::ModelSpec& spec, const std::string& param,
                        const std::string& text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec == std::errc{} && res.ptr == text.data() + text.size()) {
        spec.params[param] = v;
    } else if (text == "on" || text == "true") {
        spec.params[param] = 1.0;
    } else if (text == "off" || text == "false") {
        spec.params[param] = 0.0;
    } else {
        spec.options[param] = text;
    }
}

// "knn.k" -> param "k" of the chosen model; other models' keys are ignored.
bool try_model_key(ExperimentConfig& config, const std::string& key, const std::string& value) {
    const auto dotted = key.find('.');
    if (dotted == std::string::npos) return false;
    const std::string head = key.substr(0, dotted);
    if (!is_model_name(head)) return false;
    if (head == config.model.name)
        assign_model_param(config.model, key.substr(dotted + 1), value);
    return true;
}

void apply_key(ExperimentConfig& config, const std::string& key, const std::string& value) {
    if (key == "data") {
        if (value != "synth" && value != "csv")
            throw UsageError("config: data must be synth or csv");
        config.data = value;
    } else if (key == "csv.path") config.csv_path = value;
    else if (key == "csv.schema") config.schema_path = value;
    else if (key == "synth.rows") config.synth_rows = parse_count(key, value);
    else if (key == "synth.rate") config.synth_rate = parse_double(key, value);
    else if (key == "model") {
        if (!is_model_name(value)) throw UsageError("config: unknown model '" + value + "'");
        config.model.name = value;
    } else if (key == "recipe.impute") config.impute = parse_bool(key, value);
    else if (key == "recipe.encoder") {
        if (value == "ordinal") config.encoder = preprocess::EncoderKind::ordinal;
        else if (value == "one_hot") config.encoder = preprocess::EncoderKind::one_hot;
        else throw UsageError("config: recipe.encoder must be ordinal or one_hot");
    } else if (key == "recipe.drop_first") config.drop_first = parse_bool(key, value);
    else if (key == "recipe.scaler") {
        if (value != "auto" && value != "standard" && value != "min_max" && value != "none")
            throw UsageError("config: recipe.scaler must be auto|standard|min_max|none");
        config.scaler = value;
    } else if (key == "split.test_fraction") config.plan.test_fraction = parse_double(key, value);
    else if (key == "split.n_splits") config.plan.n_splits = parse_count(key, value);
    else if (key == "split.stratified") config.plan.stratified = parse_bool(key, value);
    else if (key == "cv.metric") {
        if (value == "accuracy") config.cv_balanced = false;
        else if (value == "balanced") config.cv_balanced = true;
        else throw UsageError("config: cv.metric must be accuracy or balanced");
    } else if (key == "seed") config.seed = parse_count(key, value);
    else if (key == "out") config.out_dir = value;
    else if (key == "svg") config.svg = parse_bool(key, value);
    else if (key == "threads") {
        if (value == "serial") config.serial = true;
        else if (value == "auto" || value == "parallel") config.serial = false;
        else throw UsageError("config: threads must be auto|parallel|serial");
    } else if (key == "curve.param") config.curve_param = value;
    else if (key == "curve.values") config.curve_values = parse_list(key, value);
    else if (key.rfind("grid.", 0) == 0) config.grid[key.substr(5)] = parse_list(key, value);
    else if (key == "importance.repeats") config.importance_repeats = parse_count(key, value);
    else if (key == "importance.cut") config.cluster_cut = parse_double(key, value);
    else if (!try_model_key(config, key, value))
        throw UsageError("config: unknown key '" + key + "'");
}

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out << bytes;
        if (!out) throw DataError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
}

fs::path out_path(const ExperimentConfig& config, const std::string& name) {
    const fs::path dir(config.out_dir);
    if (!dir.empty() && !fs::exists(dir)) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw DataError("cannot create output directory '" + dir.string() + "'");
    }
    return dir / name;
}

// "knn.k" must name a parameter of the configured model; returns the bare key.
std::string model_param_name(const ExperimentConfig& config, const std::string& dotted) {
    const auto dot = dotted.find('.');
    if (dot == std::string::npos || dotted.substr(0, dot) != config.model.name)
        throw UsageError("parameter '" + dotted + "' does not belong to model '" +
                         config.model.name + "'");
    return dotted.substr(dot + 1);
}

} // namespace

preprocess::Recipe ExperimentConfig::recipe() const {
    preprocess::Recipe recipe;
    recipe.impute = impute;
    recipe.encoder = encoder;
    recipe.drop_first = drop_first;
    std::string choice = scaler;
    if (choice == "auto") {
        switch (models::default_scaler_for(model.name)) {
            case models::ScalerChoice::standard: choice = "standard"; break;
            case models::ScalerChoice::min_max: choice = "min_max"; break;
            case models::ScalerChoice::none: choice = "none"; break;
        }
    }
    if (choice == "standard") recipe.scaler = preprocess::ScalerKind::standard;
    else if (choice == "min_max") recipe.scaler = preprocess::ScalerKind::min_max;
    else recipe.scaler = std::nullopt;
    return recipe;
}

std::string ExperimentConfig::echo() const {
    std::string out = "# nonresp " + std::string(kVersion) + "\n";
    out += "data=" + data + "\n";
    if (data == "csv") {
        out += "csv.path=" + csv_path + "\n";
        out += "csv.schema=" + schema_path + "\n";
    } else {
        out += "synth.rows=" + std::to_string(synth_rows) + "\n";
        out += "synth.rate=" + fmt_double(synth_rate) + "\n";
    }
    out += "model=" + model.name + "\n";
    for (const auto& [key, value] : model.params)
        out += model.name + "." + key + "=" + fmt_double(value) + "\n";
    for (const auto& [key, value] : model.options)
        out += model.name + "." + key + "=" + value + "\n";
    out += "recipe.impute=" + std::string(impute ? "on" : "off") + "\n";
    out += "recipe.encoder=" +
           std::string(encoder == preprocess::EncoderKind::ordinal ? "ordinal" : "one_hot") + "\n";
    out += "recipe.drop_first=" + std::string(drop_first ? "on" : "off") + "\n";
    out += "recipe.scaler=" + scaler + "\n";
    out += "split.test_fraction=" + fmt_double(plan.test_fraction) + "\n";
    out += "split.n_splits=" + std::to_string(plan.n_splits) + "\n";
    out += "split.stratified=" + std::string(plan.stratified ? "on" : "off") + "\n";
    out += "cv.metric=" + std::string(cv_balanced ? "balanced" : "accuracy") + "\n";
    out += "seed=" + std::to_string(seed) + "\n";
    out += "threads=" + std::string(serial ? "serial" : "auto") + "\n";
    out += "out=" + out_dir + "\n";
    return out;
}

KeyValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("config: cannot open '" + path + "'");
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
        line.erase(0, start);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config: line " + std::to_string(line_no) + " is not key=value");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

ExperimentConfig resolve_config(const KeyValues& file_values, const KeyValues& overrides) {
    ExperimentConfig config;
    if (const char* env_seed = std::getenv("NONRESP_SEED"))
        config.seed = parse_count("NONRESP_SEED", env_seed);

    // model must be known before model-prefixed keys can bind
    for (const auto* layer : {&file_values, &overrides}) {
        const auto it = layer->find("model");
        if (it != layer->end()) apply_key(config, "model", it->second);
    }
    for (const auto* layer : {&file_values, &overrides})
        for (const auto& [key, value] : *layer)
            if (key != "model") apply_key(config, key, value);

    config.model.seed = config.seed;
    config.plan.seed = config.seed;
    return config;
}

Table load_table(const ExperimentConfig& config) {
    if (config.data == "csv") {
        if (config.csv_path.empty() || config.schema_path.empty())
            throw UsageError("csv data source needs csv.path and csv.schema");
        const auto schema = tabular::read_schema(config.schema_path);
        return tabular::read_csv(config.csv_path, schema);
    }
    tabular::SyntheticConfig synth;
    synth.n_rows = config.synth_rows;
    synth.positive_rate = config.synth_rate;
    synth.effects = tabular::default_planted_effects();
    synth.seed = config.seed;
    return tabular::synth_generate(synth);
}

int cmd_synth(const ExperimentConfig& config) {
    const Table table = load_table(config);
    write_file_atomic(out_path(config, "schema.csv"), tabular::format_schema(table.schema()));
    write_file_atomic(out_path(config, "data.csv"), tabular::format_csv(table));
    std::cout << "wrote " << table.n_rows() << " rows to "
              << (fs::path(config.out_dir) / "data.csv").string() << "\n";
    return 0;
}

namespace {

struct SplitData {
    Table table;
    std::vector<int> labels;
    tabular::IndexSplit split;
};

SplitData load_and_split(const ExperimentConfig& config) {
    SplitData data{load_table(config), {}, {}};
    data.labels = data.table.labels();
    data.split = tabular::train_test_split(
        data.table.n_rows(), config.plan,
        config.plan.stratified ? std::span<const int>(data.labels) : std::span<const int>{});
    return data;
}

} // namespace

int cmd_train_eval(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    auto data = load_and_split(config);

    auto result = preprocess::pipeline_fit_predict(data.table, data.split.train, data.split.test,
                                                   config.recipe(),
                                                   models::make_classifier(config.model));

    std::vector<int> test_truth, train_truth;
    for (auto r : data.split.test) test_truth.push_back(data.labels[r]);
    for (auto r : data.split.train) train_truth.push_back(data.labels[r]);
    const auto train_pred = result.pipeline->predict(data.table.take_rows(data.split.train));

    const auto cm = eval::confusion(test_truth, result.test_predictions);
    const bool roc_defined = cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0;
    const auto report = roc_defined
                            ? eval::metrics(cm, test_truth, result.test_scores)
                            : eval::metrics(cm);
    const auto train_cm = eval::confusion(train_truth, train_pred);
    const double train_accuracy = eval::metrics(train_cm).accuracy;

    const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

    ordered_json json;
    json["model"] = config.model.name;
    json["seed"] = config.seed;
    json["tp"] = cm.tp;
    json["tn"] = cm.tn;
    json["fp"] = cm.fp;
    json["fn"] = cm.fn;
    json["accuracy"] = report.accuracy;
    if (report.balanced_accuracy) json["balanced_accuracy"] = *report.balanced_accuracy;
    json["misclassification"] = report.misclassification;
    if (report.precision) json["precision"] = *report.precision;
    if (report.recall) json["recall"] = *report.recall;
    if (report.specificity) json["specificity"] = *report.specificity;
    if (report.fpr) json["fpr"] = *report.fpr;
    if (report.auc) json["auc"] = *report.auc;
    json["train_accuracy"] = train_accuracy;
    json["wall_ms"] = wall_ms;

    write_file_atomic(out_path(config, "report.json"), json.dump(2) + "\n");
    write_file_atomic(out_path(config, "config_resolved.cfg"), config.echo());
    if (roc_defined) {
        const auto curve = eval::roc_curve(test_truth, result.test_scores);
        write_file_atomic(out_path(config, "roc.csv"), eval::roc_to_csv(curve));
        if (config.svg) {
            svg::Series series{"roc", {}, {}};
            for (const auto& p : curve.points) {
                series.x.push_back(p.fpr);
                series.y.push_back(p.tpr);
            }
            write_file_atomic(out_path(config, "roc.svg"),
                              svg::line_chart(config.model.name + " roc", "fpr", "tpr", {series}));
        }
    }
    std::cout << json.dump(2) << "\n";
    return 0;
}

int cmd_validation_curve(const ExperimentConfig& config) {
    if (config.curve_param.empty() || config.curve_values.empty())
        throw UsageError("validation-curve needs curve.param and curve.values");
    const std::string param = model_param_name(config, config.curve_param);
    const Table table = load_table(config);

    const auto factory = [&](double value) {
        models::ModelSpec spec = config.model;
        spec.params[param] = value;
        return models::make_classifier(spec);
    };
    const auto result = eval::validation_curve(factory, config.curve_values, table,
                                               config.recipe(), config.plan, config.cv_balanced);
    write_file_atomic(out_path(config, "validation_curve.csv"), eval::curve_to_csv(result));
    if (config.svg) {
        svg::Series train{"train", {}, {}}, val{"validation", {}, {}};
        for (const auto& p : result.points) {
            train.x.push_back(p.value);
            train.y.push_back(p.train_mean);
            val.x.push_back(p.value);
            val.y.push_back(p.val_mean);
        }
        write_file_atomic(out_path(config, "validation_curve.svg"),
                          svg::line_chart(config.model.name + " validation curve",
                                          config.curve_param, "accuracy", {train, val}));
    }
    std::cout << eval::curve_to_csv(result);
    return 0;
}

int cmd_grid_search(const ExperimentConfig& config) {
    if (config.grid.empty()) throw UsageError("grid-search needs at least one grid.<param> list");
    std::map<std::string, std::vector<double>> grid;
    for (const auto& [dotted, values] : config.grid)
        grid[model_param_name(config, dotted)] = values;
    const Table table = load_table(config);

    const auto factory = [&](const eval::ParamMap& params) {
        models::ModelSpec spec = config.model;
        for (const auto& [key, value] : params) spec.params[key] = value;
        return models::make_classifier(spec);
    };
    const auto result =
        eval::grid_search(factory, grid, table, config.recipe(), config.plan, config.cv_balanced);
    write_file_atomic(out_path(config, "grid_search.csv"), eval::grid_to_csv(result));

    ordered_json best;
    best["model"] = config.model.name;
    for (const auto& [key, value] : result.best) best[config.model.name + "." + key] = value;
    best[config.cv_balanced ? "val_balanced_accuracy" : "val_accuracy"] = result.best_score;
    std::cout << best.dump(2) << "\n";
    return 0;
}

int cmd_importance(const ExperimentConfig& config) {
    auto data = load_and_split(config);
    auto result = preprocess::pipeline_fit_predict(data.table, data.split.train, data.split.test,
                                                   config.recipe(),
                                                   models::make_classifier(config.model));
    const Table test_table = data.table.take_rows(data.split.test);
    std::vector<int> test_truth;
    for (auto r : data.split.test) test_truth.push_back(data.labels[r]);

    const auto importance = interpret::permutation_importance(
        *result.pipeline, test_table, test_truth, config.importance_repeats, config.seed);
    write_file_atomic(out_path(config, "importance.csv"),
                      interpret::importance_to_csv(importance));

    // Correlation structure of the ordinal-encoded feature matrix.
    const Table filled = config.impute
                             ? tabular::impute_most_frequent(data.table)
                             : data.table;
    const auto [encoder, encoded] =
        preprocess::encoder_fit_transform(filled, preprocess::EncoderKind::ordinal);
    const auto correlation = interpret::feature_correlation(encoded);
    const auto dendrogram = interpret::hier_cluster(correlation.rho);
    write_file_atomic(out_path(config, "dendrogram.json"),
                      interpret::dendrogram_to_json(dendrogram, encoder.feature_names));

    std::cout << interpret::importance_to_csv(importance);
    if (config.cluster_cut >= 0.0) {
        const auto picks =
            interpret::cut_clusters(dendrogram, config.cluster_cut, encoder.feature_names);
        ordered_json selected = picks;
        std::cout << selected.dump() << "\n";
    }
    return 0;
}

namespace {

const char kUsage[] =
    "usage: nonresp <synth|train-eval|validation-curve|grid-search|importance> [options]\n"
    "options:\n"
    "  --config FILE     flat key=value configuration file\n"
    "  --set KEY=VALUE   override one configuration key (repeatable)\n"
    "  --model NAME      shorthand for --set model=NAME\n"
    "  --seed N          shorthand for --set seed=N\n"
    "  --out DIR         shorthand for --set out=DIR\n"
    "  --svg             also render curves as svg\n"
    "  --serial          disable the parallel kernels\n"
    "  --help            this text\n"
    "NONRESP_SEED in the environment supplies the default seed.\n";

} // namespace

int run_cli(const std::vector<std::string>& args) {
    try {
        if (args.empty()) {
            std::cerr << kUsage;
            return 1;
        }
        const std::string command = args[0];
        if (command == "--help" || command == "-h" || command == "help") {
            std::cout << kUsage;
            return 0;
        }

        KeyValues file_values, overrides;
        for (std::size_t i = 1; i < args.size(); ++i) {
            const std::string& arg = args[i];
            auto next = [&]() -> const std::string& {
                if (i + 1 >= args.size()) throw UsageError(arg + " needs a value");
                return args[++i];
            };
            if (arg == "--config") {
                file_values = read_config_file(next());
            } else if (arg == "--set") {
                const std::string& kv = next();
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw UsageError("--set wants key=value");
                overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
            } else if (arg == "--model") {
                overrides["model"] = next();
            } else if (arg == "--seed") {
                overrides["seed"] = next();
            } else if (arg == "--out") {
                overrides["out"] = next();
            } else if (arg == "--svg") {
                overrides["svg"] = "on";
            } else if (arg == "--serial") {
                overrides["threads"] = "serial";
            } else if (arg == "--help" || arg == "-h") {
                std::cout << kUsage;
                return 0;
            } else {
                throw UsageError("unknown argument '" + arg + "'");
            }
        }

        const auto config = resolve_config(file_values, overrides);
        parallel::set_mode(config.serial ? parallel::Mode::serial : parallel::Mode::openmp);

        if (command == "synth") return cmd_synth(config);
        if (command == "train-eval") return cmd_train_eval(config);
        if (command == "validation-curve") return cmd_validation_curve(config);
        if (command == "grid-search") return cmd_grid_search(config);
        if (command == "importance") return cmd_importance(config);
        throw UsageError("unknown command '" + command + "'");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        // wrapped component errors from the cv drivers keep their exit class
        const std::string what = e.what();
        std::cerr << "error: " << what << "\n";
        return what.find("usage") != std::string::npos ? 1 : 2;
    }
}

} // namespace nonresp::cli
