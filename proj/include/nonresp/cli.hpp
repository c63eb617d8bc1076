#pragma once

#include <map>
#include <string>
#include <vector>

#include "nonresp/models.hpp"
#include "nonresp/preprocess.hpp"
#include "nonresp/tabular.hpp"

namespace nonresp::cli {

inline constexpr const char* kVersion = "0.1.0";

using KeyValues = std::map<std::string, std::string>;

/// Flat key=value file; '#' starts a comment, blank lines ignored.
KeyValues read_config_file(const std::string& path);

struct ExperimentConfig {
    // data source
    std::string data = "synth"; // synth | csv
    std::string csv_path;
    std::string schema_path;
    std::size_t synth_rows = 5820;
    double synth_rate = 0.083;

    // recipe
    bool impute = true;
    preprocess::EncoderKind encoder = preprocess::EncoderKind::ordinal;
    bool drop_first = true;
    std::string scaler = "auto"; // auto | standard | min_max | none

    models::ModelSpec model;

    tabular::SplitPlan plan; // test_fraction 0.25, n_splits 5, stratified off
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    bool svg = false;
    bool serial = false;
    bool cv_balanced = false;

    // command-specific
    std::string curve_param;
    std::vector<double> curve_values;
    std::map<std::string, std::vector<double>> grid;
    std::size_t importance_repeats = 10;
    double cluster_cut = -1.0; // < 0 disables the dendrogram cut printout

    preprocess::Recipe recipe() const;
    std::string echo() const; // resolved flat key=value text
};

/// Layered resolution: built-in defaults, then NONRESP_SEED, then the config
/// file, then --set overrides (last wins).
ExperimentConfig resolve_config(const KeyValues& file_values, const KeyValues& overrides);

tabular::Table load_table(const ExperimentConfig& config);

int cmd_synth(const ExperimentConfig& config);
int cmd_train_eval(const ExperimentConfig& config);
int cmd_validation_curve(const ExperimentConfig& config);
int cmd_grid_search(const ExperimentConfig& config);
int cmd_importance(const ExperimentConfig& config);

/// Full dispatch; args exclude argv[0]. Exit codes: 0 ok, 1 usage, 2 data/io,
/// 3 numeric failure.
int run_cli(const std::vector<std::string>& args);

} // namespace nonresp::cli
