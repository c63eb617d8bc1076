#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nonresp/matrix.hpp"
#include "nonresp/preprocess.hpp"

namespace nonresp::interpret {

using preprocess::FittedPipeline;
using tabular::Table;

struct FeatureImportance {
    std::string feature;
    double mean_drop = 0.0;
    double std_dev = 0.0;
    std::size_t rank = 0; // 1 = largest mean accuracy drop, ties by name
};

struct ImportanceResult {
    double base_accuracy = 0.0;
    std::vector<FeatureImportance> features; // ranked order
};

/// Permute one raw feature column of the test table at a time (before the
/// pipeline's transform, so encoders always see valid levels), recompute
/// accuracy, and report mean drop and std over the seeded repeats. Feature
/// loops run in parallel from pre-derived seeds.
ImportanceResult permutation_importance(const FittedPipeline& pipeline, const Table& test_table,
                                        std::span<const int> test_labels, std::size_t n_repeats,
                                        std::uint64_t seed);

std::string importance_to_csv(const ImportanceResult& result);

struct CorrelationResult {
    Matrix rho;                            // Spearman, symmetric, unit diagonal
    std::vector<std::size_t> zero_variance; // columns whose correlations were forced to 0
};

CorrelationResult feature_correlation(const Matrix& features);

struct DendrogramNode {
    int feature = -1; // leaf index when >= 0
    double height = 0.0;
    std::unique_ptr<DendrogramNode> left;
    std::unique_ptr<DendrogramNode> right;

    bool is_leaf() const { return feature >= 0; }
};

/// Agglomerative average-linkage clustering on d = 1 - |rho|; ties merge the
/// smallest index pair. Average linkage keeps merge heights non-decreasing.
DendrogramNode hier_cluster(const Matrix& correlation);

std::string dendrogram_to_json(const DendrogramNode& root, std::span<const std::string> names);

/// Cut at the given height and keep the lexicographically first feature of
/// each cluster; returned sorted.
std::vector<std::string> cut_clusters(const DendrogramNode& root, double height,
                                      std::span<const std::string> names);

} // namespace nonresp::interpret
