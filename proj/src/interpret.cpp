#include "nonresp/interpret.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "nonresp/parallel.hpp"
#include "nonresp/rng.hpp"

namespace nonresp::interpret {

using tabular::ColumnKind;
using tabular::ColumnRole;

namespace {

double accuracy_of(std::span<const int> truth, std::span<const int> pred) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == pred[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Average ranks with midpoints for ties.
std::vector<double> rank_column(const Matrix& m, std::size_t col) {
    const std::size_t n = m.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return m(a, col) < m(b, col); });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && m(order[j + 1], col) == m(order[i], col)) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

} // namespace

ImportanceResult permutation_importance(const FittedPipeline& pipeline, const Table& test_table,
                                        std::span<const int> test_labels, std::size_t n_repeats,
                                        std::uint64_t seed) {
    if (n_repeats < 1) throw UsageError("importance: n_repeats must be >= 1");
    if (test_labels.size() != test_table.n_rows())
        throw UsageError("importance: one label per row required");

    const auto feature_cols = test_table.feature_cols();
    ImportanceResult result;
    result.base_accuracy = accuracy_of(test_labels, pipeline.predict(test_table));
    result.features.resize(feature_cols.size());

    parallel::for_range(feature_cols.size(), [&](std::size_t f) {
        const std::size_t col = feature_cols[f];
        const auto& spec = test_table.schema()[col];
        std::vector<double> drops(n_repeats);
        for (std::size_t rep = 0; rep < n_repeats; ++rep) {
            Rng rng(derive_seed(seed, f * 1000003 + rep));
            const auto perm = rng.permutation(test_table.n_rows());
            Table shuffled = test_table;
            if (spec.kind == ColumnKind::categorical) {
                const auto& src = test_table.codes(col);
                auto& dst = shuffled.codes(col);
                for (std::size_t i = 0; i < perm.size(); ++i) dst[i] = src[perm[i]];
            } else {
                const auto& src = test_table.values(col);
                auto& dst = shuffled.values(col);
                for (std::size_t i = 0; i < perm.size(); ++i) dst[i] = src[perm[i]];
            }
            drops[rep] =
                result.base_accuracy - accuracy_of(test_labels, pipeline.predict(shuffled));
        }
        double mean = 0.0;
        for (double d : drops) mean += d;
        mean /= static_cast<double>(n_repeats);
        double var = 0.0;
        for (double d : drops) var += (d - mean) * (d - mean);
        result.features[f] = {spec.name, mean, std::sqrt(var / static_cast<double>(n_repeats)),
                              0};
    });

    std::sort(result.features.begin(), result.features.end(),
              [](const FeatureImportance& a, const FeatureImportance& b) {
                  if (a.mean_drop != b.mean_drop) return a.mean_drop > b.mean_drop;
                  return a.feature < b.feature;
              });
    for (std::size_t i = 0; i < result.features.size(); ++i) result.features[i].rank = i + 1;
    return result;
}

std::string importance_to_csv(const ImportanceResult& result) {
    std::string out = "feature,mean_drop,std,rank\n";
    for (const auto& f : result.features)
        out += f.feature + "," + fmt(f.mean_drop) + "," + fmt(f.std_dev) + "," +
               std::to_string(f.rank) + "\n";
    return out;
}

CorrelationResult feature_correlation(const Matrix& features) {
    const std::size_t d = features.cols();
    if (d < 2) throw UsageError("correlation: need at least two features");
    const std::size_t n = features.rows();
    if (n < 2) throw UsageError("correlation: need at least two rows");

    CorrelationResult result;
    result.rho = Matrix(d, d);

    std::vector<std::vector<double>> centered(d);
    std::vector<double> norm(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        auto ranks = rank_column(features, c);
        double mean = 0.0;
        for (double r : ranks) mean += r;
        mean /= static_cast<double>(n);
        for (auto& r : ranks) r -= mean;
        double sq = 0.0;
        for (double r : ranks) sq += r * r;
        norm[c] = std::sqrt(sq);
        if (norm[c] == 0.0) result.zero_variance.push_back(c);
        centered[c] = std::move(ranks);
    }

    for (std::size_t a = 0; a < d; ++a) {
        result.rho(a, a) = 1.0;
        for (std::size_t b = a + 1; b < d; ++b) {
            double rho = 0.0;
            if (norm[a] > 0.0 && norm[b] > 0.0) {
                double cross = 0.0;
                for (std::size_t i = 0; i < n; ++i) cross += centered[a][i] * centered[b][i];
                rho = cross / (norm[a] * norm[b]);
            }
            result.rho(a, b) = rho;
            result.rho(b, a) = rho;
        }
    }
    return result;
}

DendrogramNode hier_cluster(const Matrix& correlation) {
    const std::size_t d = correlation.rows();
    if (d == 0 || correlation.cols() != d) throw UsageError("cluster: square matrix required");

    struct Cluster {
        std::unique_ptr<DendrogramNode> node;
        std::size_t size = 0;
        bool alive = false;
    };
    std::vector<Cluster> clusters(d);
    for (std::size_t i = 0; i < d; ++i) {
        auto leaf = std::make_unique<DendrogramNode>();
        leaf->feature = static_cast<int>(i);
        clusters[i] = {std::move(leaf), 1, true};
    }

    // Working average-linkage distances, updated by Lance-Williams.
    Matrix dist(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            dist(a, b) = a == b ? 0.0 : 1.0 - std::fabs(correlation(a, b));

    for (std::size_t merges = 1; merges < d; ++merges) {
        std::size_t best_a = d, best_b = d;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < d; ++a) {
            if (!clusters[a].alive) continue;
            for (std::size_t b = a + 1; b < d; ++b) {
                if (!clusters[b].alive) continue;
                if (dist(a, b) < best) { // ties keep the smallest (a, b) pair
                    best = dist(a, b);
                    best_a = a;
                    best_b = b;
                }
            }
        }
        auto merged = std::make_unique<DendrogramNode>();
        merged->height = best;
        merged->left = std::move(clusters[best_a].node);
        merged->right = std::move(clusters[best_b].node);

        const double wa = static_cast<double>(clusters[best_a].size);
        const double wb = static_cast<double>(clusters[best_b].size);
        for (std::size_t k = 0; k < d; ++k) {
            if (!clusters[k].alive || k == best_a || k == best_b) continue;
            const double updated = (wa * dist(best_a, k) + wb * dist(best_b, k)) / (wa + wb);
            dist(best_a, k) = updated;
            dist(k, best_a) = updated;
        }
        clusters[best_a].node = std::move(merged);
        clusters[best_a].size += clusters[best_b].size;
        clusters[best_b].alive = false;
    }
    for (auto& c : clusters)
        if (c.alive) return std::move(*c.node);
    throw NumericError("cluster: merge bookkeeping failed");
}

namespace {

void node_json(const DendrogramNode& node, std::span<const std::string> names,
               std::string& out) {
    if (node.is_leaf()) {
        out += "{\"feature\":\"" + names[static_cast<std::size_t>(node.feature)] + "\"}";
        return;
    }
    out += "{\"height\":" + fmt(node.height) + ",\"left\":";
    node_json(*node.left, names, out);
    out += ",\"right\":";
    node_json(*node.right, names, out);
    out += "}";
}

void collect_leaves(const DendrogramNode& node, std::vector<int>& leaves) {
    if (node.is_leaf()) {
        leaves.push_back(node.feature);
        return;
    }
    collect_leaves(*node.left, leaves);
    collect_leaves(*node.right, leaves);
}

void collect_clusters(const DendrogramNode& node, double height,
                      std::vector<std::vector<int>>& clusters) {
    if (!node.is_leaf() && node.height > height) {
        collect_clusters(*node.left, height, clusters);
        collect_clusters(*node.right, height, clusters);
        return;
    }
    std::vector<int> leaves;
    collect_leaves(node, leaves);
    clusters.push_back(std::move(leaves));
}

} // namespace

std::string dendrogram_to_json(const DendrogramNode& root, std::span<const std::string> names) {
    std::string out;
    node_json(root, names, out);
    out += "\n";
    return out;
}

std::vector<std::string> cut_clusters(const DendrogramNode& root, double height,
                                      std::span<const std::string> names) {
    std::vector<std::vector<int>> clusters;
    collect_clusters(root, height, clusters);
    std::vector<std::string> picks;
    for (const auto& cluster : clusters) {
        std::string first = names[static_cast<std::size_t>(cluster[0])];
        for (int leaf : cluster)
            first = std::min(first, names[static_cast<std::size_t>(leaf)]);
        picks.push_back(std::move(first));
    }
    std::sort(picks.begin(), picks.end());
    return picks;
}

} // namespace nonresp::interpret
