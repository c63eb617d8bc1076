// Timing harness for the data-parallel kernels: each runs in serial mode and
// in openmp mode on the same inputs. The outputs are asserted identical, so
// the speedup column is the whole story.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "nonresp/classify_core.hpp"
#include "nonresp/linear_margin.hpp"
#include "nonresp/mlp.hpp"
#include "nonresp/parallel.hpp"
#include "nonresp/rng.hpp"
#include "nonresp/trees.hpp"

using namespace nonresp;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    Rng rng(seed);
    for (auto& v : m.data()) v = rng.uniform(-2.0, 2.0);
    return m;
}

std::vector<int> random_labels(std::size_t n, std::uint64_t seed) {
    std::vector<int> y(n);
    Rng rng(seed);
    for (auto& v : y) v = rng.below(2) ? 1 : 0;
    y[0] = 0;
    y[1] = 1;
    return y;
}

double time_ms(const std::function<std::vector<double>()>& body, std::vector<double>& out,
               int repetitions) {
    double best = 1e300;
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        out = body();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, const std::function<std::vector<double>()>& body,
            int repetitions) {
    std::vector<double> serial_out, parallel_out;
    parallel::set_mode(parallel::Mode::serial);
    const double serial_ms = time_ms(body, serial_out, repetitions);
    parallel::set_mode(parallel::Mode::openmp);
    const double parallel_ms = time_ms(body, parallel_out, repetitions);
    const bool identical = serial_out == parallel_out;
    std::printf("%-22s %10.2f ms %10.2f ms %8.2fx   %s\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, identical ? "identical" : "MISMATCH");
    if (!identical) std::exit(1);
}

} // namespace

int main() {
    std::printf("threads available: %d\n", parallel::max_threads());
    std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    {
        const auto train = random_matrix(4000, 50, 1);
        const auto labels = random_labels(4000, 2);
        const auto queries = random_matrix(1000, 50, 3);
        classify_core::Knn knn(10);
        knn.fit(train, labels);
        report("knn score", [&] { return knn.score(queries); }, 3);
    }
    {
        const auto x = random_matrix(4000, 30, 4);
        const auto y = random_labels(4000, 5);
        report("forest fit+vote", [&] {
            trees::ForestConfig config;
            config.n_trees = 16;
            config.seed = 9;
            trees::Forest forest(config);
            forest.fit(x, y);
            return forest.score(x);
        }, 3);
    }
    {
        const auto x = random_matrix(900, 30, 6);
        const auto y = random_labels(900, 7);
        std::vector<double> signed_y(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) signed_y[i] = y[i] ? 1.0 : -1.0;
        linear_margin::SvcConfig config;
        config.kernel = linear_margin::KernelKind::rbf;
        config.gamma = 0.1;
        config.max_updates = 200; // dominated by the gram build
        report("svc gram+smo", [&] {
            return svc_fit(x, signed_y, config).a;
        }, 2);
    }
    {
        mlp::MlpConfig config;
        config.seed = 3;
        const auto params = mlp::mlp_init(50, config);
        const auto x = random_matrix(20000, 50, 8);
        mlp::Mlp model(config);
        const auto y = random_labels(20000, 9);
        mlp::MlpConfig quick = config;
        quick.epochs = 1;
        mlp::Mlp trained(quick);
        trained.fit(x, y);
        report("mlp inference", [&] { return trained.score(x); }, 3);
    }
    return 0;
}
