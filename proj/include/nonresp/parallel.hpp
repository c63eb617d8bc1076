#pragma once

#include <cstddef>

namespace nonresp::parallel {

enum class Mode { serial, openmp };

/// Process-wide execution mode for the data-parallel kernels. Defaults to
/// openmp when compiled with OpenMP support, serial otherwise. Every kernel
/// produces bit-identical results in both modes; tests rely on that.
Mode mode();
void set_mode(Mode m);

int max_threads();

namespace detail {
void for_range_openmp(std::size_t n, void* ctx, void (*body)(void*, std::size_t));
}

/// Run body(i) for i in [0, n). Iterations must be independent and write only
/// to per-index slots so serial and openmp execution agree exactly.
template <typename F>
void for_range(std::size_t n, F&& body) {
    if (mode() == Mode::openmp && n > 1) {
        auto thunk = [](void* ctx, std::size_t i) { (*static_cast<F*>(ctx))(i); };
        detail::for_range_openmp(n, &body, thunk);
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
}

} // namespace nonresp::parallel
