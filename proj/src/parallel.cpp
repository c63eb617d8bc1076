#include "nonresp/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nonresp::parallel {

namespace {
#ifdef _OPENMP
Mode g_mode = Mode::openmp;
#else
Mode g_mode = Mode::serial;
#endif
} // namespace

Mode mode() { return g_mode; }

void set_mode(Mode m) {
#ifndef _OPENMP
    (void)m;
    g_mode = Mode::serial;
#else
    g_mode = m;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace detail {

void for_range_openmp(std::size_t n, void* ctx, void (*body)(void*, std::size_t)) {
#ifdef _OPENMP
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) body(ctx, static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < n; ++i) body(ctx, i);
#endif
}

} // namespace detail

} // namespace nonresp::parallel
