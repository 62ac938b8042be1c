#ifndef PCF_PARALLEL_HPP
#define PCF_PARALLEL_HPP

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pcf {

// Grid-point loops are parallelized with OpenMP.  Every kernel writes only to
// its own point, so results are bit-identical for any thread count.  Sum
// reductions go through the fixed-block scheme below for the same reason.

template <class F>
inline void parallel_for(std::ptrdiff_t count, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
}

// Deterministic sum: per-block partials (block size independent of thread
// count) folded serially in block order.
inline constexpr std::ptrdiff_t kReduceBlock = 4096;

template <class F>
inline double block_sum(std::ptrdiff_t count, F&& term) {
    const std::ptrdiff_t nblocks = (count + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(static_cast<size_t>(nblocks), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
        const std::ptrdiff_t lo = b * kReduceBlock;
        const std::ptrdiff_t hi = std::min(count, lo + kReduceBlock);
        double s = 0.0;
        for (std::ptrdiff_t i = lo; i < hi; ++i) s += term(i);
        partial[static_cast<size_t>(b)] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

template <class F>
inline double block_max(std::ptrdiff_t count, F&& term) {
    const std::ptrdiff_t nblocks = (count + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(static_cast<size_t>(nblocks));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
        const std::ptrdiff_t lo = b * kReduceBlock;
        const std::ptrdiff_t hi = std::min(count, lo + kReduceBlock);
        double m = term(lo);
        for (std::ptrdiff_t i = lo + 1; i < hi; ++i) m = std::max(m, term(i));
        partial[static_cast<size_t>(b)] = m;
    }
    double total = partial[0];
    for (double p : partial) total = std::max(total, p);
    return total;
}

template <class F>
inline double block_min(std::ptrdiff_t count, F&& term) {
    return -block_max(count, [&](std::ptrdiff_t i) { return -term(i); });
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int nt) {
#ifdef _OPENMP
    omp_set_num_threads(nt);
#else
    (void)nt;
#endif
}

} // namespace pcf

#endif
