#ifndef PCF_TEST_UTIL_HPP
#define PCF_TEST_UTIL_HPP

#include "pcf/calculus.hpp"
#include "pcf/fft.hpp"
#include "pcf/field.hpp"
#include "pcf/hermitian.hpp"
#include "pcf/rng.hpp"

#include <cmath>
#include <vector>

namespace pcf::test {

inline ComplexLattice lattice1(int N = 16, double L = 2.0 * M_PI) {
    return ComplexLattice::make(1, {N, N}, {L, L});
}

inline ComplexLattice lattice2(int N = 16, double L = 2.0 * M_PI) {
    return ComplexLattice::make(2, {N, N, N, N}, {L, L, L, L});
}

// band-limited random field: Gaussian coefficients on modes with euclidean
// |j| <= max_mode (zero mode excluded), conjugate-symmetrized when real_field
inline Field random_band_limited(const ComplexLattice& lat, int ncomp, uint64_t seed,
                                 int max_mode, bool real_field) {
    Field hat(lat, ncomp);
    const int na = lat.axes();
    std::vector<int> idx(na, -max_mode);
    for (int c = 0; c < ncomp; ++c) {
        SplitMix64 rng(seed + 0x1000003ULL * static_cast<uint64_t>(c + 1));
        std::fill(idx.begin(), idx.end(), -max_mode);
        while (true) {
            long r2 = 0;
            for (int a = 0; a < na; ++a) r2 += static_cast<long>(idx[a]) * idx[a];
            bool zero = true;
            for (int a = 0; a < na; ++a)
                if (idx[a] != 0) zero = false;
            if (r2 <= static_cast<long>(max_mode) * max_mode && !zero) {
                std::ptrdiff_t p = 0;
                for (int a = 0; a < na; ++a)
                    p = p * lat.sizes[a] + ((idx[a] + lat.sizes[a]) % lat.sizes[a]);
                double re, im;
                rng.gauss(re, im);
                hat.at(c, p) = cplx{re, im};
            }
            int a = na - 1;
            while (a >= 0 && idx[a] == max_mode) idx[a--] = -max_mode;
            if (a < 0) break;
            ++idx[a];
        }
    }
    if (real_field) {
        // hat(k) <- (hat(k) + conj(hat(-k)))/2
        Field sym = hat;
        std::vector<int> co(na);
        for (int c = 0; c < ncomp; ++c)
            for (std::ptrdiff_t p = 0; p < lat.points; ++p) {
                lat.coords(p, co.data());
                std::ptrdiff_t np = 0;
                for (int a = 0; a < na; ++a)
                    np = np * lat.sizes[a] + ((lat.sizes[a] - co[a]) % lat.sizes[a]);
                hat.at(c, p) = 0.5 * (sym.at(c, p) + std::conj(sym.at(c, np)));
            }
    }
    for (int c = 0; c < ncomp; ++c) {
        fft_all_inplace(lat, hat.comp(c), false);
        cplx* d = hat.comp(c);
        const double pts = static_cast<double>(lat.points);
        for (std::ptrdiff_t p = 0; p < lat.points; ++p) d[p] *= pts;
    }
    return hat;
}

inline ScalarField random_real_scalar(const ComplexLattice& lat, uint64_t seed, int max_mode,
                                      double amplitude) {
    Field f = random_band_limited(lat, 1, seed, max_mode, true);
    const double s = sup_abs(f);
    if (s > 0.0) f = scaled(f, amplitude / s);
    f.tag = "scalar";
    return f;
}

// random positive Hermitian metric: flat + band-limited Hermitian perturbation
inline MetricField random_metric(const ComplexLattice& lat, uint64_t seed, int max_mode,
                                 double amplitude) {
    const int n = lat.n;
    Field pert = random_band_limited(lat, n * n, seed, max_mode, false);
    const double s = sup_abs(pert);
    if (s > 0.0) pert = scaled(pert, amplitude / s);
    MatrixField m = constant_metric_matrix(lat, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx* out = m.comp(i * n + j);
            const cplx* a = pert.comp(i * n + j);
            const cplx* b = pert.comp(j * n + i);
            for (std::ptrdiff_t p = 0; p < lat.points; ++p)
                out[p] += 0.5 * (a[p] + std::conj(b[p]));
        }
    return make_metric(std::move(m));
}

} // namespace pcf::test

#endif
