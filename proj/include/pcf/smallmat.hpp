#ifndef PCF_SMALLMAT_HPP
#define PCF_SMALLMAT_HPP

#include "pcf/lattice.hpp"

#include <cassert>
#include <cmath>

namespace pcf {

// Fixed-capacity complex matrices for per-point work (n <= 3 metric blocks,
// 2n x 2n Born-Infeld matrices).  All routines are deterministic: fixed pivot
// rule, fixed Jacobi sweep order.
struct CMat {
    int n = 0;
    cplx a[36];

    CMat() = default;
    explicit CMat(int dim) : n(dim) {
        assert(dim >= 1 && dim <= 6);
        for (int i = 0; i < n * n; ++i) a[i] = cplx{0.0, 0.0};
    }
    cplx& operator()(int i, int j) { return a[i * n + j]; }
    const cplx& operator()(int i, int j) const { return a[i * n + j]; }

    static CMat identity(int dim) {
        CMat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline CMat cmat_mul(const CMat& x, const CMat& y) {
    CMat r(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int k = 0; k < x.n; ++k) {
            const cplx v = x(i, k);
            if (v == cplx{0.0, 0.0}) continue;
            for (int j = 0; j < x.n; ++j) r(i, j) += v * y(k, j);
        }
    return r;
}

inline CMat cmat_adjoint(const CMat& x) {
    CMat r(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < x.n; ++j) r(i, j) = std::conj(x(j, i));
    return r;
}

// LU with partial pivoting
inline cplx cmat_det(CMat m) {
    cplx det{1.0, 0.0};
    for (int c = 0; c < m.n; ++c) {
        int piv = c;
        double best = std::abs(m(c, c));
        for (int r = c + 1; r < m.n; ++r)
            if (std::abs(m(r, c)) > best) {
                best = std::abs(m(r, c));
                piv = r;
            }
        if (best == 0.0) return {0.0, 0.0};
        if (piv != c) {
            for (int j = 0; j < m.n; ++j) std::swap(m(piv, j), m(c, j));
            det = -det;
        }
        det *= m(c, c);
        for (int r = c + 1; r < m.n; ++r) {
            const cplx f = m(r, c) / m(c, c);
            for (int j = c; j < m.n; ++j) m(r, j) -= f * m(c, j);
        }
    }
    return det;
}

// Gauss-Jordan with partial pivoting; returns false when singular
inline bool cmat_inverse(CMat m, CMat& out) {
    out = CMat::identity(m.n);
    for (int c = 0; c < m.n; ++c) {
        int piv = c;
        double best = std::abs(m(c, c));
        for (int r = c + 1; r < m.n; ++r)
            if (std::abs(m(r, c)) > best) {
                best = std::abs(m(r, c));
                piv = r;
            }
        if (best == 0.0) return false;
        if (piv != c)
            for (int j = 0; j < m.n; ++j) {
                std::swap(m(piv, j), m(c, j));
                std::swap(out(piv, j), out(c, j));
            }
        const cplx d = m(c, c);
        for (int j = 0; j < m.n; ++j) {
            m(c, j) /= d;
            out(c, j) /= d;
        }
        for (int r = 0; r < m.n; ++r) {
            if (r == c) continue;
            const cplx f = m(r, c);
            if (f == cplx{0.0, 0.0}) continue;
            for (int j = 0; j < m.n; ++j) {
                m(r, j) -= f * m(c, j);
                out(r, j) -= f * out(c, j);
            }
        }
    }
    return true;
}

// Eigenvalues of a Hermitian matrix, ascending.  Closed form for 1x1/2x2,
// cyclic complex Jacobi otherwise.
inline void hermitian_eigenvalues(const CMat& h, double* ev) {
    const int n = h.n;
    if (n == 1) {
        ev[0] = h(0, 0).real();
        return;
    }
    if (n == 2) {
        const double a = h(0, 0).real(), c = h(1, 1).real();
        const double half = 0.5 * (a + c);
        const double rad = std::sqrt(0.25 * (a - c) * (a - c) + std::norm(h(0, 1)));
        ev[0] = half - rad;
        ev[1] = half + rad;
        return;
    }
    CMat m = h;
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(m(p, q));
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const cplx gpq = m(p, q);
                const double ag = std::abs(gpq);
                if (ag < 1e-300) continue;
                const double alpha = m(p, p).real(), beta = m(q, q).real();
                const double tau = (alpha - beta) / (2.0 * ag);
                // smaller-magnitude root of t^2 - 2 tau t - 1 = 0
                const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                              : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double cth = 1.0 / std::sqrt(1.0 + t * t);
                const cplx phase = gpq / ag;
                const cplx s = -t * cth * phase; // rotation kills m(p,q)
                // A <- G^dagger A G with G[pp]=c, G[pq]=s, G[qp]=-conj(s), G[qq]=c
                for (int k = 0; k < n; ++k) {
                    const cplx akp = m(k, p), akq = m(k, q);
                    m(k, p) = cth * akp - std::conj(s) * akq;
                    m(k, q) = s * akp + cth * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx apk = m(p, k), aqk = m(q, k);
                    m(p, k) = cth * apk - s * aqk;
                    m(q, k) = std::conj(s) * apk + cth * aqk;
                }
            }
    }
    for (int i = 0; i < n; ++i) ev[i] = m(i, i).real();
    // insertion sort, ascending
    for (int i = 1; i < n; ++i) {
        const double v = ev[i];
        int j = i - 1;
        while (j >= 0 && ev[j] > v) {
            ev[j + 1] = ev[j];
            --j;
        }
        ev[j + 1] = v;
    }
}

inline double hermitian_min_eig(const CMat& h) {
    double ev[6];
    hermitian_eigenvalues(h, ev);
    return ev[0];
}

inline double hermitian_max_eig(const CMat& h) {
    double ev[6];
    hermitian_eigenvalues(h, ev);
    return ev[h.n - 1];
}

} // namespace pcf

#endif
