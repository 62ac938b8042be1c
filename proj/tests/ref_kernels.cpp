#include "ref_kernels.hpp"
#include "pcf/calculus.hpp"
#include "pcf/parallel.hpp"

#include <cmath>
#include <vector>

namespace pcf::ref {

namespace {

std::vector<MatrixField> holo_derivs(const MatrixField& m) {
    std::vector<MatrixField> dg;
    for (int i = 0; i < m.lat->n; ++i) {
        Field d = partial(m, i, Deriv::Holo);
        MatrixField md(*m.lat);
        md.data = std::move(d.data);
        dg.push_back(std::move(md));
    }
    return dg;
}

} // namespace

Field chern_connection(const MetricField& g) {
    const int n = g.n;
    std::vector<MatrixField> dg = holo_derivs(g.mat);
    Field gamma(*g.lat, n * n * n, "Gamma (ref)");
    for (std::ptrdiff_t p = 0; p < g.lat->points; ++p)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    cplx s{0.0, 0.0};
                    for (int l = 0; l < n; ++l) s += g.gi(l, k, p) * dg[i].m(j, l, p);
                    gamma.at((i * n + j) * n + k, p) = s;
                }
    return gamma;
}

TorsionField chern_torsion(const MetricField& g) {
    const int n = g.n;
    std::vector<MatrixField> dg = holo_derivs(g.mat);
    TorsionField T(*g.lat);
    for (size_t pr = 0; pr < T.pairs.size(); ++pr) {
        const int i = T.pairs[pr].first, j = T.pairs[pr].second;
        for (int k = 0; k < n; ++k) {
            cplx* out = T.comp[pr][k].comp(0);
            for (std::ptrdiff_t p = 0; p < g.lat->points; ++p)
                out[p] = dg[i].m(j, k, p) - dg[j].m(i, k, p);
        }
    }
    return T;
}

MatrixField torsion_Q(const MetricField& g, const TorsionField& T) {
    const int n = g.n;
    MatrixField Q(*g.lat, "Q (ref)");
    for (std::ptrdiff_t p = 0; p < g.lat->points; ++p)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx s{0.0, 0.0};
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        for (int m = 0; m < n; ++m)
                            for (int nn = 0; nn < n; ++nn)
                                s += g.gi(l, k, p) * g.gi(nn, m, p) * T.value(i, k, nn, p) *
                                     std::conj(T.value(j, l, m, p));
                Q.m(i, j, p) = s;
            }
    // same symmetrization the production kernel applies
    for (std::ptrdiff_t p = 0; p < g.lat->points; ++p)
        for (int i = 0; i < n; ++i) {
            Q.m(i, i, p) = cplx{Q.m(i, i, p).real(), 0.0};
            for (int j = i + 1; j < n; ++j) {
                const cplx v = 0.5 * (Q.m(i, j, p) + std::conj(Q.m(j, i, p)));
                Q.m(i, j, p) = v;
                Q.m(j, i, p) = std::conj(v);
            }
        }
    return Q;
}

ScalarField torsion_norm2(const MetricField& g, const TorsionField& T) {
    const int n = g.n;
    ScalarField out(*g.lat, 1, "|T|^2 (ref)");
    for (std::ptrdiff_t p = 0; p < g.lat->points; ++p) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int nn = 0; nn < n; ++nn)
                    for (int l = 0; l < n; ++l)
                        for (int m = 0; m < n; ++m)
                            for (int q = 0; q < n; ++q) {
                                const cplx v = T.value(i, j, nn, p) *
                                               std::conj(T.value(l, m, q, p)) * g.gi(l, i, p) *
                                               g.gi(m, j, p) * std::conj(g.gi(q, nn, p));
                                s += v.real();
                            }
        out.at(0, p) = s;
    }
    return out;
}

double serial_sum(const ScalarField& f) {
    // same fixed block order as the parallel reduction
    const std::ptrdiff_t P = f.points();
    double total = 0.0;
    for (std::ptrdiff_t lo = 0; lo < P; lo += kReduceBlock) {
        const std::ptrdiff_t hi = std::min(P, lo + kReduceBlock);
        double s = 0.0;
        for (std::ptrdiff_t i = lo; i < hi; ++i) s += f.at(0, i).real();
        total += s;
    }
    return total;
}

double serial_sup_abs(const Field& f) {
    double worst = 0.0;
    for (int c = 0; c < f.ncomp; ++c)
        for (std::ptrdiff_t p = 0; p < f.points(); ++p)
            worst = std::max(worst, std::abs(f.at(c, p)));
    return worst;
}

} // namespace pcf::ref
