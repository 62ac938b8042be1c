#include "pcf/field.hpp"
#include "pcf/parallel.hpp"

#include <cmath>

namespace pcf {

void axpy(Field& y, cplx a, const Field& x) {
    assert(y.data.size() == x.data.size());
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(y.data.size());
    cplx* yd = y.data.data();
    const cplx* xd = x.data.data();
    parallel_for(count, [&](std::ptrdiff_t i) { yd[i] += a * xd[i]; });
}

Field scaled(const Field& x, cplx a) {
    Field out = x;
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(out.data.size());
    cplx* d = out.data.data();
    parallel_for(count, [&](std::ptrdiff_t i) { d[i] *= a; });
    return out;
}

Field conj_field(const Field& x) {
    Field out = x;
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(out.data.size());
    cplx* d = out.data.data();
    parallel_for(count, [&](std::ptrdiff_t i) { d[i] = std::conj(d[i]); });
    return out;
}

double hermitian_defect(const MatrixField& m) {
    const int n = m.lat->n;
    const std::ptrdiff_t P = m.points();
    return block_max(P, [&](std::ptrdiff_t p) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, std::abs(m.m(i, j, p) - std::conj(m.m(j, i, p))));
        return worst;
    });
}

void hermitize(MatrixField& m) {
    const int n = m.lat->n;
    const std::ptrdiff_t P = m.points();
    parallel_for(P, [&](std::ptrdiff_t p) {
        for (int i = 0; i < n; ++i) {
            m.m(i, i, p) = cplx{m.m(i, i, p).real(), 0.0};
            for (int j = i + 1; j < n; ++j) {
                const cplx v = 0.5 * (m.m(i, j, p) + std::conj(m.m(j, i, p)));
                m.m(i, j, p) = v;
                m.m(j, i, p) = std::conj(v);
            }
        }
    });
}

} // namespace pcf
