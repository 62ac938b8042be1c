#include "pcf/calculus.hpp"
#include "pcf/errors.hpp"
#include "pcf/fft.hpp"
#include "pcf/hermitian.hpp"
#include "pcf/parallel.hpp"

#include <cmath>
#include <cstring>

namespace pcf {
namespace {

void check_axis(const Field& f, int i) {
    if (i < 0 || i >= f.lat->n)
        throw UnsupportedError("complex axis out of range (field " + f.tag + ")");
}

// out = d/dx_axis f by 4th-order centered differences, one component
void fd_axis(const ComplexLattice& lat, const cplx* in, cplx* out, int axis) {
    const int N = lat.sizes[axis];
    const std::ptrdiff_t inner = lat.strides[axis];
    const std::ptrdiff_t nlines = lat.points / N;
    const double c = 1.0 / (12.0 * lat.spacing(axis));
    parallel_for(nlines, [&](std::ptrdiff_t l) {
        const std::ptrdiff_t outer = l / inner;
        const std::ptrdiff_t in0 = l % inner;
        const std::ptrdiff_t base = outer * (N * inner) + in0;
        for (int j = 0; j < N; ++j) {
            const int jm2 = (j - 2 + N) % N, jm1 = (j - 1 + N) % N;
            const int jp1 = (j + 1) % N, jp2 = (j + 2) % N;
            out[base + j * inner] =
                c * (-in[base + jp2 * inner] + 8.0 * in[base + jp1 * inner] -
                     8.0 * in[base + jm1 * inner] + in[base + jm2 * inner]);
        }
    });
}

} // namespace

Field partial(const Field& f, int i, Deriv kind) {
    check_axis(f, i);
    Field out(*f.lat, f.ncomp, f.tag);
    Field tmp(*f.lat, 1);
    const cplx ycoef = (kind == Deriv::Holo) ? cplx{0.0, -0.5} : cplx{0.0, 0.5};
    for (int c = 0; c < f.ncomp; ++c) {
        spectral_derivative_axis(*f.lat, f.comp(c), out.comp(c), 2 * i);
        spectral_derivative_axis(*f.lat, f.comp(c), tmp.comp(0), 2 * i + 1);
        cplx* o = out.comp(c);
        const cplx* t = tmp.comp(0);
        parallel_for(f.points(), [&](std::ptrdiff_t p) { o[p] = 0.5 * o[p] + ycoef * t[p]; });
    }
    return out;
}

Field fd_partial(const Field& f, int i, Deriv kind) {
    check_axis(f, i);
    Field out(*f.lat, f.ncomp, f.tag);
    Field tmp(*f.lat, 1);
    const cplx ycoef = (kind == Deriv::Holo) ? cplx{0.0, -0.5} : cplx{0.0, 0.5};
    for (int c = 0; c < f.ncomp; ++c) {
        fd_axis(*f.lat, f.comp(c), out.comp(c), 2 * i);
        fd_axis(*f.lat, f.comp(c), tmp.comp(0), 2 * i + 1);
        cplx* o = out.comp(c);
        const cplx* t = tmp.comp(0);
        parallel_for(f.points(), [&](std::ptrdiff_t p) { o[p] = 0.5 * o[p] + ycoef * t[p]; });
    }
    return out;
}

ScalarField invert_flat_laplacian(const ScalarField& f, cplx* removed_mean) {
    const ComplexLattice& lat = *f.lat;
    ScalarField u = f;
    fft_all_inplace(lat, u.comp(0), true);
    cplx* d = u.comp(0);
    const double pinv = 1.0 / static_cast<double>(lat.points);
    if (removed_mean) *removed_mean = d[0] * pinv; // mode (0,..,0) sits at flat index 0
    const int na = lat.axes();
    parallel_for(lat.points, [&](std::ptrdiff_t p) {
        int idx[6];
        lat.coords(p, idx);
        double k2 = 0.0;
        for (int a = 0; a < na; ++a) {
            // match the Nyquist-zeroed first-derivative symbol
            const double k = (idx[a] == lat.sizes[a] / 2) ? 0.0 : lat.wavenumber(a, idx[a]);
            k2 += k * k;
        }
        d[p] = (k2 == 0.0) ? cplx{0.0, 0.0} : d[p] / (-0.25 * k2);
    });
    fft_all_inplace(lat, u.comp(0), false);
    return u;
}

double reduce(const ScalarField& f, ReduceOp op, const MetricField* g) {
    const std::ptrdiff_t P = f.points();
    const cplx* d = f.comp(0);
    switch (op) {
    case ReduceOp::Sup:
        return block_max(P, [&](std::ptrdiff_t p) { return d[p].real(); });
    case ReduceOp::Inf:
        return block_min(P, [&](std::ptrdiff_t p) { return d[p].real(); });
    case ReduceOp::Mean:
        return block_sum(P, [&](std::ptrdiff_t p) { return d[p].real(); }) / static_cast<double>(P);
    case ReduceOp::L2: {
        if (g) {
            if (g->min_eigenvalue() <= 0.0)
                throw PositivityError("reduce: weighted norm requires positive metric");
            const ScalarField& w = g->det();
            const cplx* wd = w.comp(0);
            const double s =
                block_sum(P, [&](std::ptrdiff_t p) { return std::norm(d[p]) * wd[p].real(); });
            return std::sqrt(s / static_cast<double>(P));
        }
        const double s = block_sum(P, [&](std::ptrdiff_t p) { return std::norm(d[p]); });
        return std::sqrt(s / static_cast<double>(P));
    }
    }
    return 0.0;
}

cplx field_mean(const Field& f, int comp) {
    const std::ptrdiff_t P = f.points();
    const cplx* d = f.comp(comp);
    const double re = block_sum(P, [&](std::ptrdiff_t p) { return d[p].real(); });
    const double im = block_sum(P, [&](std::ptrdiff_t p) { return d[p].imag(); });
    return cplx{re, im} / static_cast<double>(P);
}

double sup_abs(const Field& f) {
    double worst = 0.0;
    for (int c = 0; c < f.ncomp; ++c) {
        const cplx* d = f.comp(c);
        worst = std::max(worst, block_max(f.points(), [&](std::ptrdiff_t p) { return std::abs(d[p]); }));
    }
    return worst;
}

void dealias(Field& f) {
    for (int c = 0; c < f.ncomp; ++c)
        for (int a = 0; a < f.lat->axes(); ++a)
            dealias_axis_inplace(*f.lat, f.comp(c), a);
}

} // namespace pcf
