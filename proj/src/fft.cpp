#include "pcf/fft.hpp"
#include "pcf/parallel.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace pcf {
namespace {

// Lines along an axis are gathered into contiguous batches of kBatch and
// transformed with cached many-plans.  The batch partition is fixed by line
// index, so results are bit-identical for any thread count.
constexpr int kBatch = 64;

std::mutex plan_mutex;

struct BatchPlans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

BatchPlans& plans_for(int N, int howmany) {
    static std::map<std::pair<int, int>, BatchPlans> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(N, howmany);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_complex* tmp = fftw_alloc_complex(static_cast<size_t>(N) * howmany);
    BatchPlans bp;
    const int n[1] = {N};
    bp.fwd = fftw_plan_many_dft(1, n, howmany, tmp, nullptr, 1, N, tmp, nullptr, 1, N,
                                FFTW_FORWARD, FFTW_ESTIMATE);
    bp.bwd = fftw_plan_many_dft(1, n, howmany, tmp, nullptr, 1, N, tmp, nullptr, 1, N,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(tmp);
    return cache.emplace(key, bp).first->second;
}

struct LineBuffer {
    fftw_complex* p = nullptr;
    size_t cap = 0;
    ~LineBuffer() {
        if (p) fftw_free(p);
    }
    fftw_complex* get(size_t count) {
        if (cap < count) {
            if (p) fftw_free(p);
            p = fftw_alloc_complex(count);
            cap = count;
        }
        return p;
    }
};

thread_local LineBuffer tls_buffer;

// Apply `spectrum(buf, nlines)` to every length-N line along `axis`;
// buf holds nlines contiguous spectra after the forward transform.
template <class F>
void transform_lines(const ComplexLattice& lat, cplx* data, int axis, bool renormalize,
                     F&& spectrum) {
    const int N = lat.sizes[axis];
    const std::ptrdiff_t inner = lat.strides[axis];
    const std::ptrdiff_t nlines = lat.points / N;
    const std::ptrdiff_t nblocks = (nlines + kBatch - 1) / kBatch;
    const double ninv = 1.0 / N;
    parallel_for(nblocks, [&](std::ptrdiff_t blk) {
        const std::ptrdiff_t lo = blk * kBatch;
        const std::ptrdiff_t hi = std::min(nlines, lo + kBatch);
        const int count = static_cast<int>(hi - lo);
        fftw_complex* buf = tls_buffer.get(static_cast<size_t>(count) * N);
        for (int l = 0; l < count; ++l) {
            const std::ptrdiff_t line = lo + l;
            const std::ptrdiff_t outer = line / inner;
            const std::ptrdiff_t in = line % inner;
            const std::ptrdiff_t base = outer * (N * inner) + in;
            fftw_complex* dst = buf + static_cast<std::ptrdiff_t>(l) * N;
            for (int j = 0; j < N; ++j) {
                const cplx v = data[base + j * inner];
                dst[j][0] = v.real();
                dst[j][1] = v.imag();
            }
        }
        BatchPlans& bp = plans_for(N, count);
        fftw_execute_dft(bp.fwd, buf, buf);
        spectrum(buf, count);
        fftw_execute_dft(bp.bwd, buf, buf);
        for (int l = 0; l < count; ++l) {
            const std::ptrdiff_t line = lo + l;
            const std::ptrdiff_t outer = line / inner;
            const std::ptrdiff_t in = line % inner;
            const std::ptrdiff_t base = outer * (N * inner) + in;
            const fftw_complex* src = buf + static_cast<std::ptrdiff_t>(l) * N;
            for (int j = 0; j < N; ++j)
                data[base + j * inner] =
                    renormalize ? cplx{src[j][0] * ninv, src[j][1] * ninv}
                                : cplx{src[j][0], src[j][1]};
        }
    });
}

} // namespace

void fft_axis_inplace(const ComplexLattice& lat, cplx* data, int axis, bool forward) {
    const int N = lat.sizes[axis];
    const std::ptrdiff_t inner = lat.strides[axis];
    const std::ptrdiff_t nlines = lat.points / N;
    const std::ptrdiff_t nblocks = (nlines + kBatch - 1) / kBatch;
    const double ninv = 1.0 / N;
    parallel_for(nblocks, [&](std::ptrdiff_t blk) {
        const std::ptrdiff_t lo = blk * kBatch;
        const std::ptrdiff_t hi = std::min(nlines, lo + kBatch);
        const int count = static_cast<int>(hi - lo);
        fftw_complex* buf = tls_buffer.get(static_cast<size_t>(count) * N);
        for (int l = 0; l < count; ++l) {
            const std::ptrdiff_t line = lo + l;
            const std::ptrdiff_t outer = line / inner;
            const std::ptrdiff_t in = line % inner;
            const std::ptrdiff_t base = outer * (N * inner) + in;
            fftw_complex* dst = buf + static_cast<std::ptrdiff_t>(l) * N;
            for (int j = 0; j < N; ++j) {
                const cplx v = data[base + j * inner];
                dst[j][0] = v.real();
                dst[j][1] = v.imag();
            }
        }
        BatchPlans& bp = plans_for(N, count);
        fftw_execute_dft(forward ? bp.fwd : bp.bwd, buf, buf);
        for (int l = 0; l < count; ++l) {
            const std::ptrdiff_t line = lo + l;
            const std::ptrdiff_t outer = line / inner;
            const std::ptrdiff_t in = line % inner;
            const std::ptrdiff_t base = outer * (N * inner) + in;
            const fftw_complex* src = buf + static_cast<std::ptrdiff_t>(l) * N;
            for (int j = 0; j < N; ++j)
                data[base + j * inner] = forward ? cplx{src[j][0], src[j][1]}
                                                 : cplx{src[j][0] * ninv, src[j][1] * ninv};
        }
    });
}

void fft_all_inplace(const ComplexLattice& lat, cplx* data, bool forward) {
    for (int a = 0; a < lat.axes(); ++a) fft_axis_inplace(lat, data, a, forward);
}

void spectral_derivative_axis(const ComplexLattice& lat, const cplx* in, cplx* out, int axis) {
    const int N = lat.sizes[axis];
    if (out != in) std::memcpy(out, in, sizeof(cplx) * static_cast<size_t>(lat.points));
    // i*k multiplier with the Nyquist mode zeroed
    std::vector<double> k(static_cast<size_t>(N));
    for (int j = 0; j < N; ++j) k[j] = (j == N / 2) ? 0.0 : lat.wavenumber(axis, j);
    transform_lines(lat, out, axis, true, [&](fftw_complex* buf, int count) {
        for (int l = 0; l < count; ++l) {
            fftw_complex* line = buf + static_cast<std::ptrdiff_t>(l) * N;
            for (int j = 0; j < N; ++j) {
                const double re = line[j][0];
                const double im = line[j][1];
                line[j][0] = -k[j] * im;
                line[j][1] = k[j] * re;
            }
        }
    });
}

void dealias_axis_inplace(const ComplexLattice& lat, cplx* data, int axis) {
    const int N = lat.sizes[axis];
    const int cut = N / 3;
    std::vector<char> kill(static_cast<size_t>(N));
    for (int j = 0; j < N; ++j) {
        const int jp = lat.mode_index(axis, j);
        kill[j] = (jp > cut || jp < -cut) ? 1 : 0;
    }
    transform_lines(lat, data, axis, true, [&](fftw_complex* buf, int count) {
        for (int l = 0; l < count; ++l) {
            fftw_complex* line = buf + static_cast<std::ptrdiff_t>(l) * N;
            for (int j = 0; j < N; ++j)
                if (kill[j]) line[j][0] = line[j][1] = 0.0;
        }
    });
}

} // namespace pcf
