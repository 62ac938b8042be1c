#ifndef PCF_FFT_HPP
#define PCF_FFT_HPP

#include "pcf/lattice.hpp"

namespace pcf {

// Single-axis complex DFTs built on serial FFTW line transforms.  Lines are
// distributed over OpenMP threads with per-thread gather buffers, so results
// do not depend on the thread count.  Forward is unnormalized; inverse
// carries the 1/N factor.

void fft_axis_inplace(const ComplexLattice& lat, cplx* data, int axis, bool forward);
void fft_all_inplace(const ComplexLattice& lat, cplx* data, bool forward);

// out = d/dx_axis in (spectral; Nyquist mode of the first derivative zeroed)
void spectral_derivative_axis(const ComplexLattice& lat, const cplx* in, cplx* out, int axis);

// zero modes with |j'| > N/3 along the given axis (2/3-rule truncation)
void dealias_axis_inplace(const ComplexLattice& lat, cplx* data, int axis);

} // namespace pcf

#endif
