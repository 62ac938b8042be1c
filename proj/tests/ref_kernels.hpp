#ifndef PCF_REF_KERNELS_HPP
#define PCF_REF_KERNELS_HPP

#include "pcf/hermitian.hpp"

namespace pcf::ref {

// Serial reference implementations of the pointwise tensor kernels.  Same
// spectral derivatives, plain single-thread loops; used to pin down the
// OpenMP kernels bit-for-bit and as the baseline in the benchmark tool.

Field chern_connection(const MetricField& g);
TorsionField chern_torsion(const MetricField& g);
MatrixField torsion_Q(const MetricField& g, const TorsionField& T);
ScalarField torsion_norm2(const MetricField& g, const TorsionField& T);

double serial_sum(const ScalarField& f);       // real-part sum
double serial_sup_abs(const Field& f);

} // namespace pcf::ref

#endif
