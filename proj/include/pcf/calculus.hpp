#ifndef PCF_CALCULUS_HPP
#define PCF_CALCULUS_HPP

#include "pcf/field.hpp"

namespace pcf {

enum class Deriv { Holo, Antiholo };
enum class ReduceOp { Sup, Inf, Mean, L2 };

struct MetricField; // hermitian.hpp

// Spectral derivative along complex axis i:
//   Holo:      d_i    = (d_x - sqrt(-1) d_y)/2
//   Antiholo:  d_ibar = (d_x + sqrt(-1) d_y)/2
// on real axis pair (2i, 2i+1).  Exact (to rounding) on band-limited data;
// Nyquist modes of the first derivative are zeroed.
Field partial(const Field& f, int i, Deriv kind);

// 4th-order centered finite differences on the periodic grid; test oracle for
// partial(), never used on the flow path.
Field fd_partial(const Field& f, int i, Deriv kind);

// Solve sum_i d_i d_ibar u = f - mean(f) with mean(u) = 0 (spectral division
// by -|k|^2/4, zero mode dropped).  The subtracted mean is reported through
// removed_mean when non-null.
ScalarField invert_flat_laplacian(const ScalarField& f, cplx* removed_mean = nullptr);

// Deterministic reductions (fixed block order, thread-count independent).
// Sup/Inf/Mean act on real parts; L2 is sqrt(mean |f|^2), with volume weight
// det g when a metric is supplied (g must be Hermitian positive).
double reduce(const ScalarField& f, ReduceOp op, const MetricField* g = nullptr);

cplx field_mean(const Field& f, int comp);
// max over points and components of |f_c(p)|
double sup_abs(const Field& f);

// 2/3-rule truncation on every axis
void dealias(Field& f);

} // namespace pcf

#endif
