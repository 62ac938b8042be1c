#ifndef PCF_LATTICE_HPP
#define PCF_LATTICE_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace pcf {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

// Discretization of a flat torus C^n / Lambda with rectangular lattice:
// 2n real axes, axis pair (2i, 2i+1) carries the complex coordinate
// z^i = x^{2i} + sqrt(-1) x^{2i+1}.  Equispaced periodic grid.
struct ComplexLattice {
    int n = 0;                     // complex dimension
    std::vector<int> sizes;        // per real axis, 2n entries, each even
    std::vector<double> periods;   // per real axis
    std::vector<std::ptrdiff_t> strides; // row major, axis 0 slowest
    std::ptrdiff_t points = 0;

    static ComplexLattice make(int n, std::vector<int> sizes, std::vector<double> periods);

    int axes() const { return 2 * n; }
    double spacing(int axis) const { return periods[axis] / sizes[axis]; }
    double min_spacing() const;

    // signed mode index for axis position j: j <= N/2 ? j : j - N
    int mode_index(int axis, int j) const {
        const int N = sizes[axis];
        return j <= N / 2 ? j : j - N;
    }
    // wavenumber 2*pi*j'/L; callers zero the Nyquist mode where required
    double wavenumber(int axis, int j) const;

    // decompose flat point index into per-axis indices
    void coords(std::ptrdiff_t p, int* out) const {
        for (int a = axes() - 1; a >= 0; --a) {
            out[a] = static_cast<int>(p % sizes[a]);
            p /= sizes[a];
        }
    }
    double axis_value(int axis, int j) const { return spacing(axis) * j; }

    bool same_shape(const ComplexLattice& o) const {
        return n == o.n && sizes == o.sizes && periods == o.periods;
    }
};

} // namespace pcf

#endif
