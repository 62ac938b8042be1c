#include "pcf/lattice.hpp"
#include "pcf/errors.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace pcf {

ComplexLattice ComplexLattice::make(int n, std::vector<int> sizes, std::vector<double> periods) {
    if (n < 1 || n > 3)
        throw ConfigError("lattice: complex dimension n must be in [1,3], got " + std::to_string(n));
    if (n == 3)
        std::fprintf(stderr, "pcf: warning: n = 3 lattices are supported but slow at desk scale\n");
    if (static_cast<int>(sizes.size()) != 2 * n)
        throw ConfigError("lattice: expected " + std::to_string(2 * n) + " sizes");
    if (static_cast<int>(periods.size()) != 2 * n)
        throw ConfigError("lattice: expected " + std::to_string(2 * n) + " periods");
    ComplexLattice lat;
    lat.n = n;
    lat.sizes = std::move(sizes);
    lat.periods = std::move(periods);
    lat.points = 1;
    for (int a = 0; a < 2 * n; ++a) {
        if (lat.sizes[a] < 8 || lat.sizes[a] % 2 != 0)
            throw ConfigError("lattice: sizes must be even and >= 8, got " + std::to_string(lat.sizes[a]));
        if (!(lat.periods[a] > 0.0))
            throw ConfigError("lattice: periods must be positive");
        lat.points *= lat.sizes[a];
    }
    lat.strides.assign(2 * n, 1);
    for (int a = 2 * n - 2; a >= 0; --a)
        lat.strides[a] = lat.strides[a + 1] * lat.sizes[a + 1];
    return lat;
}

double ComplexLattice::min_spacing() const {
    double h = spacing(0);
    for (int a = 1; a < axes(); ++a) h = std::min(h, spacing(a));
    return h;
}

double ComplexLattice::wavenumber(int axis, int j) const {
    return 2.0 * M_PI * mode_index(axis, j) / periods[axis];
}

} // namespace pcf
