#ifndef PCF_FIELD_HPP
#define PCF_FIELD_HPP

#include "pcf/lattice.hpp"

#include <cassert>
#include <string>
#include <vector>

namespace pcf {

// Complex field with ncomp components per grid point.  Storage is
// component-major: component c occupies data[c*points .. (c+1)*points).
// The tag records the index signature (e.g. "g_{i jbar}") and is used only
// in assertion messages.
struct Field {
    const ComplexLattice* lat = nullptr;
    int ncomp = 0;
    std::string tag;
    std::vector<cplx> data;

    Field() = default;
    Field(const ComplexLattice& l, int nc, std::string t = {})
        : lat(&l), ncomp(nc), tag(std::move(t)),
          data(static_cast<size_t>(l.points) * nc, cplx{0.0, 0.0}) {}

    std::ptrdiff_t points() const { return lat->points; }
    cplx* comp(int c) { return data.data() + static_cast<std::ptrdiff_t>(c) * points(); }
    const cplx* comp(int c) const { return data.data() + static_cast<std::ptrdiff_t>(c) * points(); }
    cplx& at(int c, std::ptrdiff_t p) { return data[static_cast<size_t>(c) * points() + p]; }
    const cplx& at(int c, std::ptrdiff_t p) const { return data[static_cast<size_t>(c) * points() + p]; }

    void fill(cplx v) { data.assign(data.size(), v); }
};

using ScalarField = Field; // ncomp = 1

// per-point complex n-vector, component i at comp(i)
struct VectorField : Field {
    VectorField() = default;
    VectorField(const ComplexLattice& l, std::string t = {}) : Field(l, l.n, std::move(t)) {}
};

// per-point n x n complex matrix, entry (i,j) at comp(i*n + j); the column
// index carries the antiholomorphic slot for (1,1)-tensors like g_{i jbar}
struct MatrixField : Field {
    MatrixField() = default;
    MatrixField(const ComplexLattice& l, std::string t = {}) : Field(l, l.n * l.n, std::move(t)) {}
    cplx& m(int i, int j, std::ptrdiff_t p) { return at(i * lat->n + j, p); }
    const cplx& m(int i, int j, std::ptrdiff_t p) const { return at(i * lat->n + j, p); }
};

// T_{i j kbar}, antisymmetric in (i,j); only i < j is stored.
struct TorsionField {
    const ComplexLattice* lat = nullptr;
    int n = 0;
    std::vector<std::vector<Field>> comp; // comp[pair][k] scalar fields
    std::vector<std::pair<int, int>> pairs;

    TorsionField() = default;
    explicit TorsionField(const ComplexLattice& l) : lat(&l), n(l.n) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        comp.resize(pairs.size());
        for (auto& row : comp)
            for (int k = 0; k < n; ++k) row.emplace_back(l, 1, "T_{i j kbar}");
    }
    int pair_index(int i, int j) const {
        // caller guarantees i < j
        int idx = 0;
        for (auto [a, b] : pairs) {
            if (a == i && b == j) return idx;
            ++idx;
        }
        assert(false && "bad torsion pair");
        return -1;
    }
    cplx value(int i, int j, int k, std::ptrdiff_t p) const {
        if (i == j) return {0.0, 0.0};
        if (i < j) return comp[pair_index(i, j)][k].data[static_cast<size_t>(p)];
        return -comp[pair_index(j, i)][k].data[static_cast<size_t>(p)];
    }
};

// field arithmetic helpers (elementwise)
void axpy(Field& y, cplx a, const Field& x);          // y += a*x
Field scaled(const Field& x, cplx a);
Field conj_field(const Field& x);

// max over points of component-wise |M - M^dagger| for an n x n field
double hermitian_defect(const MatrixField& m);
// replace M by (M + M^dagger)/2
void hermitize(MatrixField& m);

} // namespace pcf

#endif
