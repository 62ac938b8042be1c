#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcf/rng.hpp"
#include "pcf/smallmat.hpp"

#include <cmath>

using namespace pcf;

namespace {

CMat random_hermitian(int n, SplitMix64& rng) {
    CMat m(n);
    for (int i = 0; i < n; ++i) {
        double a, b;
        rng.gauss(a, b);
        m(i, i) = a;
        for (int j = i + 1; j < n; ++j) {
            rng.gauss(a, b);
            m(i, j) = cplx{a, b};
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

} // namespace

TEST_CASE("det and inverse against hand cases") {
    CMat m(2);
    m(0, 0) = cplx{2.0, 0.0};
    m(0, 1) = cplx{0.0, 1.0};
    m(1, 0) = cplx{0.0, -1.0};
    m(1, 1) = cplx{3.0, 0.0};
    CHECK(std::abs(cmat_det(m) - cplx{5.0, 0.0}) < 1e-14);
    CMat inv(2);
    REQUIRE(cmat_inverse(m, inv));
    CMat prod = cmat_mul(m, inv);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(std::abs(prod(i, j) - (i == j ? cplx{1.0, 0.0} : cplx{0.0, 0.0})) < 1e-14);
}

TEST_CASE("hermitian eigenvalues: trace/det consistency and ordering") {
    SplitMix64 rng(42);
    for (int n : {1, 2, 3, 4, 6}) {
        for (int rep = 0; rep < 50; ++rep) {
            CMat h = random_hermitian(n, rng);
            double ev[6];
            hermitian_eigenvalues(h, ev);
            double tr = 0.0, prod = 1.0;
            for (int i = 0; i < n; ++i) {
                tr += ev[i];
                prod *= ev[i];
                if (i > 0) CHECK(ev[i] >= ev[i - 1]);
            }
            double trh = 0.0;
            for (int i = 0; i < n; ++i) trh += h(i, i).real();
            CHECK(std::abs(tr - trh) < 1e-10 * (1.0 + std::abs(trh)));
            const cplx dh = cmat_det(h);
            CHECK(std::abs(prod - dh.real()) < 1e-9 * (1.0 + std::abs(dh)));
            CHECK(std::abs(dh.imag()) < 1e-10 * (1.0 + std::abs(dh)));
        }
    }
}

TEST_CASE("eigenvalues of known 3x3") {
    // diag(1,2,5) conjugated by a unitary-ish rotation stays {1,2,5}
    CMat h(3);
    h(0, 0) = 1.0;
    h(1, 1) = 2.0;
    h(2, 2) = 5.0;
    h(0, 1) = cplx{0.3, 0.4};
    h(1, 0) = std::conj(h(0, 1));
    // eigenvalues of [[1, .3+.4i],[.3-.4i, 2]] block: 1.5 +- sqrt(.25+.25)
    double ev[3];
    hermitian_eigenvalues(h, ev);
    const double r = std::sqrt(0.5);
    CHECK(ev[0] == doctest::Approx(1.5 - r).epsilon(1e-10));
    CHECK(ev[1] == doctest::Approx(1.5 + r).epsilon(1e-10));
    CHECK(ev[2] == doctest::Approx(5.0).epsilon(1e-10));
}
