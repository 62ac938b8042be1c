#ifndef PCF_HERMITIAN_HPP
#define PCF_HERMITIAN_HPP

#include "pcf/calculus.hpp"
#include "pcf/field.hpp"

#include <utility>

namespace pcf {

// Hermitian positive metric g_{i jbar} with cached inverse, determinant and
// pointwise minimal eigenvalue.  inv.m(q,p) holds g^{qbar p}, so contractions
// read g^{qbar p} X_p = sum_p inv.m(q,p) * X_p.
struct MetricField {
    MatrixField mat;
    MatrixField inv;
    ScalarField detg;
    ScalarField eigmin;
    double min_eig = 0.0;

    const ComplexLattice* lat = nullptr;
    int n = 0;

    cplx g(int i, int j, std::ptrdiff_t p) const { return mat.m(i, j, p); }
    cplx gi(int q, int p, std::ptrdiff_t pt) const { return inv.m(q, p, pt); }
    const ScalarField& det() const { return detg; }
    double min_eigenvalue() const { return min_eig; }
    double sup_max_inv_eigenvalue() const; // sup_x lambda_max(g^{-1})
};

// Symmetrizes, caches inverse/det/eigenvalues; with validate, throws
// PositivityError when min eigenvalue <= eps_pos.
MetricField make_metric(MatrixField m, bool validate = true, double eps_pos = 0.0);

MatrixField constant_metric_matrix(const ComplexLattice& lat, double scale = 1.0);
MetricField flat_metric(const ComplexLattice& lat, double scale = 1.0);

// positivity floor from the hermitian_core design decisions
double positivity_floor(const MetricField& background);

// Gamma_{ij}^k = g^{lbar k} g_{j lbar, i}; component layout (i*n + j)*n + k.
Field chern_connection(const MetricField& g);

// T_{i j kbar} = g_{j kbar, i} - g_{i kbar, j}
TorsionField chern_torsion(const MetricField& g);

// S_{i jbar} = g^{qbar p} Omega_{p qbar i jbar},
// Omega_{i jbar k}^l = -d_jbar ( g^{mbar l} g_{k mbar, i} )
MatrixField chern_curvature_S(const MetricField& g);

// Q_{i jbar} = g^{lbar k} g^{nbar m} T_{i k nbar} conj(T_{j l mbar})
MatrixField torsion_Q(const MetricField& g);
MatrixField torsion_Q(const MetricField& g, const TorsionField& T);

// rho(h)_{i jbar} = - d_i d_jbar log det h
MatrixField chern_ricci_form(const MetricField& h);

// |T|^2 = T_{i j nbar} conj(T_{l m qbar}) g^{lbar i} g^{mbar j} conj(g^{qbar n})
ScalarField torsion_norm2(const MetricField& g, const TorsionField& T);

// g^alpha_{i jbar} = ghat_{i jbar} + sqrt(-1) (alpha_{i,jbar} - alphabar_{jbar,i})
MetricField metric_from_oneform(const MetricField& ghat, const VectorField& alpha,
                                bool validate = false, double eps_pos = 0.0);

// Torsion potential (d alpha)_{ij} = alpha_{i,j} - alpha_{j,i}, the sign that
// makes beta = sqrt(-1) d alpha satisfy beta_{ij,kbar} = g_{ikbar,j} - g_{jkbar,i}
// and dbar(d alpha) = -T.  Antisymmetric n x n output.
MatrixField oneform_dalpha(const VectorField& alpha);

// |phi|^2 for an antisymmetric (2,0) coefficient field phi_{ij}:
// phi_{ij} conj(phi_{kl}) g^{kbar i} g^{lbar j}
ScalarField form20_norm2(const MetricField& g, const MatrixField& phi);

// Solve omega - omegahat = dbar alpha + d alphabar for alpha; mode-by-mode
// minimal-norm representative, zero mean.  Throws MeanMismatchError /
// NotPluriclosedError per the operation contract.
VectorField oneform_potential(const MetricField& omega, const MetricField& omegahat);

// sup norm of all components of ddbar omega (identically 0 for n = 1)
double pluriclosed_residual(const MetricField& g);

// f_k = sum_{j<=k} |nabla^j Upsilon(g,h)|^{2/(1+j)} for flat h; k <= 2
std::pair<ScalarField, double> upsilon_fk(const MetricField& g, const MetricField& h_flat, int k);

} // namespace pcf

#endif
