#include "pcf/hermitian.hpp"
#include "pcf/errors.hpp"
#include "pcf/fft.hpp"
#include "pcf/parallel.hpp"
#include "pcf/smallmat.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

namespace pcf {

double MetricField::sup_max_inv_eigenvalue() const {
    // lambda_max(g^{-1}) = 1 / lambda_min(g) pointwise
    return 1.0 / min_eig;
}

MetricField make_metric(MatrixField m, bool validate, double eps_pos) {
    MetricField out;
    out.lat = m.lat;
    out.n = m.lat->n;
    hermitize(m);
    out.mat = std::move(m);
    out.inv = MatrixField(*out.lat, "g^{qbar p}");
    out.detg = ScalarField(*out.lat, 1, "det g");
    out.eigmin = ScalarField(*out.lat, 1, "lambda_min(g)");
    const int n = out.n;
    const std::ptrdiff_t P = out.lat->points;
    std::vector<double> blockmin((P + kReduceBlock - 1) / kReduceBlock, 0.0);
    parallel_for(P, [&](std::ptrdiff_t p) {
        CMat g(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = out.mat.m(i, j, p);
        out.detg.at(0, p) = cmat_det(g);
        CMat gi(n);
        if (!cmat_inverse(g, gi)) {
            out.eigmin.at(0, p) = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out.inv.m(i, j, p) = cplx{0.0, 0.0};
            return;
        }
        for (int q = 0; q < n; ++q)
            for (int pp = 0; pp < n; ++pp) out.inv.m(q, pp, p) = gi(q, pp);
        out.eigmin.at(0, p) = hermitian_min_eig(g);
    });
    out.min_eig = block_min(P, [&](std::ptrdiff_t p) { return out.eigmin.at(0, p).real(); });
    if (validate && out.min_eig <= eps_pos)
        throw PositivityError("metric not positive: min eigenvalue " + std::to_string(out.min_eig) +
                              " <= floor " + std::to_string(eps_pos));
    return out;
}

MatrixField constant_metric_matrix(const ComplexLattice& lat, double scale) {
    MatrixField m(lat, "g_{i jbar}");
    for (int i = 0; i < lat.n; ++i) {
        cplx* d = m.comp(i * lat.n + i);
        parallel_for(lat.points, [&](std::ptrdiff_t p) { d[p] = scale; });
    }
    return m;
}

MetricField flat_metric(const ComplexLattice& lat, double scale) {
    return make_metric(constant_metric_matrix(lat, scale));
}

double positivity_floor(const MetricField& background) {
    // 1e-6 times the mean eigenvalue of the background = mean(tr g)/n
    const int n = background.n;
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += field_mean(background.mat, i * n + i).real();
    return 1e-6 * tr / n;
}

namespace {

// all n holomorphic derivatives of an n x n matrix field
std::vector<MatrixField> holo_derivs(const MatrixField& m) {
    std::vector<MatrixField> dg;
    for (int i = 0; i < m.lat->n; ++i) {
        Field d = partial(m, i, Deriv::Holo);
        MatrixField md(*m.lat, m.tag + ",_i");
        md.data = std::move(d.data);
        dg.push_back(std::move(md));
    }
    return dg;
}

} // namespace

Field chern_connection(const MetricField& g) {
    const int n = g.n;
    const std::ptrdiff_t P = g.lat->points;
    std::vector<MatrixField> dg = holo_derivs(g.mat);
    Field gamma(*g.lat, n * n * n, "Gamma_{ij}^k");
    parallel_for(P, [&](std::ptrdiff_t p) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    cplx s{0.0, 0.0};
                    for (int l = 0; l < n; ++l) s += g.gi(l, k, p) * dg[i].m(j, l, p);
                    gamma.at((i * n + j) * n + k, p) = s;
                }
    });
    return gamma;
}

TorsionField chern_torsion(const MetricField& g) {
    const int n = g.n;
    const std::ptrdiff_t P = g.lat->points;
    std::vector<MatrixField> dg = holo_derivs(g.mat);
    TorsionField T(*g.lat);
    for (size_t pr = 0; pr < T.pairs.size(); ++pr) {
        const int i = T.pairs[pr].first, j = T.pairs[pr].second;
        for (int k = 0; k < n; ++k) {
            cplx* out = T.comp[pr][k].comp(0);
            parallel_for(P, [&](std::ptrdiff_t p) {
                out[p] = dg[i].m(j, k, p) - dg[j].m(i, k, p);
            });
        }
    }
    return T;
}

MatrixField chern_curvature_S(const MetricField& g) {
    const int n = g.n;
    const std::ptrdiff_t P = g.lat->points;
    std::vector<MatrixField> dg = holo_derivs(g.mat);
    // F[(p*n+i)*n+l] = g^{mbar l} g_{i mbar, p}
    Field F(*g.lat, n * n * n, "g^{mbar l} g_{i mbar,p}");
    parallel_for(P, [&](std::ptrdiff_t pt) {
        for (int p = 0; p < n; ++p)
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l) {
                    cplx s{0.0, 0.0};
                    for (int m = 0; m < n; ++m) s += g.gi(m, l, pt) * dg[p].m(i, m, pt);
                    F.at((p * n + i) * n + l, pt) = s;
                }
    });
    std::vector<Field> dF; // dF[q] = d_qbar F
    for (int q = 0; q < n; ++q) dF.push_back(partial(F, q, Deriv::Antiholo));
    MatrixField S(*g.lat, "S_{i jbar}");
    parallel_for(P, [&](std::ptrdiff_t pt) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx s{0.0, 0.0};
                for (int p = 0; p < n; ++p)
                    for (int q = 0; q < n; ++q)
                        for (int l = 0; l < n; ++l)
                            s += g.gi(q, p, pt) * (-dF[q].at((p * n + i) * n + l, pt)) *
                                 g.g(l, j, pt);
                S.m(i, j, pt) = s;
            }
    });
    hermitize(S);
    return S;
}

ScalarField torsion_norm2(const MetricField& g, const TorsionField& T) {
    const int n = g.n;
    const std::ptrdiff_t P = g.lat->points;
    ScalarField out(*g.lat, 1, "|T|^2");
    parallel_for(P, [&](std::ptrdiff_t p) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int nn = 0; nn < n; ++nn)
                    for (int l = 0; l < n; ++l)
                        for (int m = 0; m < n; ++m)
                            for (int q = 0; q < n; ++q) {
                                const cplx v = T.value(i, j, nn, p) *
                                               std::conj(T.value(l, m, q, p)) * g.gi(l, i, p) *
                                               g.gi(m, j, p) * std::conj(g.gi(q, nn, p));
                                s += v.real();
                            }
        out.at(0, p) = s;
    });
    return out;
}

MatrixField torsion_Q(const MetricField& g, const TorsionField& T) {
    const int n = g.n;
    const std::ptrdiff_t P = g.lat->points;
    MatrixField Q(*g.lat, "Q_{i jbar}");
    parallel_for(P, [&](std::ptrdiff_t p) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx s{0.0, 0.0};
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        for (int m = 0; m < n; ++m)
                            for (int nn = 0; nn < n; ++nn)
                                s += g.gi(l, k, p) * g.gi(nn, m, p) * T.value(i, k, nn, p) *
                                     std::conj(T.value(j, l, m, p));
                Q.m(i, j, p) = s;
            }
    });
    hermitize(Q);
    return Q;
}

MatrixField torsion_Q(const MetricField& g) { return torsion_Q(g, chern_torsion(g)); }

MatrixField chern_ricci_form(const MetricField& h) {
    const ComplexLattice& lat = *h.lat;
    const int n = lat.n;
    ScalarField logdet(lat, 1, "log det h");
    parallel_for(lat.points, [&](std::ptrdiff_t p) {
        logdet.at(0, p) = std::log(h.detg.at(0, p).real());
    });
    MatrixField rho(lat, "rho(h)_{i jbar}");
    for (int i = 0; i < n; ++i) {
        Field di = partial(logdet, i, Deriv::Holo);
        for (int j = 0; j < n; ++j) {
            Field dij = partial(di, j, Deriv::Antiholo);
            cplx* out = rho.comp(i * n + j);
            const cplx* in = dij.comp(0);
            parallel_for(lat.points, [&](std::ptrdiff_t p) { out[p] = -in[p]; });
        }
    }
    hermitize(rho);
    return rho;
}

MetricField metric_from_oneform(const MetricField& ghat, const VectorField& alpha,
                                bool validate, double eps_pos) {
    const ComplexLattice& lat = *ghat.lat;
    const int n = lat.n;
    // DA[k].comp(i) = alpha_{i, kbar}
    std::vector<Field> DA;
    for (int k = 0; k < n; ++k) DA.push_back(partial(alpha, k, Deriv::Antiholo));
    MatrixField m = ghat.mat;
    parallel_for(lat.points, [&](std::ptrdiff_t p) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m.m(i, j, p) += I * (DA[j].at(i, p) - std::conj(DA[i].at(j, p)));
    });
    return make_metric(std::move(m), validate, eps_pos);
}

MatrixField oneform_dalpha(const VectorField& alpha) {
    const ComplexLattice& lat = *alpha.lat;
    const int n = lat.n;
    std::vector<Field> dA; // dA[j].at(i) = alpha_{i,j} = d_j alpha_i
    for (int j = 0; j < n; ++j) dA.push_back(partial(alpha, j, Deriv::Holo));
    MatrixField out(lat, "(d alpha)_{ij}");
    parallel_for(lat.points, [&](std::ptrdiff_t p) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.m(i, j, p) = dA[j].at(i, p) - dA[i].at(j, p);
    });
    return out;
}

ScalarField form20_norm2(const MetricField& g, const MatrixField& phi) {
    const int n = g.n;
    ScalarField out(*g.lat, 1, "|phi|^2");
    parallel_for(g.lat->points, [&](std::ptrdiff_t p) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        const cplx v = phi.m(i, j, p) * std::conj(phi.m(k, l, p)) *
                                       g.gi(k, i, p) * g.gi(l, j, p);
                        s += v.real();
                    }
        out.at(0, p) = s;
    });
    return out;
}

double pluriclosed_residual(const MetricField& g) {
    const ComplexLattice& lat = *g.lat;
    const int n = lat.n;
    if (n == 1) return 0.0;
    // Hess[d][c] = d_d d_cbar g
    std::vector<std::vector<Field>> hess(n);
    for (int d = 0; d < n; ++d) {
        Field dd = partial(g.mat, d, Deriv::Holo);
        for (int c = 0; c < n; ++c) hess[d].push_back(partial(dd, c, Deriv::Antiholo));
    }
    double worst = 0.0;
    for (int d = 0; d < n; ++d)
        for (int a = d + 1; a < n; ++a)
            for (int c = 0; c < n; ++c)
                for (int b = c + 1; b < n; ++b) {
                    const int ab = a * n + b, db = d * n + b, ac = a * n + c, dc = d * n + c;
                    const double w = block_max(lat.points, [&](std::ptrdiff_t p) {
                        const cplx r = hess[d][c].at(ab, p) - hess[a][c].at(db, p) -
                                       hess[d][b].at(ac, p) + hess[a][b].at(dc, p);
                        return std::abs(r);
                    });
                    worst = std::max(worst, w);
                }
    return worst;
}

// ---------------------------------------------------------------------------
// oneform_potential: mode-by-mode minimal-norm solve of
//   D_{ij}(k) = i [ q_j(k) a_i - p_i(k) b_j ],  b_j = conj(alphahat_j(-k))
// ---------------------------------------------------------------------------
namespace {

void hermitian_eigen_vec(const CMat& h, double* ev, CMat& V);

// pseudo-inverse solve of the normal equations A x = rhs, A Hermitian PSD
void pinv_solve(const CMat& A, const cplx* rhs, cplx* x, double rel_tol) {
    const int m = A.n;
    double ev[6];
    CMat V(m);
    hermitian_eigen_vec(A, ev, V);
    double emax = 0.0;
    for (int i = 0; i < m; ++i) emax = std::max(emax, std::abs(ev[i]));
    const double cut = emax * rel_tol;
    for (int i = 0; i < m; ++i) x[i] = cplx{0.0, 0.0};
    for (int e = 0; e < m; ++e) {
        if (std::abs(ev[e]) <= cut || ev[e] == 0.0) continue;
        cplx proj{0.0, 0.0};
        for (int i = 0; i < m; ++i) proj += std::conj(V(i, e)) * rhs[i];
        proj /= ev[e];
        for (int i = 0; i < m; ++i) x[i] += proj * V(i, e);
    }
}

// Jacobi with eigenvector accumulation (same rotations as smallmat)
void hermitian_eigen_vec(const CMat& h, double* ev, CMat& V) {
    const int n = h.n;
    CMat m = h;
    V = CMat::identity(n);
    for (int sweep = 0; sweep < 80; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(m(p, q));
        if (off < 1e-32) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const cplx gpq = m(p, q);
                const double ag = std::abs(gpq);
                if (ag < 1e-300) continue;
                const double alpha = m(p, p).real(), beta = m(q, q).real();
                const double tau = (alpha - beta) / (2.0 * ag);
                const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                              : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const cplx s = -t * c * (gpq / ag);
                for (int k = 0; k < n; ++k) {
                    const cplx akp = m(k, p), akq = m(k, q);
                    m(k, p) = c * akp - std::conj(s) * akq;
                    m(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx apk = m(p, k), aqk = m(q, k);
                    m(p, k) = c * apk - s * aqk;
                    m(q, k) = std::conj(s) * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - std::conj(s) * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
    }
    for (int i = 0; i < n; ++i) ev[i] = m(i, i).real();
}

} // namespace

VectorField oneform_potential(const MetricField& omega, const MetricField& omegahat) {
    const ComplexLattice& lat = *omega.lat;
    const int n = lat.n;
    const std::ptrdiff_t P = lat.points;

    // difference and its scale
    MatrixField diff(lat, "omega - omegahat");
    parallel_for(P, [&](std::ptrdiff_t p) {
        for (int c = 0; c < n * n; ++c) diff.at(c, p) = omega.mat.at(c, p) - omegahat.mat.at(c, p);
    });
    double scale = std::max(sup_abs(omegahat.mat), sup_abs(diff));
    if (scale == 0.0) scale = 1.0;

    for (int c = 0; c < n * n; ++c) {
        const cplx mu = field_mean(diff, c);
        if (std::abs(mu) > 1e-10 * scale)
            throw MeanMismatchError("oneform_potential: componentwise means differ by " +
                                    std::to_string(std::abs(mu)) +
                                    "; difference is not in the image of dbar + d");
    }
    {
        MetricField d = make_metric(diff, false);
        const double res = pluriclosed_residual(d);
        if (res > 1e-8 * scale)
            throw NotPluriclosedError("oneform_potential: ddbar residual " + std::to_string(res));
    }

    // forward transform of every difference component
    MatrixField dhat = diff;
    for (int c = 0; c < n * n; ++c) fft_all_inplace(lat, dhat.comp(c), true);
    const double pinv_scale = 1.0 / static_cast<double>(P);

    VectorField ahat(lat, "alphahat");

    // enumerate +/- mode pairs; serial loop (mode count = grid points, work tiny)
    std::vector<int> idx(static_cast<size_t>(2 * n));
    std::vector<int> nidx(static_cast<size_t>(2 * n));
    for (std::ptrdiff_t p = 0; p < P; ++p) {
        lat.coords(p, idx.data());
        std::ptrdiff_t np = 0;
        bool self = true;
        for (int a = 0; a < 2 * n; ++a) {
            nidx[a] = (lat.sizes[a] - idx[a]) % lat.sizes[a];
            if (nidx[a] != idx[a]) self = false;
            np = np * lat.sizes[a] + nidx[a];
        }
        if (self) continue;   // Nyquist/zero self-paired modes carry no derivative content
        if (np < p) continue; // handle each pair once
        // multipliers (Nyquist-zeroed, matching partial())
        cplx pk[3], qk[3], pnk[3], qnk[3];
        for (int i = 0; i < n; ++i) {
            auto wav = [&](int axis, int j) {
                return (j == lat.sizes[axis] / 2) ? 0.0 : lat.wavenumber(axis, j);
            };
            const double kx = wav(2 * i, idx[2 * i]), ky = wav(2 * i + 1, idx[2 * i + 1]);
            pk[i] = cplx{ky / 2.0, kx / 2.0};   // (i kx + ky)/2
            qk[i] = cplx{-ky / 2.0, kx / 2.0};  // (i kx - ky)/2
            const double nkx = wav(2 * i, nidx[2 * i]), nky = wav(2 * i + 1, nidx[2 * i + 1]);
            pnk[i] = cplx{nky / 2.0, nkx / 2.0};
            qnk[i] = cplx{-nky / 2.0, nkx / 2.0};
        }
        // unknowns x = (a_0..a_{n-1}, b_0..b_{n-1}); M[(i,j), :]
        const int rows = n * n, cols = 2 * n;
        cplx M[9][6];
        cplx rhs_rows[9];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const int r = i * n + j;
                for (int c = 0; c < cols; ++c) M[r][c] = cplx{0.0, 0.0};
                M[r][i] = I * qk[j];
                M[r][n + j] = -I * pk[i];
                rhs_rows[r] = dhat.at(i * n + j, p) * pinv_scale;
            }
        CMat A(cols);
        cplx Ab[6];
        for (int c = 0; c < cols; ++c) {
            Ab[c] = cplx{0.0, 0.0};
            for (int r = 0; r < rows; ++r) Ab[c] += std::conj(M[r][c]) * rhs_rows[r];
            for (int c2 = 0; c2 < cols; ++c2) {
                cplx s{0.0, 0.0};
                for (int r = 0; r < rows; ++r) s += std::conj(M[r][c]) * M[r][c2];
                A(c, c2) = s;
            }
        }
        cplx x[6];
        pinv_solve(A, Ab, x, 1e-11);
        for (int i = 0; i < n; ++i) {
            ahat.at(i, p) = x[i];
            ahat.at(i, np) = std::conj(x[n + i]); // b_j = conj(alphahat_j(-k))
        }
    }

    VectorField alpha = ahat;
    for (int c = 0; c < n; ++c) {
        // synthesis: unnormalized backward transform (coefficients already /P)
        fft_all_inplace(lat, alpha.comp(c), false);
        cplx* d = alpha.comp(c);
        const double pts = static_cast<double>(P);
        parallel_for(P, [&](std::ptrdiff_t pp) { d[pp] *= pts; });
    }
    alpha.tag = "alpha_i";

    // reconstruction check closes the contract
    MetricField rec = metric_from_oneform(omegahat, alpha, false);
    double err = 0.0;
    for (int c = 0; c < n * n; ++c) {
        const cplx* a = rec.mat.comp(c);
        const cplx* b = omega.mat.comp(c);
        err = std::max(err, block_max(P, [&](std::ptrdiff_t pp) { return std::abs(a[pp] - b[pp]); }));
    }
    if (err > 1e-8 * scale)
        throw NotPluriclosedError("oneform_potential: reconstruction residual " + std::to_string(err));
    return alpha;
}

// ---------------------------------------------------------------------------
// f_k derivative-norm functionals
// ---------------------------------------------------------------------------
namespace {

enum class Ix { LH, LA, UH }; // lower holo, lower anti, upper holo

struct Tensor {
    Field f;
    std::vector<Ix> kinds;
};

// Chern covariant derivative; prepends the new index
Tensor cov_deriv(const Tensor& T, const Field& gamma, Deriv kind, const ComplexLattice& lat) {
    const int n = lat.n;
    const int nidx = static_cast<int>(T.kinds.size());
    std::ptrdiff_t ncomp_in = 1;
    for (int i = 0; i < nidx; ++i) ncomp_in *= n;
    Tensor out;
    out.kinds.reserve(nidx + 1);
    out.kinds.push_back(kind == Deriv::Holo ? Ix::LH : Ix::LA);
    for (auto k : T.kinds) out.kinds.push_back(k);
    out.f = Field(lat, static_cast<int>(n * ncomp_in), "cov_deriv");

    // plain derivative blocks
    for (int p = 0; p < n; ++p) {
        Field dp = partial(T.f, p, kind);
        std::memcpy(out.f.comp(static_cast<int>(p * ncomp_in)), dp.data.data(),
                    sizeof(cplx) * dp.data.size());
    }
    // connection corrections
    const std::ptrdiff_t P = lat.points;
    std::vector<std::ptrdiff_t> stride(static_cast<size_t>(nidx), 1);
    for (int i = nidx - 2; i >= 0; --i) stride[i] = stride[i + 1] * n;
    parallel_for(P, [&](std::ptrdiff_t pt) {
        int mi[8] = {0};
        for (std::ptrdiff_t c = 0; c < ncomp_in; ++c) {
            std::ptrdiff_t rem = c;
            for (int i = 0; i < nidx; ++i) {
                mi[i] = static_cast<int>(rem / stride[i]);
                rem %= stride[i];
            }
            for (int p = 0; p < n; ++p) {
                cplx corr{0.0, 0.0};
                for (int slot = 0; slot < nidx; ++slot) {
                    const Ix kind_s = T.kinds[slot];
                    if (kind == Deriv::Holo) {
                        if (kind_s == Ix::LA) continue;
                        for (int r = 0; r < n; ++r) {
                            const std::ptrdiff_t cr = c + (r - mi[slot]) * stride[slot];
                            const cplx tv = T.f.at(static_cast<int>(cr), pt);
                            if (kind_s == Ix::LH)
                                corr -= gamma.at((p * n + mi[slot]) * n + r, pt) * tv;
                            else // UH
                                corr += gamma.at((p * n + r) * n + mi[slot], pt) * tv;
                        }
                    } else {
                        if (kind_s != Ix::LA) continue;
                        for (int r = 0; r < n; ++r) {
                            const std::ptrdiff_t cr = c + (r - mi[slot]) * stride[slot];
                            corr -= std::conj(gamma.at((p * n + mi[slot]) * n + r, pt)) *
                                    T.f.at(static_cast<int>(cr), pt);
                        }
                    }
                }
                out.f.at(static_cast<int>(p * ncomp_in + c), pt) += corr;
            }
        }
    });
    return out;
}

// pointwise squared norm with metric contractions per index kind
ScalarField tensor_norm2(const Tensor& T, const MetricField& g) {
    const ComplexLattice& lat = *g.lat;
    const int n = lat.n;
    const int nidx = static_cast<int>(T.kinds.size());
    std::ptrdiff_t ncomp = 1;
    for (int i = 0; i < nidx; ++i) ncomp *= n;
    std::vector<std::ptrdiff_t> stride(static_cast<size_t>(nidx), 1);
    for (int i = nidx - 2; i >= 0; --i) stride[i] = stride[i + 1] * n;
    ScalarField out(lat, 1, "|T|^2");
    parallel_for(lat.points, [&](std::ptrdiff_t pt) {
        double acc = 0.0;
        int a[8], b[8];
        for (std::ptrdiff_t ca = 0; ca < ncomp; ++ca) {
            std::ptrdiff_t rem = ca;
            for (int i = 0; i < nidx; ++i) {
                a[i] = static_cast<int>(rem / stride[i]);
                rem %= stride[i];
            }
            const cplx ta = T.f.at(static_cast<int>(ca), pt);
            if (ta == cplx{0.0, 0.0}) continue;
            for (std::ptrdiff_t cb = 0; cb < ncomp; ++cb) {
                rem = cb;
                for (int i = 0; i < nidx; ++i) {
                    b[i] = static_cast<int>(rem / stride[i]);
                    rem %= stride[i];
                }
                cplx w = ta * std::conj(T.f.at(static_cast<int>(cb), pt));
                for (int i = 0; i < nidx; ++i) {
                    switch (T.kinds[i]) {
                    case Ix::LH: w *= g.gi(b[i], a[i], pt); break;
                    case Ix::LA: w *= g.gi(a[i], b[i], pt); break;
                    case Ix::UH: w *= g.g(a[i], b[i], pt); break;
                    }
                }
                acc += w.real();
            }
        }
        out.at(0, pt) = acc;
    });
    return out;
}

bool is_constant_metric(const MetricField& h) {
    const int n = h.n;
    double dev = 0.0;
    for (int c = 0; c < n * n; ++c) {
        const cplx mu = field_mean(h.mat, c);
        const cplx* d = h.mat.comp(c);
        dev = std::max(dev, block_max(h.lat->points,
                                      [&](std::ptrdiff_t p) { return std::abs(d[p] - mu); }));
    }
    return dev < 1e-12 * (1.0 + sup_abs(h.mat));
}

} // namespace

std::pair<ScalarField, double> upsilon_fk(const MetricField& g, const MetricField& h_flat, int k) {
    if (k < 0 || k > 2) throw UnsupportedError("upsilon_fk: k must be 0, 1 or 2");
    if (!is_constant_metric(h_flat))
        throw UnsupportedError("upsilon_fk: non-flat reference metric deferred");
    const ComplexLattice& lat = *g.lat;
    // flat h has vanishing connection, so Upsilon(g,h) = Gamma(g)
    Field gamma = chern_connection(g);
    Tensor ups{gamma, {Ix::LH, Ix::LH, Ix::UH}};

    ScalarField fk = tensor_norm2(ups, g); // f_0 = |Upsilon|^2
    if (k >= 1) {
        Tensor d1h = cov_deriv(ups, gamma, Deriv::Holo, lat);
        Tensor d1a = cov_deriv(ups, gamma, Deriv::Antiholo, lat);
        ScalarField n2h = tensor_norm2(d1h, g);
        ScalarField n2a = tensor_norm2(d1a, g);
        parallel_for(lat.points, [&](std::ptrdiff_t p) {
            const double n2 = n2h.at(0, p).real() + n2a.at(0, p).real();
            fk.at(0, p) += std::sqrt(std::max(0.0, n2));
        });
        if (k == 2) {
            ScalarField n22(lat, 1);
            for (const Tensor* base : {&d1h, &d1a}) {
                Tensor d2h = cov_deriv(*base, gamma, Deriv::Holo, lat);
                Tensor d2a = cov_deriv(*base, gamma, Deriv::Antiholo, lat);
                ScalarField a = tensor_norm2(d2h, g);
                ScalarField b = tensor_norm2(d2a, g);
                parallel_for(lat.points, [&](std::ptrdiff_t p) {
                    n22.at(0, p) += a.at(0, p).real() + b.at(0, p).real();
                });
            }
            parallel_for(lat.points, [&](std::ptrdiff_t p) {
                fk.at(0, p) += std::pow(std::max(0.0, n22.at(0, p).real()), 1.0 / 3.0);
            });
        }
    }
    const double sup = reduce(fk, ReduceOp::Sup);
    return {std::move(fk), sup};
}

} // namespace pcf
