#include "pcf/diagnostics.hpp"
#include "pcf/errors.hpp"
#include "pcf/parallel.hpp"
#include "pcf/smallmat.hpp"

#include <cmath>
#include <cstring>

namespace pcf {

MatrixField beta_from_alpha(const VectorField& alpha) {
    MatrixField da = oneform_dalpha(alpha);
    MatrixField beta(*alpha.lat, "beta_{ij}");
    parallel_for(static_cast<std::ptrdiff_t>(da.data.size()),
                 [&](std::ptrdiff_t i) { beta.data[i] = I * da.data[i]; });
    return beta;
}

BornInfeldField born_infeld_W(const MetricField& g, const MatrixField& beta) {
    const ComplexLattice& lat = *g.lat;
    const int n = lat.n;
    const std::ptrdiff_t P = lat.points;
    if (g.min_eig <= 0.0) throw PositivityError("born_infeld_W: metric not positive");
    {
        double asym = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const cplx* a = beta.comp(i * n + j);
                const cplx* b = beta.comp(j * n + i);
                asym = std::max(asym, block_max(P, [&](std::ptrdiff_t p) {
                                    return std::abs(a[p] + b[p]);
                                }));
            }
        if (asym > 1e-10 * (1.0 + sup_abs(beta)))
            throw UnsupportedError("born_infeld_W: beta is not antisymmetric");
    }
    BornInfeldField W;
    W.lat = &lat;
    W.n = n;
    W.w = Field(lat, 4 * n * n, "W");
    const int dim = 2 * n;
    parallel_for(P, [&](std::ptrdiff_t p) {
        // W11 = g + B Gbar^-1 B^+, W12 = B Gbar^-1, W21 = W12^+, W22 = Gbar^-1
        // with Gbar^-1[k][l] = g^{lbar k}
        cplx b[9], gb[9], bg[9];
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) {
                gb[i * n + l] = g.gi(l, i, p); // Gbar^-1
                cplx s{0.0, 0.0};
                for (int k = 0; k < n; ++k) s += beta.m(i, k, p) * g.gi(l, k, p);
                bg[i * n + l] = s; // (B Gbar^-1)[i][l]
                b[i * n + l] = beta.m(i, l, p);
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx s = g.g(i, j, p);
                for (int l = 0; l < n; ++l) s += bg[i * n + l] * std::conj(b[j * n + l]);
                W.w.at(i * dim + j, p) = s;                                   // W11
            }
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) {
                W.w.at(i * dim + (n + l), p) = bg[i * n + l];                 // W12
                W.w.at((n + l) * dim + i, p) = std::conj(bg[i * n + l]);      // W21
            }
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) W.w.at((n + k) * dim + (n + l), p) = gb[k * n + l];
    });
    // invariants
    W.det_err = block_max(P, [&](std::ptrdiff_t p) {
        CMat m(dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) m(r, c) = W.at(r, c, p);
        return std::abs(cmat_det(m) - cplx{1.0, 0.0});
    });
    W.min_eig = block_min(P, [&](std::ptrdiff_t p) {
        CMat m(dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) m(r, c) = W.at(r, c, p);
        return hermitian_min_eig(m);
    });
    return W;
}

// ---------------------------------------------------------------------------

ScalarField scalar_laplacian(const MetricField& g, const ScalarField& f) {
    const ComplexLattice& lat = *g.lat;
    const int n = lat.n;
    ScalarField out(lat, 1, "Delta f");
    for (int k = 0; k < n; ++k) {
        Field dk = partial(f, k, Deriv::Holo);
        for (int l = 0; l < n; ++l) {
            Field dkl = partial(dk, l, Deriv::Antiholo);
            parallel_for(lat.points, [&](std::ptrdiff_t p) {
                out.at(0, p) += g.gi(l, k, p) * dkl.at(0, p);
            });
        }
    }
    return out;
}

namespace {

// plain component-wise Laplacian g^{lbar k} d_k d_lbar
Field plain_laplacian(const MetricField& g, const Field& f) {
    const ComplexLattice& lat = *g.lat;
    const int n = lat.n;
    Field out(lat, f.ncomp, "Delta");
    for (int k = 0; k < n; ++k) {
        Field dk = partial(f, k, Deriv::Holo);
        for (int l = 0; l < n; ++l) {
            Field dkl = partial(dk, l, Deriv::Antiholo);
            parallel_for(lat.points, [&](std::ptrdiff_t p) {
                for (int c = 0; c < f.ncomp; ++c)
                    out.at(c, p) += g.gi(l, k, p) * dkl.at(c, p);
            });
        }
    }
    return out;
}

// (2,0)-form Laplacian with Chern connection corrections on both slots
Field form20_laplacian(const MetricField& g, const Field& phi) {
    const ComplexLattice& lat = *g.lat;
    const int n = lat.n;
    std::vector<MatrixField> dg;
    for (int k = 0; k < n; ++k) {
        Field d = partial(g.mat, k, Deriv::Holo);
        MatrixField md(lat);
        md.data = std::move(d.data);
        dg.push_back(std::move(md));
    }
    std::vector<Field> dphi; // dphi[l] = d_lbar phi
    for (int l = 0; l < n; ++l) dphi.push_back(partial(phi, l, Deriv::Antiholo));
    Field out(lat, n * n, "Delta phi");
    for (int k = 0; k < n; ++k) {
        Field dk = partial(phi, k, Deriv::Holo);
        for (int l = 0; l < n; ++l) {
            Field dkl = partial(dk, l, Deriv::Antiholo);
            parallel_for(lat.points, [&](std::ptrdiff_t p) {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        cplx conn{0.0, 0.0};
                        for (int q = 0; q < n; ++q)
                            for (int r = 0; r < n; ++r)
                                conn += g.gi(q, r, p) *
                                        (dg[k].m(i, q, p) * dphi[l].at(r * n + j, p) +
                                         dg[k].m(j, q, p) * dphi[l].at(i * n + r, p));
                        out.at(i * n + j, p) +=
                            g.gi(l, k, p) * (dkl.at(i * n + j, p) - conn);
                    }
            });
        }
    }
    return out;
}

} // namespace

Field heat_residual(const StateTriple& tr, const std::function<Field(const FlowState&)>& F,
                    LapKind kind) {
    const double dm = tr.mid.t - tr.prev.t;
    const double dp = tr.next.t - tr.mid.t;
    if (!(dm > 0.0) || !(dp > 0.0)) throw UnsupportedError("heat_residual: bad time spacing");
    const double wp = dm / (dp * (dp + dm));
    const double w0 = (dp - dm) / (dp * dm);
    const double wm = -dp / (dm * (dp + dm));
    Field fprev = F(tr.prev);
    Field fmid = F(tr.mid);
    Field fnext = F(tr.next);
    Field lap = (kind == LapKind::ScalarPlain) ? plain_laplacian(tr.mid.g, fmid)
                                               : form20_laplacian(tr.mid.g, fmid);
    Field out(*fmid.lat, fmid.ncomp, "(d_t - Delta) F");
    parallel_for(static_cast<std::ptrdiff_t>(out.data.size()), [&](std::ptrdiff_t i) {
        out.data[i] = wp * fnext.data[i] + w0 * fmid.data[i] + wm * fprev.data[i] - lap.data[i];
    });
    return out;
}

ScalarField trace_h(const MetricField& g, const MetricField& h) {
    const int n = g.n;
    ScalarField out(*g.lat, 1, "tr_g h");
    parallel_for(g.lat->points, [&](std::ptrdiff_t p) {
        cplx s{0.0, 0.0};
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) s += g.gi(l, k, p) * h.g(k, l, p);
        out.at(0, p) = s;
    });
    return out;
}

ScalarField logdet_ratio(const MetricField& g, const MetricField& h) {
    ScalarField out(*g.lat, 1, "log det g/det h");
    parallel_for(g.lat->points, [&](std::ptrdiff_t p) {
        out.at(0, p) =
            std::log(g.detg.at(0, p).real()) - std::log(h.detg.at(0, p).real());
    });
    return out;
}

ScalarField upsilon_norm2_h(const MetricField& g, const MetricField& h) {
    const int n = g.n;
    Field gamma = chern_connection(g);
    ScalarField out(*g.lat, 1, "|Upsilon|^2_h");
    parallel_for(g.lat->points, [&](std::ptrdiff_t pt) {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j) {
                                const cplx v = g.gi(q, p, pt) * g.gi(l, k, pt) * h.g(i, j, pt) *
                                               gamma.at((p * n + k) * n + i, pt) *
                                               std::conj(gamma.at((q * n + l) * n + j, pt));
                                s += v.real();
                            }
        out.at(0, pt) = s;
    });
    return out;
}

ScalarField pair_hQ(const MetricField& g, const MetricField& h, const MatrixField& Q) {
    const int n = g.n;
    ScalarField out(*g.lat, 1, "<h,Q>");
    parallel_for(g.lat->points, [&](std::ptrdiff_t p) {
        cplx s{0.0, 0.0};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        s += g.gi(j, k, p) * g.gi(l, i, p) * h.g(i, j, p) * Q.m(k, l, p);
        out.at(0, p) = s;
    });
    return out;
}

// ---------------------------------------------------------------------------

double IdentityReport::worst() const {
    double w = 0.0;
    for (const auto& e : entries) w = std::max(w, e.sup_residual);
    return w;
}

namespace {

double sup_abs_field(const Field& f) { return sup_abs(f); }

// <Q, tr_g(phi x phibar)> for a (2,0) coefficient field phi
ScalarField pair_Q_phi(const MetricField& g, const MatrixField& Q, const MatrixField& phi) {
    const int n = g.n;
    ScalarField out(*g.lat, 1, "<Q,phi phi>");
    parallel_for(g.lat->points, [&](std::ptrdiff_t pt) {
        cplx A[9];
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                cplx s{0.0, 0.0};
                for (int p = 0; p < n; ++p)
                    for (int q = 0; q < n; ++q)
                        s += g.gi(q, p, pt) * phi.m(k, p, pt) * std::conj(phi.m(l, q, pt));
                A[k * n + l] = s;
            }
        cplx s{0.0, 0.0};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        s += g.gi(j, k, pt) * g.gi(l, i, pt) * Q.m(i, j, pt) * A[k * n + l];
        out.at(0, pt) = s;
    });
    return out;
}

// |nabla phi|^2, holomorphic Chern covariant derivative of a (2,0) form
ScalarField holo_grad_norm2(const MetricField& g, const MatrixField& phi) {
    const ComplexLattice& lat = *g.lat;
    const int n = lat.n;
    Field gamma = chern_connection(g);
    std::vector<Field> dphi;
    for (int p = 0; p < n; ++p) dphi.push_back(partial(phi, p, Deriv::Holo));
    Field nabla(lat, n * n * n, "nabla phi"); // (p, i, j)
    parallel_for(lat.points, [&](std::ptrdiff_t pt) {
        for (int p = 0; p < n; ++p)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    cplx s = dphi[p].at(i * n + j, pt);
                    for (int r = 0; r < n; ++r) {
                        s -= gamma.at((p * n + i) * n + r, pt) * phi.m(r, j, pt);
                        s -= gamma.at((p * n + j) * n + r, pt) * phi.m(i, r, pt);
                    }
                    nabla.at((p * n + i) * n + j, pt) = s;
                }
    });
    ScalarField out(lat, 1, "|nabla phi|^2");
    parallel_for(lat.points, [&](std::ptrdiff_t pt) {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k)
                        for (int j = 0; j < n; ++j)
                            for (int l = 0; l < n; ++l) {
                                const cplx v = nabla.at((p * n + i) * n + j, pt) *
                                               std::conj(nabla.at((q * n + k) * n + l, pt)) *
                                               g.gi(q, p, pt) * g.gi(k, i, pt) * g.gi(l, j, pt);
                                s += v.real();
                            }
        out.at(0, pt) = s;
    });
    return out;
}

// gfsys right-hand sides
MatrixField gfsys_g_rhs(const MetricField& g) {
    const ComplexLattice& lat = *g.lat;
    const int n = lat.n;
    std::vector<MatrixField> dg;
    for (int i = 0; i < n; ++i) {
        Field d = partial(g.mat, i, Deriv::Holo);
        MatrixField md(lat);
        md.data = std::move(d.data);
        dg.push_back(std::move(md));
    }
    // g_{a bbar, cbar} = conj(g_{b abar, c})
    auto dbar = [&](int a, int b, int c, std::ptrdiff_t p) {
        return std::conj(dg[c].m(b, a, p));
    };
    MatrixField out(lat, "gfsys g rhs");
    parallel_for(lat.points, [&](std::ptrdiff_t pt) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx s{0.0, 0.0};
                for (int m = 0; m < n; ++m)
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q)
                            for (int nn = 0; nn < n; ++nn)
                                s -= g.gi(m, p, pt) * g.gi(q, nn, pt) *
                                     (dg[i].m(nn, m, pt) * dbar(p, j, q, pt) +
                                      dbar(nn, m, j, pt) * dg[p].m(i, q, pt) -
                                      dg[i].m(p, q, pt) * dbar(nn, m, j, pt));
                out.m(i, j, pt) = s;
            }
    });
    return out;
}

MatrixField gfsys_beta_rhs(const MetricField& g, const MatrixField& beta) {
    const ComplexLattice& lat = *g.lat;
    const int n = lat.n;
    std::vector<MatrixField> dg;
    for (int i = 0; i < n; ++i) {
        Field d = partial(g.mat, i, Deriv::Holo);
        MatrixField md(lat);
        md.data = std::move(d.data);
        dg.push_back(std::move(md));
    }
    std::vector<Field> db; // db[q] = d_qbar beta
    for (int q = 0; q < n; ++q) db.push_back(partial(beta, q, Deriv::Antiholo));
    MatrixField out(lat, "gfsys beta rhs");
    parallel_for(lat.points, [&](std::ptrdiff_t pt) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx s{0.0, 0.0};
                for (int p = 0; p < n; ++p)
                    for (int q = 0; q < n; ++q)
                        for (int r = 0; r < n; ++r)
                            for (int sidx = 0; sidx < n; ++sidx)
                                s -= g.gi(q, p, pt) * g.gi(sidx, r, pt) *
                                     (dg[p].m(i, sidx, pt) * db[q].at(r * n + j, pt) +
                                      dg[p].m(j, sidx, pt) * db[q].at(i * n + r, pt));
                out.m(i, j, pt) = s;
            }
    });
    return out;
}

} // namespace

IdentityReport identity_suite(const std::vector<StateTriple>& triples) {
    IdentityReport rep;
    rep.entries = {{"volumeform", 0.0}, {"trace", 0.0},   {"torsionpotential", 0.0},
                   {"phi_norm", 0.0},   {"gfsys_g", 0.0}, {"gfsys_beta", 0.0}};
    if (triples.empty()) throw UnsupportedError("identity_suite: no recorded snapshot triples");
    for (const StateTriple& tr : triples) {
        const FlowState& s = tr.mid;
        const MetricField& h = s.bg->h;
        TorsionField T = chern_torsion(s.g);
        MatrixField Q = torsion_Q(s.g, T);
        ScalarField t2 = torsion_norm2(s.g, T);

        // (a) (d_t - Delta) log det g/det h = |T|^2 - tr_g rho(h); rho(h) = 0 flat
        {
            Field r = heat_residual(
                tr, [&](const FlowState& st) { return logdet_ratio(st.g, st.bg->h); },
                LapKind::ScalarPlain);
            parallel_for(r.points(), [&](std::ptrdiff_t p) { r.at(0, p) -= t2.at(0, p); });
            rep.entries[0].sup_residual = std::max(rep.entries[0].sup_residual, sup_abs_field(r));
        }
        // (b) (d_t - Delta) tr_g h = -|Upsilon|^2 - <h,Q>; Omega_h(g,g) = 0 flat
        {
            Field r = heat_residual(
                tr, [&](const FlowState& st) { return trace_h(st.g, st.bg->h); },
                LapKind::ScalarPlain);
            ScalarField u2 = upsilon_norm2_h(s.g, h);
            ScalarField hq = pair_hQ(s.g, h, Q);
            parallel_for(r.points(), [&](std::ptrdiff_t p) {
                r.at(0, p) += u2.at(0, p) + hq.at(0, p);
            });
            rep.entries[1].sup_residual = std::max(rep.entries[1].sup_residual, sup_abs_field(r));
        }
        const bool has_alpha = s.formulation != Formulation::Metric;
        if (has_alpha) {
            // (c) (d_t - Delta) d alpha = 0 on the flat torus background
            {
                Field r = heat_residual(
                    tr, [&](const FlowState& st) { return oneform_dalpha(st.alpha); },
                    LapKind::Form20Connection);
                rep.entries[2].sup_residual =
                    std::max(rep.entries[2].sup_residual, sup_abs_field(r));
            }
            // (d) (d_t - Delta)|phi|^2 = -|nabla phi|^2 - |T|^2 - 2<Q, phi phibar>
            {
                Field r = heat_residual(
                    tr,
                    [&](const FlowState& st) {
                        return form20_norm2(st.g, oneform_dalpha(st.alpha));
                    },
                    LapKind::ScalarPlain);
                MatrixField phi = oneform_dalpha(s.alpha);
                ScalarField grad = holo_grad_norm2(s.g, phi);
                ScalarField qphi = pair_Q_phi(s.g, Q, phi);
                parallel_for(r.points(), [&](std::ptrdiff_t p) {
                    r.at(0, p) += grad.at(0, p) + t2.at(0, p) + 2.0 * qphi.at(0, p);
                });
                rep.entries[3].sup_residual =
                    std::max(rep.entries[3].sup_residual, sup_abs_field(r));
            }
            // (e) the gauge-invariant (g, beta) system
            {
                Field rg = heat_residual(
                    tr, [&](const FlowState& st) { return st.g.mat; }, LapKind::ScalarPlain);
                MatrixField rhs = gfsys_g_rhs(s.g);
                parallel_for(static_cast<std::ptrdiff_t>(rg.data.size()),
                             [&](std::ptrdiff_t i) { rg.data[i] -= rhs.data[i]; });
                rep.entries[4].sup_residual =
                    std::max(rep.entries[4].sup_residual, sup_abs_field(rg));

                Field rb = heat_residual(
                    tr, [&](const FlowState& st) { return beta_from_alpha(st.alpha); },
                    LapKind::ScalarPlain);
                MatrixField beta = beta_from_alpha(s.alpha);
                MatrixField rhsb = gfsys_beta_rhs(s.g, beta);
                parallel_for(static_cast<std::ptrdiff_t>(rb.data.size()),
                             [&](std::ptrdiff_t i) { rb.data[i] -= rhsb.data[i]; });
                rep.entries[5].sup_residual =
                    std::max(rep.entries[5].sup_residual, sup_abs_field(rb));
            }
        }
    }
    return rep;
}

SubsolutionReport subsolution_monitor(const std::vector<StateTriple>& triples, bool negate_W) {
    SubsolutionReport rep;
    if (triples.empty()) throw UnsupportedError("subsolution_monitor: no snapshot triples");
    for (const StateTriple& tr : triples) {
        if (tr.mid.formulation != Formulation::OneForm)
            throw UnsupportedError("subsolution_monitor: requires a oneform-mode run");
        auto WofState = [&](const FlowState& st) {
            BornInfeldField W = born_infeld_W(st.g, beta_from_alpha(st.alpha));
            if (negate_W)
                for (auto& v : W.w.data) v = -v;
            return W.w;
        };
        Field r = heat_residual(tr, WofState, LapKind::ScalarPlain);
        const int dim = 2 * tr.mid.g.n;
        const double pos = block_max(r.points(), [&](std::ptrdiff_t p) {
            CMat m(dim);
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b) {
                    const cplx u = r.at(a * dim + b, p);
                    const cplx v = std::conj(r.at(b * dim + a, p));
                    m(a, b) = 0.5 * (u + v);
                }
            return std::max(0.0, hermitian_max_eig(m));
        });
        BornInfeldField Wmid = born_infeld_W(tr.mid.g, beta_from_alpha(tr.mid.alpha));
        rep.pos_lambda.push_back(pos);
        rep.sup_w_norm.push_back(sup_abs(Wmid.w));
        rep.max_pos = std::max(rep.max_pos, pos);
        rep.max_sup_w = std::max(rep.max_sup_w, sup_abs(Wmid.w));
    }
    rep.sign_flipped = negate_W;
    return rep;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& pcf_columns() {
    static const std::vector<std::string> cols = {
        "t",          "dt",         "sup_T2",   "mean_T2",   "sup_dalpha2",
        "sup_trgh",   "inf_logdet", "sup_logdet", "plurires", "mean_drift",
        "min_eig_g",  "detW_err",   "W_heat_pos", "f0_sup",   "f1_sup"};
    return cols;
}

const std::vector<std::string>& gk_columns() {
    static const std::vector<std::string> cols = {
        "t",           "dt",           "sup_udot", "inf_udot", "osc_u",     "min_eig_plus",
        "min_eig_minus", "sup_T2",     "plurires", "mean_drift", "trhess_min"};
    return cols;
}

int pcf_column(const std::string& name) {
    const auto& c = pcf_columns();
    for (size_t i = 0; i < c.size(); ++i)
        if (c[i] == name) return static_cast<int>(i);
    throw UnsupportedError("unknown pcf column " + name);
}

int gk_column(const std::string& name) {
    const auto& c = gk_columns();
    for (size_t i = 0; i < c.size(); ++i)
        if (c[i] == name) return static_cast<int>(i);
    throw UnsupportedError("unknown gk column " + name);
}

DiagnosticsRecord sample_pcf(const FlowState& s, double dt, const SampleContext& ctx,
                             const StateTriple* triple) {
    DiagnosticsRecord rec;
    rec.v.assign(pcf_columns().size(), 0.0);
    const int n = s.g.n;
    rec.v[0] = s.t;
    rec.v[1] = dt;
    TorsionField T = chern_torsion(s.g);
    ScalarField t2 = torsion_norm2(s.g, T);
    rec.v[2] = reduce(t2, ReduceOp::Sup);
    rec.v[3] = reduce(t2, ReduceOp::Mean);
    const bool has_alpha = s.formulation != Formulation::Metric;
    if (has_alpha) {
        MatrixField phi = oneform_dalpha(s.alpha);
        rec.v[4] = reduce(form20_norm2(s.g, phi), ReduceOp::Sup);
        MatrixField beta(*s.g.lat, "beta");
        parallel_for(static_cast<std::ptrdiff_t>(phi.data.size()),
                     [&](std::ptrdiff_t i) { beta.data[i] = I * phi.data[i]; });
        BornInfeldField W = born_infeld_W(s.g, beta);
        rec.v[11] = W.det_err;
    }
    ScalarField trh = trace_h(s.g, s.bg->h);
    rec.v[5] = reduce(trh, ReduceOp::Sup);
    ScalarField ld = logdet_ratio(s.g, s.bg->h);
    rec.v[6] = reduce(ld, ReduceOp::Inf);
    rec.v[7] = reduce(ld, ReduceOp::Sup);
    rec.v[8] = pluriclosed_residual(s.g);
    double drift = 0.0;
    for (int c = 0; c < n * n; ++c)
        drift = std::max(drift, std::abs(field_mean(s.g.mat, c) - ctx.mean_g0[c]));
    rec.v[9] = drift;
    rec.v[10] = s.g.min_eig;
    if (triple && has_alpha) {
        SubsolutionReport sub = subsolution_monitor({*triple});
        rec.v[12] = sub.max_pos;
    }
    if (ctx.fk_max >= 0) {
        auto [f0, sup0] = upsilon_fk(s.g, s.bg->h, 0);
        rec.v[13] = sup0;
        if (ctx.fk_max >= 1) {
            auto [f1, sup1] = upsilon_fk(s.g, s.bg->h, 1);
            rec.v[14] = sup1;
        }
    }
    return rec;
}

MonotoneReport monotone_monitors(const std::vector<DiagnosticsRecord>& series, bool gk,
                                 double tol) {
    MonotoneReport rep;
    auto check_dir = [&](const std::string& col, bool nonincreasing, const std::string& label) {
        const int idx = gk ? gk_column(col) : pcf_column(col);
        MonitorEntry e;
        e.name = label;
        for (size_t i = 1; i < series.size(); ++i) {
            const double prev = series[i - 1].v[idx];
            const double cur = series[i].v[idx];
            const double viol =
                (nonincreasing ? cur - prev : prev - cur) / (1.0 + std::abs(prev));
            e.worst_violation = std::max(e.worst_violation, viol);
        }
        e.pass = e.worst_violation < tol;
        rep.entries.push_back(e);
        rep.all_pass = rep.all_pass && e.pass;
    };
    auto check_small = [&](const std::string& col, double bound, const std::string& label) {
        const int idx = gk ? gk_column(col) : pcf_column(col);
        MonitorEntry e;
        e.name = label;
        for (const auto& r : series) e.worst_violation = std::max(e.worst_violation, r.v[idx]);
        e.pass = e.worst_violation < bound;
        rep.entries.push_back(e);
        rep.all_pass = rep.all_pass && e.pass;
    };
    if (series.size() < 2) throw UnsupportedError("monotone_monitors: need a sampled run");
    if (!gk) {
        check_dir("sup_trgh", true, "sup tr_g h nonincreasing");
        check_dir("inf_logdet", false, "inf log det ratio nondecreasing");
        check_dir("sup_dalpha2", true, "sup |d alpha|^2 nonincreasing");
        check_small("mean_drift", tol, "componentwise mean of g constant");
    } else {
        check_dir("sup_udot", true, "sup |du/dt| nonincreasing");
        check_small("mean_drift", tol, "componentwise mean of g constant");
    }
    return rep;
}

} // namespace pcf
