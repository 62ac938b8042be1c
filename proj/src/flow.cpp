#include "pcf/flow.hpp"
#include "pcf/errors.hpp"
#include "pcf/fft.hpp"
#include "pcf/parallel.hpp"
#include "pcf/rng.hpp"

#include <cmath>
#include <cstring>
#include <vector>

namespace pcf {

namespace {

// repoint a field at the background-owned lattice (same shape, stable address)
void rebind_field(Field& f, const ComplexLattice& lat) {
    if (!f.lat) return;
    if (!f.lat->same_shape(lat)) throw ConfigError("field lattice does not match background");
    f.lat = &lat;
}

void rebind_metric(MetricField& m, const ComplexLattice& lat) {
    if (!m.lat) return;
    if (!m.lat->same_shape(lat)) throw ConfigError("metric lattice does not match background");
    m.lat = &lat;
    rebind_field(m.mat, lat);
    rebind_field(m.inv, lat);
    rebind_field(m.detg, lat);
    rebind_field(m.eigmin, lat);
}

} // namespace

FlowBackground make_torus_background(const ComplexLattice& lat, double scale) {
    FlowBackground bg;
    bg.lattice = std::make_shared<ComplexLattice>(lat);
    bg.ghat = flat_metric(*bg.lattice, scale);
    bg.h = flat_metric(*bg.lattice, scale);
    bg.eps_pos = positivity_floor(bg.ghat);
    return bg;
}

FlowState make_metric_state(std::shared_ptr<const FlowBackground> bg, MetricField g0,
                            bool normalized, bool dealias) {
    FlowState s;
    s.formulation = Formulation::Metric;
    s.normalized = normalized;
    s.dealias = dealias;
    s.bg = std::move(bg);
    s.g = std::move(g0);
    rebind_metric(s.g, *s.bg->lattice);
    if (s.g.min_eig <= s.bg->eps_pos)
        throw PositivityError("initial metric below positivity floor");
    return s;
}

FlowState make_oneform_state(std::shared_ptr<const FlowBackground> bg, VectorField alpha0,
                             bool normalized, bool dealias) {
    FlowState s;
    s.formulation = Formulation::OneForm;
    s.normalized = normalized;
    s.dealias = dealias;
    s.bg = std::move(bg);
    s.alpha = std::move(alpha0);
    rebind_field(s.alpha, *s.bg->lattice);
    s.g = metric_from_oneform(s.bg->ghat, s.alpha, true, s.bg->eps_pos);
    return s;
}

FlowState make_split_state(std::shared_ptr<const FlowBackground> bg, VectorField beta0,
                           ScalarField f0, bool normalized, bool dealias) {
    FlowState s;
    s.formulation = Formulation::Split;
    s.normalized = normalized;
    s.dealias = dealias;
    s.bg = std::move(bg);
    s.beta_split = std::move(beta0);
    s.f_split = std::move(f0);
    rebind_field(s.beta_split, *s.bg->lattice);
    rebind_field(s.f_split, *s.bg->lattice);
    // alpha = beta - i d f
    s.alpha = VectorField(*s.bg->ghat.lat, "alpha");
    const int n = s.bg->ghat.n;
    for (int i = 0; i < n; ++i) {
        Field di = partial(s.f_split, i, Deriv::Holo);
        cplx* d = s.alpha.comp(i);
        const cplx* b = s.beta_split.comp(i);
        const cplx* dfp = di.comp(0);
        parallel_for(s.alpha.points(), [&](std::ptrdiff_t p) { d[p] = b[p] - I * dfp[p]; });
    }
    s.g = metric_from_oneform(s.bg->ghat, s.alpha, true, s.bg->eps_pos);
    return s;
}

MatrixField pcf_metric_rhs(const MetricField& g, bool normalized, bool do_dealias) {
    MatrixField S = chern_curvature_S(g);
    TorsionField T = chern_torsion(g);
    MatrixField Q = torsion_Q(g, T);
    MatrixField rhs(*g.lat, "dg/dt");
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(rhs.data.size());
    parallel_for(count, [&](std::ptrdiff_t i) {
        rhs.data[i] = -S.data[i] + Q.data[i];
        if (normalized) rhs.data[i] -= g.mat.data[i];
    });
    hermitize(rhs);
    if (do_dealias) dealias(rhs);
    return rhs;
}

VectorField reduced_oneform_rhs(const VectorField& alpha, const FlowState& state, bool do_dealias) {
    if (state.normalized)
        // the -omega term of the normalized flow moves the Aeppli class, which a
        // one-form over a fixed background cannot represent (dbar a + d abar is
        // mean-free); normalized runs go through the metric formulation
        throw UnsupportedError("normalized flow is only available in metric mode");
    const ComplexLattice& lat = *alpha.lat;
    const int n = lat.n;
    MetricField ga = metric_from_oneform(state.bg->ghat, alpha, true, state.bg->eps_pos);

    // Dmix[p][q].at(i) = alpha_{i, p qbar};  Daa[p][q].at(i) = d_pbar d_qbar alpha_i
    std::vector<std::vector<Field>> Dmix(n), Daa(n);
    std::vector<Field> D1h, D1a;
    for (int p = 0; p < n; ++p) D1h.push_back(partial(alpha, p, Deriv::Holo));
    for (int p = 0; p < n; ++p) D1a.push_back(partial(alpha, p, Deriv::Antiholo));
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            Dmix[p].push_back(partial(D1h[p], q, Deriv::Antiholo));
            Daa[p].push_back(q >= p ? partial(D1a[p], q, Deriv::Antiholo) : Field());
        }
    auto daa = [&](int p, int q) -> const Field& { return p <= q ? Daa[p][q] : Daa[q][p]; };

    VectorField out(lat, "dalpha/dt");
    parallel_for(lat.points, [&](std::ptrdiff_t pt) {
        for (int i = 0; i < n; ++i) {
            cplx s{0.0, 0.0};
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q) {
                    const cplx t1 = Dmix[p][q].at(i, pt);
                    const cplx t2 = Dmix[i][q].at(p, pt);
                    const cplx t3 = std::conj(daa(p, i).at(q, pt));
                    s += ga.gi(q, p, pt) * (t1 - 0.5 * (t2 + t3));
                }
            out.at(i, pt) = s;
        }
    });
    if (do_dealias) dealias(out);
    return out;
}

void split_system_rhs(const VectorField& beta, const ScalarField& f, const FlowState& state,
                      VectorField& dbeta, ScalarField& df, bool do_dealias) {
    const ComplexLattice& lat = *beta.lat;
    const int n = lat.n;
    // metric from alpha = beta - i df
    VectorField alpha(lat, "alpha");
    for (int i = 0; i < n; ++i) {
        Field di = partial(f, i, Deriv::Holo);
        cplx* d = alpha.comp(i);
        const cplx* b = beta.comp(i);
        const cplx* dfp = di.comp(0);
        parallel_for(lat.points, [&](std::ptrdiff_t p) { d[p] = b[p] - I * dfp[p]; });
    }
    MetricField g = metric_from_oneform(state.bg->ghat, alpha, true, state.bg->eps_pos);
    TorsionField T = chern_torsion(g);

    // holomorphic metric derivatives for the connection term of Delta on (1,0)-forms
    std::vector<MatrixField> dg;
    for (int k = 0; k < n; ++k) {
        Field d = partial(g.mat, k, Deriv::Holo);
        MatrixField md(lat);
        md.data = std::move(d.data);
        dg.push_back(std::move(md));
    }
    // dbar beta and second mixed derivatives
    std::vector<Field> Ba; // Ba[l].at(p) = beta_{p, lbar}
    for (int l = 0; l < n; ++l) Ba.push_back(partial(beta, l, Deriv::Antiholo));
    std::vector<std::vector<Field>> Bmix(n); // Bmix[k][l].at(i) = beta_{i,k lbar}
    for (int k = 0; k < n; ++k) {
        Field dk = partial(beta, k, Deriv::Holo);
        for (int l = 0; l < n; ++l) Bmix[k].push_back(partial(dk, l, Deriv::Antiholo));
    }

    dbeta = VectorField(lat, "dbeta/dt");
    parallel_for(lat.points, [&](std::ptrdiff_t pt) {
        for (int i = 0; i < n; ++i) {
            cplx lap{0.0, 0.0}, tors{0.0, 0.0};
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    cplx conn{0.0, 0.0};
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q)
                            conn += g.gi(q, p, pt) * dg[k].m(i, q, pt) * Ba[l].at(p, pt);
                    lap += g.gi(l, k, pt) * (Bmix[k][l].at(i, pt) - conn);
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q)
                            tors += g.gi(l, k, pt) * g.gi(q, p, pt) * T.value(i, k, q, pt) *
                                    Ba[l].at(p, pt);
                }
            dbeta.at(i, pt) = lap - tors;
        }
    });

    // scalar equation
    df = ScalarField(lat, 1, "df/dt");
    std::vector<Field> Fh;
    for (int k = 0; k < n; ++k) Fh.push_back(partial(f, k, Deriv::Holo));
    std::vector<std::vector<Field>> Fmix(n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) Fmix[k].push_back(partial(Fh[k], l, Deriv::Antiholo));
    const MetricField& ghat = state.bg->ghat;
    const MetricField& h = state.bg->h;
    parallel_for(lat.points, [&](std::ptrdiff_t pt) {
        cplx lap{0.0, 0.0};
        cplx trg{0.0, 0.0};
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                lap += g.gi(l, k, pt) * Fmix[k][l].at(0, pt);
                trg += g.gi(l, k, pt) * ghat.g(k, l, pt);
            }
        const double logratio =
            std::log(g.detg.at(0, pt).real()) - std::log(h.detg.at(0, pt).real());
        df.at(0, pt) = lap + 0.5 * (trg + logratio) + 0.5 * n;
    });
    if (do_dealias) {
        dealias(dbeta);
        dealias(df);
    }
}

double cfl_dt(const MetricField& g, const StepControl& ctrl) {
    if (ctrl.dt_fixed > 0.0) return ctrl.dt_fixed;
    const double h = g.lat->min_spacing();
    return ctrl.cfl_safety * h * h * g.min_eig / g.lat->n;
}

namespace {

using Packed = std::vector<cplx>;

Packed pack(const FlowState& s) {
    switch (s.formulation) {
    case Formulation::Metric:
        return s.g.mat.data;
    case Formulation::OneForm:
        return s.alpha.data;
    case Formulation::Split: {
        Packed y = s.beta_split.data;
        y.insert(y.end(), s.f_split.data.begin(), s.f_split.data.end());
        return y;
    }
    }
    return {};
}

FlowState unpack(const FlowState& proto, double t, const Packed& y, bool validate) {
    const ComplexLattice& lat = *proto.bg->ghat.lat;
    FlowState s;
    s.t = t;
    s.formulation = proto.formulation;
    s.normalized = proto.normalized;
    s.dealias = proto.dealias;
    s.bg = proto.bg;
    const double floor = validate ? proto.bg->eps_pos : -1e300;
    switch (proto.formulation) {
    case Formulation::Metric: {
        MatrixField m(lat, "g_{i jbar}");
        m.data = y;
        s.g = make_metric(std::move(m), true, floor);
        break;
    }
    case Formulation::OneForm: {
        s.alpha = VectorField(lat, "alpha");
        s.alpha.data = y;
        s.g = metric_from_oneform(proto.bg->ghat, s.alpha, true, floor);
        break;
    }
    case Formulation::Split: {
        s.beta_split = VectorField(lat, "beta");
        s.f_split = ScalarField(lat, 1, "f");
        const size_t nb = s.beta_split.data.size();
        std::copy(y.begin(), y.begin() + nb, s.beta_split.data.begin());
        std::copy(y.begin() + nb, y.end(), s.f_split.data.begin());
        FlowState tmp = make_split_state(proto.bg, s.beta_split, s.f_split, proto.normalized,
                                         proto.dealias);
        tmp.t = t;
        return tmp;
    }
    }
    return s;
}

Packed eval_rhs(const FlowState& proto, const Packed& y, double t) {
    FlowState s = unpack(proto, t, y, true);
    switch (proto.formulation) {
    case Formulation::Metric:
        return pcf_metric_rhs(s.g, proto.normalized, proto.dealias).data;
    case Formulation::OneForm:
        return reduced_oneform_rhs(s.alpha, s, proto.dealias).data;
    case Formulation::Split: {
        VectorField db;
        ScalarField df;
        split_system_rhs(s.beta_split, s.f_split, s, db, df, proto.dealias);
        Packed out = db.data;
        out.insert(out.end(), df.data.begin(), df.data.end());
        return out;
    }
    }
    return {};
}

void axpy_vec(Packed& y, double a, const Packed& x) {
    parallel_for(static_cast<std::ptrdiff_t>(y.size()),
                 [&](std::ptrdiff_t i) { y[i] += a * x[i]; });
}

} // namespace

FlowState flow_step(const FlowState& s, const StepControl& ctrl, double dt) {
    Packed y0 = pack(s);
    Packed ynext = y0;
    if (ctrl.integrator == Integrator::Euler) {
        Packed k1 = eval_rhs(s, y0, s.t);
        axpy_vec(ynext, dt, k1);
    } else {
        Packed k1 = eval_rhs(s, y0, s.t);
        Packed y = y0;
        axpy_vec(y, 0.5 * dt, k1);
        Packed k2 = eval_rhs(s, y, s.t + 0.5 * dt);
        y = y0;
        axpy_vec(y, 0.5 * dt, k2);
        Packed k3 = eval_rhs(s, y, s.t + 0.5 * dt);
        y = y0;
        axpy_vec(y, dt, k3);
        Packed k4 = eval_rhs(s, y, s.t + dt);
        axpy_vec(ynext, dt / 6.0, k1);
        axpy_vec(ynext, dt / 3.0, k2);
        axpy_vec(ynext, dt / 3.0, k3);
        axpy_vec(ynext, dt / 6.0, k4);
    }
    return unpack(s, s.t + dt, ynext, true);
}

VectorField random_pluriclosed_perturbation(const ComplexLattice& lat, const MetricField& ghat,
                                            uint64_t seed, double amplitude, int max_mode,
                                            int* halvings) {
    const int n = lat.n;
    const int na = lat.axes();
    // two real band-limited fields per component: alpha_i = v_i + sqrt(-1) w_i
    Field hat(lat, 2 * n);
    std::vector<int> idx(na, -max_mode);
    for (int c = 0; c < 2 * n; ++c) {
        SplitMix64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(c + 1));
        std::fill(idx.begin(), idx.end(), -max_mode);
        while (true) {
            long r2 = 0;
            bool zero = true;
            for (int a = 0; a < na; ++a) {
                r2 += static_cast<long>(idx[a]) * idx[a];
                if (idx[a] != 0) zero = false;
            }
            if (r2 <= static_cast<long>(max_mode) * max_mode && !zero) {
                std::ptrdiff_t p = 0;
                for (int a = 0; a < na; ++a)
                    p = p * lat.sizes[a] + ((idx[a] + lat.sizes[a]) % lat.sizes[a]);
                double re, im;
                rng.gauss(re, im);
                hat.at(c, p) = cplx{re, im};
            }
            int a = na - 1;
            while (a >= 0 && idx[a] == max_mode) idx[a--] = -max_mode;
            if (a < 0) break;
            ++idx[a];
        }
    }
    // conjugate-symmetrize each real part: hat(k) <- (hat(k) + conj(hat(-k)))/2
    {
        Field sym = hat;
        std::vector<int> co(na);
        for (int c = 0; c < 2 * n; ++c)
            for (std::ptrdiff_t p = 0; p < lat.points; ++p) {
                lat.coords(p, co.data());
                std::ptrdiff_t np = 0;
                for (int a = 0; a < na; ++a)
                    np = np * lat.sizes[a] + ((lat.sizes[a] - co[a]) % lat.sizes[a]);
                hat.at(c, p) = 0.5 * (sym.at(c, p) + std::conj(sym.at(c, np)));
            }
    }
    for (int c = 0; c < 2 * n; ++c) {
        fft_all_inplace(lat, hat.comp(c), false);
        cplx* d = hat.comp(c);
        const double pts = static_cast<double>(lat.points);
        parallel_for(lat.points, [&](std::ptrdiff_t p) { d[p] *= pts; });
    }
    VectorField alpha(lat, "alpha");
    for (int i = 0; i < n; ++i) {
        cplx* d = alpha.comp(i);
        const cplx* v = hat.comp(2 * i);
        const cplx* w = hat.comp(2 * i + 1);
        parallel_for(lat.points, [&](std::ptrdiff_t p) {
            d[p] = cplx{v[p].real(), w[p].real()};
        });
    }
    if (amplitude == 0.0) {
        alpha.fill(cplx{0.0, 0.0});
        if (halvings) *halvings = 0;
        return alpha;
    }
    const double s = sup_abs(alpha);
    if (s > 0.0) alpha.data = scaled(alpha, amplitude / s).data;
    int tries = 0;
    const double floor = positivity_floor(ghat);
    while (true) {
        try {
            (void)metric_from_oneform(ghat, alpha, true, floor);
            break;
        } catch (const PositivityError&) {
            alpha.data = scaled(alpha, 0.5).data;
            ++tries;
            if (tries > 60) throw;
        }
    }
    if (halvings) *halvings = tries;
    return alpha;
}

} // namespace pcf
