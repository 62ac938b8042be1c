#include "pcf/gk.hpp"
#include "pcf/errors.hpp"
#include "pcf/fft.hpp"
#include "pcf/parallel.hpp"
#include "pcf/rng.hpp"
#include "pcf/smallmat.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pcf {

GKBackground make_gk_background(const ComplexLattice& lat, int k_plus, double scale) {
    if (k_plus < 1 || k_plus >= lat.n)
        throw ConfigError("gk: k_plus must satisfy 1 <= k_plus < n");
    if (lat.n - k_plus != 1)
        throw ConfigError("gk: shipped experiments require rank T_-^{1,0} = 1");
    GKBackground bg;
    bg.lattice = std::make_shared<ComplexLattice>(lat);
    bg.split = GKSplit{lat.n, k_plus};
    bg.g0 = flat_metric(*bg.lattice, scale);
    bg.h = flat_metric(*bg.lattice, scale);
    bg.eps_pos = positivity_floor(bg.g0);
    return bg;
}

MatrixField square_operator(const ScalarField& f, const GKSplit& split) {
    const ComplexLattice& lat = *f.lat;
    const int n = lat.n;
    MatrixField out(lat, "box f");
    for (int i = 0; i < n; ++i) {
        Field di = partial(f, i, Deriv::Holo);
        for (int j = 0; j < n; ++j) {
            if (!split.same_block(i, j)) continue;
            Field dij = partial(di, j, Deriv::Antiholo);
            const double s = split.sign(i);
            cplx* o = out.comp(i * n + j);
            parallel_for(lat.points, [&](std::ptrdiff_t p) { o[p] = s * dij.at(0, p); });
        }
    }
    hermitize(out);
    return out;
}

MatrixField chi_form(const Field& h_plus, const Field& h_minus, const GKSplit& split,
                     const ComplexLattice& lat) {
    const int n = lat.n;
    const int k = split.rank_plus(), l = split.rank_minus();
    if (h_plus.ncomp != k * k || h_minus.ncomp != l * l)
        throw UnsupportedError("chi_form: block metric component counts do not match the split");
    auto logdet = [&](const Field& h, int dim) {
        ScalarField out(lat, 1, "log det h");
        parallel_for(lat.points, [&](std::ptrdiff_t p) {
            CMat m(dim);
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b) m(a, b) = h.at(a * dim + b, p);
            const cplx d = cmat_det(m);
            if (d.real() <= 0.0)
                throw PositivityError("chi_form: block metric has nonpositive determinant");
            out.at(0, p) = std::log(d.real());
        });
        return out;
    };
    ScalarField ldp = logdet(h_plus, k);
    ScalarField ldm = logdet(h_minus, l);
    // rho(h_b)_{i jbar} = -(log det h_b)_{,i jbar}; chi takes the +/- block
    // projections with the - block signs flipped between h_+ and h_-
    MatrixField chi(lat, "chi_{i jbar}");
    for (int i = 0; i < n; ++i) {
        Field dldp = partial(ldp, i, Deriv::Holo);
        Field dldm = partial(ldm, i, Deriv::Holo);
        for (int j = 0; j < n; ++j) {
            if (!split.same_block(i, j)) continue;
            Field hp = partial(dldp, j, Deriv::Antiholo);
            Field hm = partial(dldm, j, Deriv::Antiholo);
            const double sgn = split.sign(i); // +1 on the + block, -1 on the - block
            cplx* o = chi.comp(i * n + j);
            parallel_for(lat.points, [&](std::ptrdiff_t p) {
                // chi = sgn * (rho(h+) - rho(h-)) restricted to the block
                o[p] = sgn * (-hp.at(0, p) + hm.at(0, p));
            });
        }
    }
    hermitize(chi);
    return chi;
}

MetricField gk_assemble_metric(const GKBackground& bg, const ScalarField& u, bool validate) {
    const ComplexLattice& lat = *u.lat;
    const int n = lat.n;
    MatrixField box = square_operator(u, bg.split);
    MatrixField m = bg.g0.mat;
    parallel_for(lat.points, [&](std::ptrdiff_t p) {
        for (int c = 0; c < n * n; ++c) m.at(c, p) += box.at(c, p);
    });
    MetricField g = make_metric(std::move(m), false);
    if (validate) {
        for (int sgn : {+1, -1}) {
            const double me = gk_block_min_eig(bg, g, sgn);
            if (me <= bg.eps_pos)
                throw PositivityError(std::string("gk metric block ") +
                                      (sgn > 0 ? "plus" : "minus") +
                                      " not positive: min eigenvalue " + std::to_string(me));
        }
    }
    return g;
}

double gk_block_min_eig(const GKBackground& bg, const MetricField& g, int block_sign) {
    const ComplexLattice& lat = *g.lat;
    const GKSplit& sp = bg.split;
    const int n = lat.n;
    const int lo = block_sign > 0 ? 0 : sp.k_plus;
    const int hi = block_sign > 0 ? sp.k_plus : n;
    const int dim = hi - lo;
    return block_min(lat.points, [&](std::ptrdiff_t p) {
        CMat m(dim);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) m(a, b) = g.g(lo + a, lo + b, p);
        return hermitian_min_eig(m);
    });
}

ScalarField gk_rhs(const GKState& state) {
    const ComplexLattice& lat = *state.u.lat;
    const GKBackground& bg = *state.bg;
    const GKSplit& sp = bg.split;
    const int n = lat.n;
    const MetricField& g = state.g;
    ScalarField out(lat, 1, "du/dt");
    // block determinants; h is block-diagonal so det h = det h+ det h-
    parallel_for(lat.points, [&](std::ptrdiff_t p) {
        double val = 0.0;
        for (int sgn : {+1, -1}) {
            const int lo = sgn > 0 ? 0 : sp.k_plus;
            const int hi = sgn > 0 ? sp.k_plus : n;
            const int dim = hi - lo;
            CMat gm(dim), hm(dim);
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b) {
                    gm(a, b) = g.g(lo + a, lo + b, p);
                    hm(a, b) = bg.h.g(lo + a, lo + b, p);
                }
            const double dg = cmat_det(gm).real();
            const double dh = cmat_det(hm).real();
            val += sgn * (std::log(dg) - std::log(dh));
        }
        out.at(0, p) = val;
    });
    return out;
}

GKState make_gk_state(std::shared_ptr<const GKBackground> bg, ScalarField u0, bool dealias) {
    GKState s;
    s.bg = std::move(bg);
    s.u = std::move(u0);
    if (s.u.lat && !s.u.lat->same_shape(*s.bg->lattice))
        throw ConfigError("gk potential lattice does not match background");
    s.u.lat = s.bg->lattice.get();
    s.dealias = dealias;
    s.g = gk_assemble_metric(*s.bg, s.u, true);
    return s;
}

GKState gk_step(const GKState& s, double dt) {
    auto rhs = [&](const ScalarField& u) {
        GKState tmp;
        tmp.bg = s.bg;
        tmp.u = u;
        tmp.dealias = s.dealias;
        tmp.g = gk_assemble_metric(*s.bg, u, true);
        ScalarField r = gk_rhs(tmp);
        if (s.dealias) dealias(r);
        return r;
    };
    ScalarField y = s.u;
    ScalarField k1 = rhs(s.u);
    ScalarField y2 = s.u;
    axpy(y2, 0.5 * dt, k1);
    ScalarField k2 = rhs(y2);
    ScalarField y3 = s.u;
    axpy(y3, 0.5 * dt, k2);
    ScalarField k3 = rhs(y3);
    ScalarField y4 = s.u;
    axpy(y4, dt, k3);
    ScalarField k4 = rhs(y4);
    axpy(y, dt / 6.0, k1);
    axpy(y, dt / 3.0, k2);
    axpy(y, dt / 3.0, k3);
    axpy(y, dt / 6.0, k4);
    GKState out;
    out.bg = s.bg;
    out.dealias = s.dealias;
    out.t = s.t + dt;
    out.u = std::move(y);
    out.g = gk_assemble_metric(*s.bg, out.u, true);
    return out;
}

ScalarField random_gk_potential(const ComplexLattice& lat, const GKBackground& bg, uint64_t seed,
                                double amplitude, int max_mode, int* halvings) {
    const int na = lat.axes();
    ScalarField u(lat, 1, "u0");
    // real band-limited scalar via conjugate-symmetrized Gaussian coefficients
    Field hat(lat, 1);
    SplitMix64 rng(seed ^ 0xabcdef1234567890ULL);
    std::vector<int> idx(na, -max_mode);
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
            hat.at(0, p) = cplx{re, im};
        }
        int a = na - 1;
        while (a >= 0 && idx[a] == max_mode) idx[a--] = -max_mode;
        if (a < 0) break;
        ++idx[a];
    }
    {
        Field sym = hat;
        std::vector<int> co(na);
        for (std::ptrdiff_t p = 0; p < lat.points; ++p) {
            lat.coords(p, co.data());
            std::ptrdiff_t np = 0;
            for (int a = 0; a < na; ++a)
                np = np * lat.sizes[a] + ((lat.sizes[a] - co[a]) % lat.sizes[a]);
            hat.at(0, p) = 0.5 * (sym.at(0, p) + std::conj(sym.at(0, np)));
        }
    }
    fft_all_inplace(lat, hat.comp(0), false);
    const double pts = static_cast<double>(lat.points);
    parallel_for(lat.points, [&](std::ptrdiff_t p) { u.at(0, p) = hat.at(0, p).real() * pts; });
    if (amplitude == 0.0) {
        u.fill(cplx{0.0, 0.0});
        if (halvings) *halvings = 0;
        return u;
    }
    const double s = sup_abs(u);
    if (s > 0.0) u.data = scaled(u, amplitude / s).data;
    int tries = 0;
    while (true) {
        try {
            (void)gk_assemble_metric(bg, u, true);
            break;
        } catch (const PositivityError&) {
            u.data = scaled(u, 0.5).data;
            if (++tries > 60) throw;
        }
    }
    if (halvings) *halvings = tries;
    return u;
}

} // namespace pcf
