#include "pcf/run.hpp"
#include "pcf/errors.hpp"
#include "pcf/io.hpp"
#include "pcf/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>

namespace pcf {

FitResult fit_log_decay(const std::vector<DiagnosticsRecord>& series, int t_col, int col,
                        double t_lo, double t_hi) {
    FitResult fit;
    std::vector<double> ts, ys;
    for (const auto& r : series) {
        const double t = r.v[t_col];
        const double q = r.v[col];
        if (t < t_lo || t > t_hi || !(q > 0.0)) continue;
        ts.push_back(t);
        ys.push_back(std::log(q));
    }
    if (ts.size() < 3) return fit;
    const double nn = static_cast<double>(ts.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += ys[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * ys[i];
    }
    const double denom = nn * stt - st * st;
    if (denom == 0.0) return fit;
    fit.slope = (nn * sty - st * sy) / denom;
    fit.intercept = (sy - fit.slope * st) / nn;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / nn;
    for (size_t i = 0; i < ts.size(); ++i) {
        const double pred = fit.intercept + fit.slope * ts[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    fit.valid = true;
    return fit;
}

namespace {

struct PendingSample {
    FlowState prev;
    FlowState state;
    double dt;
};

DiagnosticsRecord gk_sample(const GKState& s, double dt, const std::vector<cplx>& mean_g0,
                            const ScalarField& udot) {
    DiagnosticsRecord rec;
    rec.v.assign(gk_columns().size(), 0.0);
    rec.v[0] = s.t;
    rec.v[1] = dt;
    ScalarField au(*s.u.lat, 1);
    parallel_for(s.u.points(), [&](std::ptrdiff_t p) {
        au.at(0, p) = std::abs(udot.at(0, p));
    });
    rec.v[2] = reduce(au, ReduceOp::Sup);
    rec.v[3] = reduce(udot, ReduceOp::Inf);
    rec.v[4] = reduce(s.u, ReduceOp::Sup) - reduce(s.u, ReduceOp::Inf);
    rec.v[5] = gk_block_min_eig(*s.bg, s.g, +1);
    rec.v[6] = gk_block_min_eig(*s.bg, s.g, -1);
    TorsionField T = chern_torsion(s.g);
    rec.v[7] = reduce(torsion_norm2(s.g, T), ReduceOp::Sup);
    rec.v[8] = pluriclosed_residual(s.g);
    double drift = 0.0;
    const int n = s.g.n;
    for (int c = 0; c < n * n; ++c)
        drift = std::max(drift, std::abs(field_mean(s.g.mat, c) - mean_g0[c]));
    rec.v[9] = drift;
    // Yau oscillation third hypothesis: tr_g(i ddbar u) > -lambda, recorded only
    ScalarField tr(*s.u.lat, 1);
    for (int i = 0; i < n; ++i) {
        Field di = partial(s.u, i, Deriv::Holo);
        for (int j = 0; j < n; ++j) {
            Field dij = partial(di, j, Deriv::Antiholo);
            parallel_for(s.u.points(), [&](std::ptrdiff_t p) {
                tr.at(0, p) += s.g.gi(j, i, p) * dij.at(0, p);
            });
        }
    }
    rec.v[10] = reduce(tr, ReduceOp::Inf);
    return rec;
}

} // namespace

RunResult run_flow(const RunConfig& cfg) {
    if (cfg.mode == RunMode::Gk) return run_gk_flow(cfg);
    const auto wall0 = std::chrono::steady_clock::now();
    RunResult res;

    FlowState cur;
    std::shared_ptr<FlowBackground> bg;
    if (!cfg.snapshot_path.empty()) {
        cur = flow_state_from_snapshot(read_snapshot(cfg.snapshot_path));
    } else {
        const ComplexLattice lat = cfg.make_lattice();
        bg = std::make_shared<FlowBackground>(make_torus_background(lat));
        VectorField a0 = random_pluriclosed_perturbation(*bg->lattice, bg->ghat, cfg.seed,
                                                         cfg.amplitude, cfg.max_mode,
                                                         &res.halvings);
        switch (cfg.mode) {
        case RunMode::PcfMetric: {
            MetricField g0 = metric_from_oneform(bg->ghat, a0, true, bg->eps_pos);
            cur = make_metric_state(bg, std::move(g0), cfg.normalized, cfg.dealias);
            break;
        }
        case RunMode::PcfOneform:
            cur = make_oneform_state(bg, std::move(a0), cfg.normalized, cfg.dealias);
            break;
        case RunMode::PcfSplit: {
            ScalarField f0(*bg->lattice, 1, "f");
            cur = make_split_state(bg, std::move(a0), std::move(f0), cfg.normalized,
                                   cfg.dealias);
            break;
        }
        default:
            break;
        }
    }

    SampleContext ctx;
    ctx.fk_max = cfg.fk_max;
    const int n = cur.g.n;
    ctx.mean_g0.resize(static_cast<size_t>(n) * n);
    for (int c = 0; c < n * n; ++c) ctx.mean_g0[c] = field_mean(cur.g.mat, c);

    StepControl ctrl;
    ctrl.dt_fixed = cfg.fixed_dt;
    ctrl.cfl_safety = cfg.cfl_safety;
    ctrl.integrator = cfg.integrator;

    // triple recording schedule: up to max_triples interior samples, even spread
    std::set<long> triple_steps;
    if (cfg.record_triples && cur.formulation != Formulation::Metric && cfg.t_end > 0.0) {
        const double dt0 = cfl_dt(cur.g, ctrl);
        const long approx_steps = std::max(2L, static_cast<long>(std::ceil(cfg.t_end / dt0)));
        const long nsamples = std::max(1L, approx_steps / cfg.sample_every);
        const long stride = std::max(1L, nsamples / cfg.max_triples) * cfg.sample_every;
        for (long s = stride; s + 1 < approx_steps; s += stride) triple_steps.insert(s);
    }

    std::vector<double> snapshot_times = cfg.snapshot_times;
    std::sort(snapshot_times.begin(), snapshot_times.end());
    size_t next_snap = 0;
    auto snapshot_path = [&](double t) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "snapshot_t%.6f.pcf1", t);
        return cfg.output_dir + "/" + buf;
    };
    const bool writing = !cfg.output_dir.empty();
    if (writing) std::filesystem::create_directories(cfg.output_dir);

    // initial row (W-heat column needs neighbors and is 0 on edge rows)
    res.series.push_back(sample_pcf(cur, 0.0, ctx, nullptr));
    if (writing) {
        while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= cur.t) {
            write_snapshot(snapshot_path(snapshot_times[next_snap]), cur, 1.0);
            ++next_snap;
        }
    }

    std::optional<PendingSample> pending;
    long step = 0;
    try {
        while (cur.t < cfg.t_end - 1e-14) {
            double dt = cfl_dt(cur.g, ctrl);
            dt = std::min(dt, cfg.t_end - cur.t);
            if (next_snap < snapshot_times.size())
                dt = std::min(dt, std::max(1e-12, snapshot_times[next_snap] - cur.t));
            FlowState next = flow_step(cur, ctrl, dt);
            ++step;
            if (pending) {
                StateTriple tr{std::move(pending->prev), pending->state, next};
                DiagnosticsRecord rec = sample_pcf(pending->state, pending->dt, ctx, &tr);
                res.series.push_back(std::move(rec));
                if (triple_steps.count(step - 1) && tr.mid.formulation != Formulation::Metric)
                    res.triples.push_back(std::move(tr));
                pending.reset();
            }
            const bool final_step = next.t >= cfg.t_end - 1e-14;
            const bool is_sample = (step % cfg.sample_every) == 0;
            if (final_step) {
                // the final state is always sampled; no next neighbor exists so
                // the W-heat column is 0 on this row
                res.series.push_back(sample_pcf(next, dt, ctx, nullptr));
            } else if (is_sample) {
                pending = PendingSample{cur, next, dt};
            }
            cur = std::move(next);
            if (writing) {
                while (next_snap < snapshot_times.size() &&
                       snapshot_times[next_snap] <= cur.t + 1e-12) {
                    write_snapshot(snapshot_path(snapshot_times[next_snap]), cur, 1.0);
                    ++next_snap;
                }
            }
        }
    } catch (const PositivityError& e) {
        res.aborted = true;
        res.abort_reason = e.what();
        res.abort_time = cur.t;
    }
    res.t_final = cur.t;
    res.steps = step;
    res.final_state = cur;

    // decay fits over the final half of the run
    const double t_lo = 0.5 * res.t_final;
    res.fits["sup_T2"] =
        fit_log_decay(res.series, pcf_column("t"), pcf_column("sup_T2"), t_lo, res.t_final);
    res.fits["sup_dalpha2"] = fit_log_decay(res.series, pcf_column("t"),
                                            pcf_column("sup_dalpha2"), t_lo, res.t_final);
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    if (writing) write_run_outputs(cfg, res);
    return res;
}

RunResult run_gk_flow(const RunConfig& cfg) {
    const auto wall0 = std::chrono::steady_clock::now();
    RunResult res;
    GKState cur;
    if (!cfg.snapshot_path.empty()) {
        cur = gk_state_from_snapshot(read_snapshot(cfg.snapshot_path));
    } else {
        const ComplexLattice lat = cfg.make_lattice();
        auto bg = std::make_shared<GKBackground>(make_gk_background(lat, cfg.k_plus));
        ScalarField u0 = random_gk_potential(*bg->lattice, *bg, cfg.seed, cfg.amplitude,
                                             cfg.max_mode, &res.halvings);
        cur = make_gk_state(bg, std::move(u0), cfg.dealias);
    }
    const int n = cur.g.n;
    std::vector<cplx> mean_g0(static_cast<size_t>(n) * n);
    for (int c = 0; c < n * n; ++c) mean_g0[c] = field_mean(cur.g.mat, c);

    StepControl ctrl;
    ctrl.dt_fixed = cfg.fixed_dt;
    ctrl.cfl_safety = cfg.cfl_safety;

    const bool writing = !cfg.output_dir.empty();
    if (writing) std::filesystem::create_directories(cfg.output_dir);

    res.series.push_back(gk_sample(cur, 0.0, mean_g0, gk_rhs(cur)));
    long step = 0;
    try {
        while (cur.t < cfg.t_end - 1e-14) {
            double dt = cfl_dt(cur.g, ctrl);
            dt = std::min(dt, cfg.t_end - cur.t);
            cur = gk_step(cur, dt);
            ++step;
            const bool final_step = cur.t >= cfg.t_end - 1e-14;
            if (final_step || (step % cfg.sample_every) == 0)
                res.series.push_back(gk_sample(cur, dt, mean_g0, gk_rhs(cur)));
        }
    } catch (const PositivityError& e) {
        res.aborted = true;
        res.abort_reason = e.what();
        res.abort_time = cur.t;
    }
    res.t_final = cur.t;
    res.steps = step;
    res.final_gk = cur;
    res.fits["sup_udot"] = fit_log_decay(res.series, gk_column("t"), gk_column("sup_udot"),
                                         0.5 * res.t_final, res.t_final);
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    if (writing) {
        write_text_atomic(cfg.output_dir + "/series.csv", series_csv(res.series, gk_columns()));
        write_text_atomic(cfg.output_dir + "/effective.cfg", render_config(cfg));
        if (res.final_gk)
            write_gk_snapshot(cfg.output_dir + "/final.pcf1", *res.final_gk, 1.0);
        nlohmann::json j;
        j["mode"] = mode_name(cfg.mode);
        j["t_final"] = res.t_final;
        j["steps"] = res.steps;
        j["aborted"] = res.aborted;
        j["abort_reason"] = res.abort_reason;
        j["halvings"] = res.halvings;
        j["wall_seconds"] = res.wall_seconds;
        for (const auto& [name, fit] : res.fits) {
            j["fits"][name] = {{"slope", fit.slope},
                               {"intercept", fit.intercept},
                               {"r2", fit.r2},
                               {"valid", fit.valid}};
        }
        write_text_atomic(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
    }
    return res;
}

void write_run_outputs(const RunConfig& cfg, const RunResult& res) {
    write_text_atomic(cfg.output_dir + "/series.csv", series_csv(res.series, pcf_columns()));
    write_text_atomic(cfg.output_dir + "/effective.cfg", render_config(cfg));
    if (res.final_state)
        write_snapshot(cfg.output_dir + "/final.pcf1", *res.final_state, 1.0);
    nlohmann::json j;
    j["mode"] = mode_name(cfg.mode);
    j["t_final"] = res.t_final;
    j["steps"] = res.steps;
    j["aborted"] = res.aborted;
    j["abort_reason"] = res.abort_reason;
    j["abort_time"] = res.abort_time;
    j["halvings"] = res.halvings;
    j["wall_seconds"] = res.wall_seconds;
    for (const auto& [name, fit] : res.fits) {
        j["fits"][name] = {{"slope", fit.slope},
                           {"intercept", fit.intercept},
                           {"r2", fit.r2},
                           {"valid", fit.valid}};
    }
    write_text_atomic(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
}

} // namespace pcf
