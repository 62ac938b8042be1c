#ifndef PCF_RUN_HPP
#define PCF_RUN_HPP

#include "pcf/config.hpp"
#include "pcf/diagnostics.hpp"
#include "pcf/gk.hpp"

#include <map>
#include <optional>

namespace pcf {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool valid = false;
};

// least-squares fit of log(series[col]) against t over [t_lo, t_hi]
FitResult fit_log_decay(const std::vector<DiagnosticsRecord>& series, int t_col, int col,
                        double t_lo, double t_hi);

struct RunResult {
    bool aborted = false;
    std::string abort_reason;
    double abort_time = 0.0;
    double t_final = 0.0;
    long steps = 0;
    int halvings = 0;
    double wall_seconds = 0.0;

    std::vector<DiagnosticsRecord> series;
    std::vector<StateTriple> triples; // pcf modes with alpha, when recorded
    std::map<std::string, FitResult> fits;

    std::optional<FlowState> final_state;
    std::optional<GKState> final_gk;
};

// Advances the configured flow, sampling monitors every sample_every steps,
// writing series.csv / snapshots / summary.json / the effective config to
// output.dir when set.  Dispatches on cfg.mode.
RunResult run_flow(const RunConfig& cfg);
RunResult run_gk_flow(const RunConfig& cfg);

void write_run_outputs(const RunConfig& cfg, const RunResult& res);

} // namespace pcf

#endif
