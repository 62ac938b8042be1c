#ifndef PCF_DIAGNOSTICS_HPP
#define PCF_DIAGNOSTICS_HPP

#include "pcf/flow.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pcf {

// 2n x 2n generalized metric on T + T* built from the gauge-invariant pair
// (g, beta = sqrt(-1) d alpha); det W = 1 pointwise and W > 0 iff g > 0.
struct BornInfeldField {
    const ComplexLattice* lat = nullptr;
    int n = 0;
    Field w; // ncomp (2n)^2, row-major
    double det_err = 0.0; // max |det W - 1|
    double min_eig = 0.0; // min over grid of lambda_min(W)

    cplx at(int r, int c, std::ptrdiff_t p) const { return w.at(r * 2 * n + c, p); }
};

MatrixField beta_from_alpha(const VectorField& alpha); // beta = i (d alpha)
BornInfeldField born_infeld_W(const MetricField& g, const MatrixField& beta);

// Laplacian flavor appropriate to the functional's tensor type
enum class LapKind {
    ScalarPlain,     // g^{lbar k} d_k d_lbar per component (scalars, g, beta, W)
    Form20Connection // (2,0)-forms: connection terms on both holomorphic slots
};

struct StateTriple {
    FlowState prev, mid, next;
};

// (d_t F - Delta_{g(mid)} F) with a centered (nonuniform-safe) time difference
Field heat_residual(const StateTriple& tr, const std::function<Field(const FlowState&)>& F,
                    LapKind kind);

struct IdentityEntry {
    std::string name;
    double sup_residual = 0.0;
};

struct IdentityReport {
    std::vector<IdentityEntry> entries; // volumeform, trace, torsionpotential, phi_norm, gfsys_g, gfsys_beta
    double worst() const;
};

// residuals of the five evolution identities along a recorded run
IdentityReport identity_suite(const std::vector<StateTriple>& triples);

struct SubsolutionReport {
    std::vector<double> pos_lambda;  // per triple: max over grid of (lambda_max)^+ of (d_t - Delta)W
    std::vector<double> sup_w_norm;  // per triple: sup of |W| (max |entry|) for scaling
    double max_pos = 0.0;
    double max_sup_w = 0.0;
    bool sign_flipped = false; // set by the -W negative control
};

// oneform-mode runs only (the regime of the matrix subsolution statement)
SubsolutionReport subsolution_monitor(const std::vector<StateTriple>& triples,
                                      bool negate_W = false);

// one sampled row of the monitors; fixed column order per mode
struct DiagnosticsRecord {
    std::vector<double> v;
};

const std::vector<std::string>& pcf_columns();
const std::vector<std::string>& gk_columns();
int pcf_column(const std::string& name);
int gk_column(const std::string& name);

// W_heat_pos: positive part of lambda_max((d_t - Delta) W) from the triple, or
// 0 when no neighbor states / no alpha are available
struct SampleContext {
    std::vector<cplx> mean_g0; // componentwise mean of the initial metric
    int fk_max = 1;            // highest f_k column to fill
};

DiagnosticsRecord sample_pcf(const FlowState& s, double dt, const SampleContext& ctx,
                             const StateTriple* triple);

struct MonitorEntry {
    std::string name;
    double worst_violation = 0.0; // relative, per sample step
    bool pass = true;
};

struct MonotoneReport {
    std::vector<MonitorEntry> entries;
    bool all_pass = true;
};

// (a) sup tr_g h nonincreasing, (b) inf log det ratio nondecreasing,
// (c) sup |d alpha|^2 nonincreasing, (d) componentwise mean of g constant;
// GK series instead check sup|du/dt| nonincreasing.
MonotoneReport monotone_monitors(const std::vector<DiagnosticsRecord>& series, bool gk,
                                 double tol = 1e-10);

// contractions shared with the identity suite
ScalarField scalar_laplacian(const MetricField& g, const ScalarField& f);
ScalarField trace_h(const MetricField& g, const MetricField& h);           // tr_g h
ScalarField logdet_ratio(const MetricField& g, const MetricField& h);      // log det g/det h
ScalarField upsilon_norm2_h(const MetricField& g, const MetricField& h);   // |Upsilon|^2_{g^-1,g^-1,h}
ScalarField pair_hQ(const MetricField& g, const MetricField& h, const MatrixField& Q);

} // namespace pcf

#endif
