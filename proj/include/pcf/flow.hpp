#ifndef PCF_FLOW_HPP
#define PCF_FLOW_HPP

#include "pcf/hermitian.hpp"

#include <memory>
#include <string>

namespace pcf {

enum class Formulation { Metric, OneForm, Split };
enum class Integrator { RK4, Euler };

// torus background: ghat and h flat constant, mu = 0, so ghat_t = ghat_0.
// Owns the lattice; every field of every state built from this background
// points at *lattice.
struct FlowBackground {
    std::shared_ptr<const ComplexLattice> lattice;
    MetricField ghat;
    MetricField h;
    double eps_pos = 0.0; // positivity floor, 1e-6 * mean eigenvalue of ghat
};

struct FlowState {
    double t = 0.0;
    Formulation formulation = Formulation::OneForm;
    bool normalized = false;
    bool dealias = true;
    std::shared_ptr<const FlowBackground> bg;

    MetricField g;          // always materialized
    VectorField alpha;      // oneform mode
    VectorField beta_split; // split mode
    ScalarField f_split;    // split mode
};

struct StepControl {
    double dt_fixed = 0.0; // 0 => CFL-adaptive
    double cfl_safety = 0.1;
    Integrator integrator = Integrator::RK4;
};

FlowBackground make_torus_background(const ComplexLattice& lat, double scale = 1.0);

FlowState make_metric_state(std::shared_ptr<const FlowBackground> bg, MetricField g0,
                            bool normalized = false, bool dealias = true);
FlowState make_oneform_state(std::shared_ptr<const FlowBackground> bg, VectorField alpha0,
                             bool normalized = false, bool dealias = true);
FlowState make_split_state(std::shared_ptr<const FlowBackground> bg, VectorField beta0,
                           ScalarField f0, bool normalized = false, bool dealias = true);

// d_t g = -S + Q (minus g when normalized)
MatrixField pcf_metric_rhs(const MetricField& g, bool normalized, bool do_dealias);

// Psi_i = g_a^{qbar p}[ alpha_{i,p qbar} - (alpha_{p,qbar i} + alpha_{qbar,p i})/2 ]
// (background derivative terms vanish for the flat constant ghat, h, mu = 0)
VectorField reduced_oneform_rhs(const VectorField& alpha, const FlowState& state, bool do_dealias);

// beta_t = Delta_g beta - T_g o dbar beta           (background torsion = 0)
// f_t    = Delta_g f + (tr_g ghat + log det g/det h)/2 + n/2
// The displayed unit coefficients on tr and logdet fail the Kahler reduction;
// the 1/2 factors restore exact agreement of the induced metric flow with the
// one-form flow, and the n/2 constant (pure gauge) keeps the flat fixed point
// at f_t = n.
void split_system_rhs(const VectorField& beta, const ScalarField& f, const FlowState& state,
                      VectorField& dbeta, ScalarField& df, bool do_dealias);

// dt = cfl_safety * h_min^2 / (n * sup lambda_max(g^{-1})), or dt_fixed
double cfl_dt(const MetricField& g, const StepControl& ctrl);

// one explicit step of the active formulation; revalidates positivity
FlowState flow_step(const FlowState& s, const StepControl& ctrl, double dt);

// deterministic band-limited (1,0)-form; rescales by halving until the
// induced metric is positive, reporting the number of halvings
VectorField random_pluriclosed_perturbation(const ComplexLattice& lat, const MetricField& ghat,
                                            uint64_t seed, double amplitude, int max_mode,
                                            int* halvings = nullptr);

} // namespace pcf

#endif
