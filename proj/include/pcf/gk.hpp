#ifndef PCF_GK_HPP
#define PCF_GK_HPP

#include "pcf/hermitian.hpp"

#include <memory>

namespace pcf {

// Product splitting of a combined lattice: the first k_plus complex axes form
// the + factor, the rest the - factor.  The sign of the - block lives here and
// nowhere else.
struct GKSplit {
    int n = 0;
    int k_plus = 0;
    int sign(int complex_index) const { return complex_index < k_plus ? +1 : -1; }
    bool same_block(int i, int j) const { return (i < k_plus) == (j < k_plus); }
    int rank_plus() const { return k_plus; }
    int rank_minus() const { return n - k_plus; }
};

struct GKBackground {
    std::shared_ptr<const ComplexLattice> lattice;
    GKSplit split;
    MetricField g0; // block-diagonal background metric (flat in shipped runs)
    MetricField h;  // block-diagonal flat reference
    double eps_pos = 0.0;
};

struct GKState {
    double t = 0.0;
    bool dealias = true;
    std::shared_ptr<const GKBackground> bg;
    ScalarField u;
    MetricField g; // assembled block-diagonal g^u (recomputed from u)
};

GKBackground make_gk_background(const ComplexLattice& lat, int k_plus, double scale = 1.0);

// box f = sqrt(-1)(d+ dbar+ - d- dbar-) f as (1,1) coefficients: +Hessian on
// the + block, -Hessian on the - block, mixed blocks zero
MatrixField square_operator(const ScalarField& f, const GKSplit& split);

// chi(h+-) = rho^+(h_+) - rho^-(h_+) + rho^-(h_-) - rho^+(h_-); h_± are
// Hermitian metrics on det T^{1,0}_± passed as block matrix fields (k x k and
// l x l components over the combined lattice)
MatrixField chi_form(const Field& h_plus, const Field& h_minus, const GKSplit& split,
                     const ComplexLattice& lat);

// assembled metric g^u = g0 + box u restricted to blocks; throws
// PositivityError naming the failing block
MetricField gk_assemble_metric(const GKBackground& bg, const ScalarField& u, bool validate = true);

// du/dt = log( det g+^u det h- / (det h+ det g-^u) )
ScalarField gk_rhs(const GKState& state);

GKState make_gk_state(std::shared_ptr<const GKBackground> bg, ScalarField u0, bool dealias = true);
GKState gk_step(const GKState& s, double dt);

// min over blocks of the pointwise minimal block eigenvalue
double gk_block_min_eig(const GKBackground& bg, const MetricField& g, int block_sign);

// deterministic real band-limited u0, rescaled by halving until both blocks
// are positive
ScalarField random_gk_potential(const ComplexLattice& lat, const GKBackground& bg, uint64_t seed,
                                double amplitude, int max_mode, int* halvings = nullptr);

} // namespace pcf

#endif
