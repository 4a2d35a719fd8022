#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rrproc/law.hpp"
#include "rrproc/tilt.hpp"

namespace rrproc {

// Renewal measure of a lattice probability measure: delta and the point
// masses U({n*delta}) for n = 0..N. masses[0] is the atom at the origin.
struct RenewalTable {
    Rational delta;
    std::vector<double> masses;
    double inv_mean = 0.0;  // 1 / integral of t d(mu), the Blackwell limit per unit length

    // U([a*delta, (a+b)*delta)) as a sum of point masses.
    double interval(size_t a, size_t b) const;
    // U([0, k*delta)) = sum of masses[0..k-1].
    double cumulative_below(size_t k) const;
};

enum class ConvolvePolicy { Auto, Recursion, Fft };

// Point masses by the forward recursion u_0 = 1, u_n = sum_k mu_k u_{n-k}
// (or an FFT power-series inversion for long grids; both give the same table
// to ~1e-12). The measure must be a probability measure on (0, inf) supported
// on the delta-lattice.
RenewalTable renewal_table(const DiscreteMeasure& tau_marginal, const Rational& delta, size_t n_max,
                           ConvolvePolicy policy = ConvolvePolicy::Auto);

// Checks U((u, u+v]) <= U([0, v)) on randomly drawn lattice pairs.
struct InequalityCheck {
    bool ok = true;
    uint64_t trials = 0;
    // witness of the first violation, in lattice steps
    size_t witness_u = 0, witness_v = 0;
    double lhs = 0.0, rhs = 0.0;
};
InequalityCheck renewal_inequality_check(const RenewalTable& table, uint64_t trials, uint64_t seed);

// A family of lattice measures of one common span (e.g. tilted marginals over
// a lambda-grid). Mixed spans are rejected.
struct LawFamily {
    std::vector<DiscreteMeasure> members;
    Rational span;
};
LawFamily make_family(std::vector<DiscreteMeasure> members);
// Tilted tau-marginals of one base law over a lambda grid.
LawFamily tilt_family(const JointLaw& law, std::span<const double> lambdas, double tol = 1e-12);

// For each u in u_steps: sup over the family of |U_mu([u, u+v)) - v*lambda_mu|,
// with u, v measured in lattice steps.
struct BlackwellGapPoint {
    size_t u_steps = 0;
    double sup_gap = 0.0;
};
std::vector<BlackwellGapPoint> blackwell_gap(const LawFamily& family, size_t v_steps,
                                             std::span<const size_t> u_steps, size_t n_max,
                                             ConvolvePolicy policy = ConvolvePolicy::Auto);

// (U*h)(n*delta) together with its key-renewal limit delta * lambda_mu * sum_k h(k*delta).
struct ConvolveResult {
    double value = 0.0;
    double limit = 0.0;
};
ConvolveResult key_renewal_convolve(const RenewalTable& table, const HFunction& h, size_t n);

// One member of a family checked for uniform direct Riemann integrability.
// Monotone nonincreasing members take the fast path (value at 0 plus integral
// tails); general members are bracketed by sampled sup/inf envelopes.
struct DRIFunction {
    std::function<double(double)> f;
    bool monotone_nonincreasing = false;
    std::string name;
};

struct DRIReport {
    double sup_block_sum = 0.0;                              // sup_h sum_n sup_{[n,n+1)} |h|
    std::vector<std::pair<double, double>> tail_curve;       // (N, sup_h tail beyond N)
    std::vector<std::pair<double, double>> riemann_gap_curve;  // (delta, sup_h upper-lower gap)
};
DRIReport dri_check(const std::vector<DRIFunction>& family, std::span<const double> delta_grid,
                    std::span<const double> n_grid, double t_max,
                    size_t envelope_samples_per_block = 64);

// Lattice renewal tables of the round-down / round-up discretizations of a
// continuous (or treated-as-continuous) tau law. Cumulative renewal functions
// satisfy round_down >= exact >= round_up, which brackets interval measures:
//   U([u,u+v))  in  [ up.cum(u+v) - down.cum(u),  down.cum(u+v) - up.cum(u) ].
// The round-down table may carry an atom at the origin (tau < delta), in which
// case masses[0] = 1/(1 - mu({0})) > 1.
struct RenewalBracket {
    RenewalTable round_down;
    RenewalTable round_up;

    // Bounds for U([u, u+v)) with u = a*delta, v = b*delta.
    std::pair<double, double> interval_bounds(size_t a, size_t b) const;
};
RenewalBracket nonlattice_bracket(const JointLaw& law, const Rational& delta, double horizon);

}  // namespace rrproc
