#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rrproc/law.hpp"

namespace rrproc {

// Solution of the tilting equation E exp(lambda*X - eta*tau) = 1.
//
// For discrete laws the tilted pair law and tau-marginal are materialized as
// exact atom-by-atom reweightings q_i = p_i * exp(lambda*x_i - eta*tau_i).
// For the continuous built-in families only (lambda, eta) and the base law are
// kept; tilted quantities are evaluated through their closed-form densities.
struct TiltResult {
    double lambda = 0.0;
    double eta = 0.0;
    JointLaw base;
    std::vector<double> weights;   // discrete kind: tilted pair probabilities, sum forced to 1
    DiscreteMeasure tau_marginal;  // discrete kind: mu_lambda, same support as the base marginal
};

// Residual-of-the-MGF surface h on a lattice: h(k*delta) = exp(-eta*k*delta) * P(tau > k*delta),
// the function whose renewal convolution against the tilted marginal
// reproduces exp(-eta*t) * E exp(lambda*S(t)).
struct HFunction {
    double lambda = 0.0;
    double eta = 0.0;
    Rational delta;               // zero for non-lattice evaluators
    std::vector<double> values;   // lattice case: h at k*delta, k = 0..K
    std::function<double(double)> eval;  // defined in both cases
};

// Mean of the tilt weight, E exp(lambda*X - eta*tau). Strictly decreasing in
// eta. Discrete laws are summed exactly (log-space when needed); the built-in
// continuous families go through adaptive quadrature.
double exp_tilt_mean(const JointLaw& law, double lambda, double eta);

// d/d_eta of exp_tilt_mean: -E[tau * exp(lambda*X - eta*tau)].
double exp_tilt_mean_deta(const JointLaw& law, double lambda, double eta);

// Unique eta >= 0 with |E exp(lambda*X - eta*tau) - 1| <= tol, by bracketed
// bisection plus a Newton polish. lambda = 0 short-circuits to eta = 0.
// Requires E X = 0 (otherwise the root may not exist and the bracket search
// reports failure).
TiltResult solve_eta(const JointLaw& law, double lambda, double tol = 1e-12);

// The tilted pair as a law of its own (discrete kind only).
JointLaw tilted_pair_law(const TiltResult& tilt);

// h on the first max_index+1 lattice points (discrete base), or a pointwise
// evaluator for the continuous families.
HFunction h_function(const TiltResult& tilt, size_t max_index);

// Per-lambda tilt solutions; ratio = eta / (lambda^2/2) and the tilted drift
// are reported alongside for small-lambda diagnostics.
struct EtaCurvePoint {
    double lambda = 0.0;
    double eta = 0.0;
    double ratio = 0.0;  // at lambda = 0: the analytic limit var(X)/E(tau)
    double drift = 0.0;
};
std::vector<EtaCurvePoint> eta_curve(const JointLaw& law, std::span<const double> lambdas,
                                     double tol = 1e-12);

// Rows of (lambda, (E exp(lambda*X - a*lambda^2*tau) - 1)/lambda^2); the values
// approach 1/2 - a as lambda -> 0 for standardized laws.
struct SmallLambdaRow {
    double lambda = 0.0;
    double value = 0.0;
};
std::vector<SmallLambdaRow> small_lambda_limit_check(const JointLaw& law, double a,
                                                     std::span<const double> lambdas);

// E_tilted[X] / E_tilted[tau]; equals d(eta)/d(lambda) and is the drift used
// to pick the importance-sampling tilt.
double tilted_drift(const TiltResult& tilt);

}  // namespace rrproc
