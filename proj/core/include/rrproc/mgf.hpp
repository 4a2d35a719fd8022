#pragma once

#include <span>
#include <vector>

#include "rrproc/renewal.hpp"

namespace rrproc {

// E exp(lambda*S(t)) on the span lattice, computed two independent ways:
//   direct: dynamic program over the base law,
//   tilted: exp(eta*t) * (U_tilted * h)(t) through the renewal measure.
// The two agree identically in exact arithmetic; their numerical gap is the
// module's central oracle pair.
struct MGFSeries {
    double lambda = 0.0;
    double eta = 0.0;
    Rational delta;
    std::vector<double> log_direct;   // ln E exp(lambda*S(n*delta)), always finite
    std::vector<double> direct;       // exp of the above; +inf past the double range
    std::vector<double> tilted;       // tilted route, same convention
    std::vector<double> log_tilted;
    std::vector<double> normalized;   // exp(-eta*t) * direct
    double limit = 0.0;               // large-t limit of the normalized series

    double max_relative_gap() const;  // max over the grid of |direct/tilted - 1|
};

// ln E exp(lambda*S(n*delta)) for n = 0..n_max by the renewal dynamic program
// m(t) = P(tau > t) + sum_s w(s) m(t-s), w(s) = sum_{tau_i = s} p_i e^{lambda x_i}.
// Internally rescaled blockwise so large lambda*t cannot overflow; does not
// touch the tilt machinery.
std::vector<double> mgf_direct_log(const JointLaw& law, double lambda, size_t n_max);

// Convenience wrapper returning E exp(lambda*S(n*delta)) itself (+inf on overflow).
std::vector<double> mgf_direct(const JointLaw& law, double lambda, size_t n_max);

// Tilted route values exp(eta*t) * (U*h)(t) for n = 0..n_max.
std::vector<double> mgf_tilted(const JointLaw& law, const TiltResult& tilt, size_t n_max);

// Both routes plus the normalized series and its limit.
MGFSeries mgf_series(const JointLaw& law, double lambda, size_t n_max, double tol = 1e-12);

// delta * lambda_{mu_tilted} * sum_k h(k*delta): the large-t limit of
// exp(-eta*t) E exp(lambda*S(t)). Strictly positive (h(0) = 1).
double asymptotic_constant(const JointLaw& law, const TiltResult& tilt);

// sup over the lambda/t grid of |ln E exp(lambda*S(t)) - eta*t|, the finite-t
// witness of the uniform boundedness of the normalized log-MGF.
struct UniformityStatistic {
    double sup = 0.0;
    double argmax_lambda = 0.0;
    size_t argmax_step = 0;
    std::vector<double> sup_per_step;  // sup over lambda at each lattice point
};
UniformityStatistic uniformity_statistic(const JointLaw& law, std::span<const double> lambdas,
                                         size_t n_max, double tol = 1e-12);

// Least-squares coefficient c in |ln(normalized/limit)| ~ c/t over the tail of
// the series; reported as a witness of the O(1/t) error term, never asserted.
double convergence_rate_fit(const MGFSeries& series);

}  // namespace rrproc
