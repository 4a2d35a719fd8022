#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrproc/tilt.hpp"

namespace rrproc {

enum class TailMethod { Naive, Tilted };

// Estimate of P(S(t) > x*sqrt(t)) with its moderate-deviations rate statistic.
struct TailEstimate {
    double t = 0.0;
    double x = 0.0;
    double p_hat = 0.0;
    double std_err = 0.0;
    uint64_t n_samples = 0;
    uint64_t hits = 0;  // samples with the event, a.k.a. effective hits
    TailMethod method = TailMethod::Naive;
    double rate = 0.0;  // -ln(p_hat) / x^2
    double lambda_star = 0.0;  // tilted method: the drift-matching tilt
};

// One renewal-reward path: pairs are drawn until tau_1+...+tau_{n+1} > t and
// X_1+...+X_n is returned. Exact lattice-time bookkeeping for discrete laws.
double simulate_S(const JointLaw& law, double t, PhiloxRng& rng);

// Empirical frequency of {S(t) > x*sqrt(t)} with binomial standard error.
TailEstimate tail_naive(const JointLaw& law, double t, double x, uint64_t n_samples, uint64_t seed,
                        unsigned threads = 1);

// Importance sampling under the drift-matched exponential tilt: lambda* solves
// tilted_drift(lambda) = x/sqrt(t); all pairs including the one straddling t
// are drawn tilted and weighted by exp(-lambda*x_i + eta*tau_i); the straddling
// reward is excluded from S(t). Unbiased for every n_samples.
// Throws when x/sqrt(t) is beyond the achievable drift of the law.
TailEstimate tail_tilted(const JointLaw& law, double t, double x, uint64_t n_samples, uint64_t seed,
                         unsigned threads = 1);

struct SchedulePoint {
    double t = 0.0;
    double x = 0.0;
    uint64_t n_samples = 0;
};

// The first-order reference curve 1/2 + ln(x*sqrt(2*pi))/x^2 that the rate
// statistic approaches from above in the moderate-deviations regime.
double mdp_reference_rate(double x);

struct MdpScanRow {
    TailEstimate estimate;
    double reference = 0.0;
};

// Tail estimates along a schedule with x increasing and x/sqrt(t) decreasing.
// The per-point rate -ln(p_hat)/x^2 is emitted next to the reference curve;
// verdicts on the scan are trend-based and belong to the caller.
std::vector<MdpScanRow> mdp_rate_scan(const JointLaw& law, std::span<const SchedulePoint> schedule,
                                      TailMethod method, uint64_t seed, unsigned threads = 1);

namespace detail {
// Exposed for tests: force the generic pair-loop even when the constant-tau
// fast path (multinomial reward counts) applies.
TailEstimate tail_estimate_impl(const JointLaw& law, double t, double x, uint64_t n_samples,
                                uint64_t seed, unsigned threads, TailMethod method,
                                bool allow_fast_path);
}  // namespace detail

}  // namespace rrproc
