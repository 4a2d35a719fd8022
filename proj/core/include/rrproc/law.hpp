#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rrproc/rational.hpp"
#include "rrproc/rng.hpp"

namespace rrproc {

// One atom of a discrete joint law of the inter-arrival/reward pair (tau, x).
// tau is kept as an exact rational so lattice spans stay exact.
struct Atom {
    Rational tau;
    double x = 0.0;
    double p = 0.0;
};

enum class LawKind { Discrete, Parametric };
enum class ParametricFamily { ScaledSqrt, CustomSampler };
enum class TauFamily { Exponential, Uniform };

// X = a*sqrt(tau) + b with tau drawn from a named positive continuous law.
struct ScaledSqrtParams {
    TauFamily tau_family = TauFamily::Exponential;
    double rate = 1.0;  // exponential
    double lo = 0.0;    // uniform
    double hi = 0.0;
    double a = 1.0;
    double b = 0.0;
};

// Escape hatch for continuous pairs without a built-in closed form. Moments
// and integrability flags are declared by the caller, not derived.
struct CustomSamplerLaw {
    std::function<std::pair<double, double>(PhiloxRng&)> sample;
    double mean_tau = 1.0;
    double mean_x = 0.0;
    double var_x = 1.0;
    bool sq_exp_moment = false;    // E exp(eps*X^2 - tau) < inf for some eps > 0
    bool all_lambda_moment = false;  // E exp(lambda*X - eps*tau) < inf for all lambda, eps
};

// Integrability conditions reported as analytic flags: they are automatic for
// finite-support laws and hand-verified in the descriptors of the built-in
// continuous families. They are not something samples can decide.
struct ConditionFlags {
    bool sq_exp_moment = false;
    bool all_lambda_moment = false;
};

struct MomentReport {
    double mean_tau = 0.0;
    double mean_x = 0.0;
    double var_x = 0.0;
    bool standardized = false;  // |EX| <= 1e-12, |EX^2 - 1| <= 1e-12, |Etau - 1| <= 1e-12
    ConditionFlags condition_flags;
};

// Finite measure on positive rational locations (a tau-marginal, tilted or not).
struct DiscreteMeasure {
    std::vector<Rational> locations;  // ascending, unique
    std::vector<double> masses;

    // Largest delta with all locations on {delta, 2*delta, ...}.
    Rational span() const;
    double mean() const;
    double total() const;
    // P(location > locations-up-to t), as an exact partial sum from the top.
    double tail_above(const Rational& t) const;
    // Masses regridded onto {0, delta, ..., max_index*delta}; throws when a
    // location falls off the lattice.
    std::vector<double> on_lattice(const Rational& delta, size_t max_index) const;
};

// Immutable joint law of the pair (tau, X). Thread-safe for concurrent reads;
// all sampling goes through an explicitly passed PhiloxRng.
class JointLaw {
  public:
    JointLaw() = default;  // empty placeholder; use the factories below

    static JointLaw discrete(std::vector<Atom> atoms);
    static JointLaw scaled_sqrt(ScaledSqrtParams params);
    static JointLaw custom(CustomSamplerLaw sampler);

    LawKind kind() const { return kind_; }
    ParametricFamily family() const { return family_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const ScaledSqrtParams& scaled_sqrt_params() const { return scaled_sqrt_; }
    const CustomSamplerLaw& custom_law() const { return custom_; }

    bool is_lattice() const { return kind_ == LawKind::Discrete; }
    double min_tau() const;

    DiscreteMeasure tau_marginal() const;

  private:
    LawKind kind_ = LawKind::Discrete;
    ParametricFamily family_ = ParametricFamily::ScaledSqrt;
    std::vector<Atom> atoms_;
    ScaledSqrtParams scaled_sqrt_;
    CustomSamplerLaw custom_;
    AliasSampler alias_;
    std::vector<double> tau_dbl_;  // per-atom tau as double, for sampling

    friend std::pair<double, double> sample_pair(const JointLaw&, PhiloxRng&);
};

// Exact moments for discrete laws (rational arithmetic on dyadic p, x);
// closed forms for the built-in continuous families.
MomentReport validate(const JointLaw& law);

// Rescales tau to mean one and maps X affinely to mean zero, variance one.
// Rational arithmetic is used whenever the scale factors are exactly rational.
JointLaw standardize(const JointLaw& law);

// Exact gcd span of the tau-marginal; zero for continuous parametric laws.
Rational span(const JointLaw& law);

// One i.i.d. draw of the pair. Deterministic given the rng state.
std::pair<double, double> sample_pair(const JointLaw& law, PhiloxRng& rng);

// Law specification files: UTF-8 JSON, either
//   {"kind":"discrete","atoms":[{"tau":"3/2","x":-1.0,"p":0.5},...]}
// with tau as a rational string, or
//   {"kind":"parametric","family":"scaled-sqrt","params":{...}}.
JointLaw law_from_json_text(const std::string& text);
std::string law_to_json_text(const JointLaw& law);
JointLaw load_law_file(const std::string& path);

}  // namespace rrproc
