#pragma once

// The shared law suite for unit and integration tests. Every law here has
// E X = 0 exactly; the standardized subset also has E tau = 1 and E X^2 = 1.

#include <string>
#include <vector>

#include "rrproc/law.hpp"

namespace suite {

using rrproc::Atom;
using rrproc::JointLaw;
using rrproc::Rational;

struct NamedLaw {
    std::string name;
    JointLaw law;
};

// tau == 1, X = +-1 fair coin.
inline JointLaw rademacher() {
    return JointLaw::discrete({{Rational(1), 1.0, 0.5}, {Rational(1), -1.0, 0.5}});
}

// tau uniform on {1,2}, X = +-1 independent of tau.
inline JointLaw uniform12_pm1() {
    return JointLaw::discrete({{Rational(1), 1.0, 0.25},
                               {Rational(1), -1.0, 0.25},
                               {Rational(2), 1.0, 0.25},
                               {Rational(2), -1.0, 0.25}});
}

// Standardized variant: tau on {2/3, 4/3}.
inline JointLaw uniform12_pm1_std() {
    return JointLaw::discrete({{Rational(2, 3), 1.0, 0.25},
                               {Rational(2, 3), -1.0, 0.25},
                               {Rational(4, 3), 1.0, 0.25},
                               {Rational(4, 3), -1.0, 0.25}});
}

// Correlated X = f(tau) with f = (1, -1, 1) on tau = (1/2, 1, 3/2); chosen so
// that E[X tau] = 0 and E X^3 = 0 while X is still a function of tau.
inline JointLaw correlated_three_atom() {
    return JointLaw::discrete({{Rational(1, 2), 1.0, 0.25},
                               {Rational(1), -1.0, 0.5},
                               {Rational(3, 2), 1.0, 0.25}});
}

// tau in {1,4} rescaled to mean one with X the centered/scaled sqrt(tau):
// standardized but skew-correlated (E[X tau] = 3/5).
inline JointLaw sqrt_skew() {
    return JointLaw::discrete({{Rational(2, 5), -1.0, 0.5}, {Rational(8, 5), 1.0, 0.5}});
}

// Geometric(1/2) tau on {1, ..., K} with the residual tail mass folded into
// the last atom (so probabilities sum to one exactly); X = +-1 independent.
inline JointLaw geometric_sym(int K = 40) {
    std::vector<Atom> atoms;
    double p = 0.5;
    for (int k = 1; k < K; ++k) {
        atoms.push_back({Rational(k), 1.0, 0.5 * p});
        atoms.push_back({Rational(k), -1.0, 0.5 * p});
        p *= 0.5;
    }
    atoms.push_back({Rational(K), 1.0, p});  // each sign carries half the residual tail
    atoms.push_back({Rational(K), -1.0, p});
    return JointLaw::discrete(atoms);
}

// tau == 1 with a three-point reward {-2, 0, 2}; standardized.
inline JointLaw three_point_reward() {
    return JointLaw::discrete(
        {{Rational(1), -2.0, 0.125}, {Rational(1), 0.0, 0.75}, {Rational(1), 2.0, 0.125}});
}

// Span 1/3 lattice with an asymmetric tau law, X = +-1 independent.
inline JointLaw lattice_third() {
    return JointLaw::discrete({{Rational(1, 3), 1.0, 0.25},
                               {Rational(1, 3), -1.0, 0.25},
                               {Rational(2, 3), 1.0, 0.125},
                               {Rational(2, 3), -1.0, 0.125},
                               {Rational(1), 1.0, 0.125},
                               {Rational(1), -1.0, 0.125}});
}

// Deterministic correlated rewards on an asymmetric tau law (not standardized).
inline JointLaw correlated_heavy() {
    double u = 0.5773502691896258;  // 1/sqrt(3)
    return JointLaw::discrete({{Rational(1), u, 0.75}, {Rational(3), -3.0 * u, 0.25}});
}

// tau == 1 with X = +-2: large eta at lambda = 3, stresses the rescaled
// recursion (E exp(lambda S(t)) overflows a double near t = 140).
inline JointLaw wide_reward() {
    return JointLaw::discrete({{Rational(1), 2.0, 0.5}, {Rational(1), -2.0, 0.5}});
}

// Lattice laws with E X = 0 for the two-route identity sweep.
inline std::vector<NamedLaw> identity_suite() {
    return {
        {"rademacher", rademacher()},
        {"uniform12_pm1", uniform12_pm1()},
        {"uniform12_pm1_std", uniform12_pm1_std()},
        {"correlated_three_atom", correlated_three_atom()},
        {"sqrt_skew", sqrt_skew()},
        {"geometric_sym", geometric_sym()},
        {"geometric_sym_std", standardize(geometric_sym())},
        {"three_point_reward", three_point_reward()},
        {"lattice_third", lattice_third()},
        {"correlated_heavy", correlated_heavy()},
        {"wide_reward", wide_reward()},
    };
}

// Standardized lattice laws whose third-order term E X^3/6 - a E[X tau] is
// zero, so the fixed small-lambda tolerances are dominated by O(lambda^2).
inline std::vector<NamedLaw> standardized_suite() {
    return {
        {"rademacher", rademacher()},
        {"uniform12_pm1_std", uniform12_pm1_std()},
        {"correlated_three_atom", correlated_three_atom()},
        {"geometric_sym_std", standardize(geometric_sym())},
        {"three_point_reward", three_point_reward()},
        {"lattice_third_std", standardize(lattice_third())},
    };
}

// Standardized scaled-sqrt law over exponential(1) tau (continuous).
inline JointLaw scaled_sqrt_exp_std() {
    return standardize(JointLaw::scaled_sqrt({rrproc::TauFamily::Exponential, 1.0, 0, 0, 1.0, 0.0}));
}

}  // namespace suite
