#include "rrproc/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rrproc/summation.hpp"

namespace rrproc {

namespace {

constexpr double kQuadTol = 1e-13;

double reward_of_tau(const ScaledSqrtParams& p, double t) { return p.a * std::sqrt(t) + p.b; }

// Integral of factor(t) * exp(expo(t)) against the tau density of a
// scaled-sqrt law. The density's own exponent is folded into the same exp so
// the integrand can never reach inf * 0 at extreme quadrature nodes.
template <class ExpoF, class FactorF>
double integrate_tilt(const ScaledSqrtParams& p, ExpoF&& expo, FactorF&& factor) {
    switch (p.tau_family) {
        case TauFamily::Exponential: {
            static thread_local boost::math::quadrature::exp_sinh<double> integrator;
            double rate = p.rate;
            return integrator.integrate(
                [&](double t) { return factor(t) * rate * std::exp(expo(t) - rate * t); },
                kQuadTol);
        }
        case TauFamily::Uniform: {
            static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
            double inv_len = 1.0 / (p.hi - p.lo);
            return integrator.integrate(
                [&](double t) { return factor(t) * inv_len * std::exp(expo(t)); }, p.lo, p.hi,
                kQuadTol);
        }
    }
    throw std::logic_error("unreachable");
}

struct UnitFactor {
    double operator()(double) const { return 1.0; }
};

// log E exp(lambda*X - eta*tau) for a discrete law, overflow-safe.
double log_exp_tilt_mean_discrete(const std::vector<Atom>& atoms, double lambda, double eta) {
    double emax = -std::numeric_limits<double>::infinity();
    for (const Atom& a : atoms) {
        if (a.p == 0.0) continue;
        emax = std::max(emax, lambda * a.x - eta * to_double(a.tau));
    }
    Kahan acc;
    for (const Atom& a : atoms) {
        if (a.p == 0.0) continue;
        acc.add(a.p * std::exp(lambda * a.x - eta * to_double(a.tau) - emax));
    }
    return emax + std::log(acc.value());
}

double exp_tilt_mean_parametric(const JointLaw& law, double lambda, double eta) {
    if (law.family() != ParametricFamily::ScaledSqrt)
        throw std::invalid_argument("exp_tilt_mean: custom laws have no closed-form transform");
    const ScaledSqrtParams& p = law.scaled_sqrt_params();
    return integrate_tilt(
        p, [&](double t) { return lambda * reward_of_tau(p, t) - eta * t; }, UnitFactor{});
}

}  // namespace

double exp_tilt_mean(const JointLaw& law, double lambda, double eta) {
    if (lambda == 0.0 && eta == 0.0) return 1.0;
    if (law.kind() == LawKind::Discrete)
        return std::exp(log_exp_tilt_mean_discrete(law.atoms(), lambda, eta));
    return exp_tilt_mean_parametric(law, lambda, eta);
}

double exp_tilt_mean_deta(const JointLaw& law, double lambda, double eta) {
    if (law.kind() == LawKind::Discrete) {
        Kahan acc;
        for (const Atom& a : law.atoms()) {
            double tau = to_double(a.tau);
            acc.add(a.p * tau * std::exp(lambda * a.x - eta * tau));
        }
        return -acc.value();
    }
    if (law.family() != ParametricFamily::ScaledSqrt)
        throw std::invalid_argument("exp_tilt_mean_deta: custom laws unsupported");
    const ScaledSqrtParams& p = law.scaled_sqrt_params();
    return -integrate_tilt(
        p, [&](double t) { return lambda * reward_of_tau(p, t) - eta * t; },
        [](double t) { return t; });
}

TiltResult solve_eta(const JointLaw& law, double lambda, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_eta: tol must be positive");
    MomentReport report = validate(law);
    if (std::fabs(report.mean_x) > 1e-9)
        throw std::invalid_argument("solve_eta: law must have E X = 0 (got " +
                                    std::to_string(report.mean_x) + ")");

    TiltResult result;
    result.lambda = lambda;
    result.base = law;

    double eta = 0.0;
    if (lambda != 0.0) {
        auto logpsi = [&](double e) {
            return law.kind() == LawKind::Discrete
                       ? log_exp_tilt_mean_discrete(law.atoms(), lambda, e)
                       : std::log(exp_tilt_mean_parametric(law, lambda, e));
        };
        // psi(lambda, .) is strictly decreasing and log-convex; bracket the
        // root, bisect, then polish with Newton from the left (no overshoot).
        double lo = 0.0, hi = 1.0;
        double g_lo = logpsi(lo);
        if (g_lo <= 0.0) {
            // E exp(lambda X) <= 1 contradicts E X = 0 for nondegenerate X;
            // the only consistent root is eta = 0 (X degenerate at 0).
            if (g_lo < -tol)
                throw std::runtime_error(
                    "solve_eta: tilt mean at eta = 0 is below 1, law mis-specified");
            eta = 0.0;
        } else {
            int doublings = 0;
            while (logpsi(hi) > 0.0) {
                hi *= 2.0;
                if (++doublings > 200) throw std::runtime_error("solve_eta: no upper bracket");
            }
            for (int i = 0; i < 20; ++i) {
                double mid = 0.5 * (lo + hi);
                (logpsi(mid) > 0.0 ? lo : hi) = mid;
            }
            double e = lo;
            for (int i = 0; i < 60; ++i) {
                double psi = exp_tilt_mean(law, lambda, e);
                if (std::fabs(psi - 1.0) <= tol && i > 0) break;
                double dpsi = exp_tilt_mean_deta(law, lambda, e);
                double step = std::log(psi) * psi / dpsi;  // Newton on log(psi)
                double next = e - step;
                if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
                (logpsi(next) > 0.0 ? lo : hi) = next;
                if (next == e) break;
                e = next;
            }
            eta = e;
            if (std::fabs(exp_tilt_mean(law, lambda, eta) - 1.0) > tol)
                throw std::runtime_error("solve_eta: residual above tolerance after iteration cap");
        }
    }
    result.eta = eta;

    if (law.kind() == LawKind::Discrete) {
        const std::vector<Atom>& atoms = law.atoms();
        double emax = -std::numeric_limits<double>::infinity();
        for (const Atom& a : atoms)
            emax = std::max(emax, lambda * a.x - eta * to_double(a.tau));
        std::vector<double> w(atoms.size());
        Kahan total;
        for (size_t i = 0; i < atoms.size(); ++i) {
            w[i] = atoms[i].p * std::exp(lambda * atoms[i].x - eta * to_double(atoms[i].tau) - emax);
            total.add(w[i]);
        }
        double sum = total.value() * std::exp(emax);
        if (std::fabs(sum - 1.0) > std::max(100.0 * tol, 1e-10))
            throw std::runtime_error("solve_eta: tilted weights sum residual too large");
        double scale = 1.0 / total.value();
        for (double& wi : w) wi *= scale;
        result.weights = std::move(w);

        std::map<Rational, Kahan> agg;
        for (size_t i = 0; i < atoms.size(); ++i) agg[atoms[i].tau].add(result.weights[i]);
        for (auto& [loc, mass] : agg) {
            result.tau_marginal.locations.push_back(loc);
            result.tau_marginal.masses.push_back(mass.value());
        }
    }
    return result;
}

JointLaw tilted_pair_law(const TiltResult& tilt) {
    if (tilt.base.kind() != LawKind::Discrete)
        throw std::invalid_argument("tilted_pair_law: materialized for discrete laws only");
    const std::vector<Atom>& atoms = tilt.base.atoms();
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (size_t i = 0; i < atoms.size(); ++i)
        out.push_back({atoms[i].tau, atoms[i].x, tilt.weights[i]});
    return JointLaw::discrete(std::move(out));
}

HFunction h_function(const TiltResult& tilt, size_t max_index) {
    HFunction h;
    h.lambda = tilt.lambda;
    h.eta = tilt.eta;
    double eta = tilt.eta;

    if (tilt.base.kind() == LawKind::Discrete) {
        DiscreteMeasure base = tilt.base.tau_marginal();
        h.delta = base.span();
        double delta = to_double(h.delta);
        // base-law tail P(tau > k*delta), exact partial sums from the top
        size_t last = static_cast<size_t>(exact_lattice_index(base.locations.back(), h.delta));
        std::vector<double> tail(last + 1, 0.0);
        {
            Kahan acc;
            size_t i = base.locations.size();
            for (size_t k = last; k-- > 0;) {
                while (i > 0 &&
                       static_cast<size_t>(exact_lattice_index(base.locations[i - 1], h.delta)) >
                           k) {
                    acc.add(base.masses[--i]);
                }
                tail[k] = acc.value();
            }
        }
        h.values.assign(max_index + 1, 0.0);
        for (size_t k = 0; k <= max_index; ++k) {
            double t = k < tail.size() ? tail[k] : 0.0;
            h.values[k] = t == 0.0 ? 0.0 : std::exp(-eta * delta * static_cast<double>(k)) * t;
        }
        h.eval = [tail = std::move(tail), delta, eta](double t) {
            if (t < 0.0) return 0.0;
            auto k = static_cast<size_t>(std::floor(t / delta));
            if (k >= tail.size()) return 0.0;
            return std::exp(-eta * t) * tail[k];
        };
        return h;
    }

    if (tilt.base.family() != ParametricFamily::ScaledSqrt)
        throw std::invalid_argument("h_function: custom laws have no closed-form tail");
    const ScaledSqrtParams p = tilt.base.scaled_sqrt_params();
    h.delta = Rational(0);
    switch (p.tau_family) {
        case TauFamily::Exponential:
            h.eval = [eta, rate = p.rate](double t) {
                return t < 0.0 ? 0.0 : std::exp(-(eta + rate) * t);
            };
            break;
        case TauFamily::Uniform:
            h.eval = [eta, lo = p.lo, hi = p.hi](double t) {
                if (t < 0.0) return 0.0;
                if (t >= hi) return 0.0;
                double tail = t <= lo ? 1.0 : (hi - t) / (hi - lo);
                return std::exp(-eta * t) * tail;
            };
            break;
    }
    return h;
}

std::vector<EtaCurvePoint> eta_curve(const JointLaw& law, std::span<const double> lambdas,
                                     double tol) {
    MomentReport report = validate(law);
    double zero_limit = report.var_x / report.mean_tau;
    std::vector<EtaCurvePoint> out;
    out.reserve(lambdas.size());
    for (double lambda : lambdas) {
        TiltResult tilt = solve_eta(law, lambda, tol);
        EtaCurvePoint pt;
        pt.lambda = lambda;
        pt.eta = tilt.eta;
        pt.ratio = lambda == 0.0 ? zero_limit : tilt.eta / (0.5 * lambda * lambda);
        pt.drift = tilted_drift(tilt);
        out.push_back(pt);
    }
    return out;
}

std::vector<SmallLambdaRow> small_lambda_limit_check(const JointLaw& law, double a,
                                                     std::span<const double> lambdas) {
    if (!(a > 0.0)) throw std::invalid_argument("small_lambda_limit_check: a must be positive");
    std::vector<SmallLambdaRow> out;
    out.reserve(lambdas.size());
    MomentReport report = validate(law);
    for (double lambda : lambdas) {
        double value;
        if (lambda == 0.0) {
            value = 0.5 * (report.var_x + report.mean_x * report.mean_x) - a * report.mean_tau;
        } else if (law.kind() == LawKind::Discrete) {
            // expm1 keeps the psi - 1 cancellation exact near lambda = 0
            Kahan acc;
            for (const Atom& at : law.atoms())
                acc.add(at.p * std::expm1(lambda * at.x - a * lambda * lambda * to_double(at.tau)));
            value = acc.value() / (lambda * lambda);
        } else {
            // expm1 keeps psi - 1 accurate; the exponent is bounded above since
            // a > 0, so no overflow composing is needed for the factor itself
            const ScaledSqrtParams& p = law.scaled_sqrt_params();
            auto expo = [&](double t) { return lambda * reward_of_tau(p, t) - a * lambda * lambda * t; };
            double integral =
                integrate_tilt(p, [](double) { return 0.0; },
                               [&](double t) { return std::expm1(expo(t)); });
            value = integral / (lambda * lambda);
        }
        out.push_back({lambda, value});
    }
    return out;
}

double tilted_drift(const TiltResult& tilt) {
    if (tilt.base.kind() == LawKind::Discrete) {
        const std::vector<Atom>& atoms = tilt.base.atoms();
        Kahan num, den;
        for (size_t i = 0; i < atoms.size(); ++i) {
            num.add(tilt.weights[i] * atoms[i].x);
            den.add(tilt.weights[i] * to_double(atoms[i].tau));
        }
        return num.value() / den.value();
    }
    if (tilt.base.family() != ParametricFamily::ScaledSqrt)
        throw std::invalid_argument("tilted_drift: custom laws unsupported");
    const ScaledSqrtParams& p = tilt.base.scaled_sqrt_params();
    double lambda = tilt.lambda, eta = tilt.eta;
    auto expo = [&](double t) { return lambda * reward_of_tau(p, t) - eta * t; };
    double num = integrate_tilt(p, expo, [&](double t) { return reward_of_tau(p, t); });
    double den = integrate_tilt(p, expo, [](double t) { return t; });
    return num / den;
}

}  // namespace rrproc
