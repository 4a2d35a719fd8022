#include "rrproc/law.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "rrproc/summation.hpp"

namespace rrproc {

namespace {

constexpr double kMomentTol = 1e-12;

struct ExactMoments {
    Rational mean_tau;
    Rational mean_x;
    Rational m2_x;  // E X^2
    Rational var_x() const { return m2_x - mean_x * mean_x; }
};

// p and x are doubles, hence dyadic rationals; the sums below are exact.
ExactMoments exact_moments(const std::vector<Atom>& atoms) {
    ExactMoments m{Rational(0), Rational(0), Rational(0)};
    for (const Atom& a : atoms) {
        Rational p = rational_from_double(a.p);
        Rational x = rational_from_double(a.x);
        m.mean_tau += p * a.tau;
        m.mean_x += p * x;
        m.m2_x += p * x * x;
    }
    return m;
}

struct ContinuousMoments {
    double mean_tau = 0.0;
    double mean_sqrt_tau = 0.0;
    double mean_x = 0.0;
    double var_x = 0.0;
};

ContinuousMoments scaled_sqrt_moments(const ScaledSqrtParams& p) {
    ContinuousMoments m;
    switch (p.tau_family) {
        case TauFamily::Exponential:
            m.mean_tau = 1.0 / p.rate;
            // E sqrt(tau) = Gamma(3/2) / sqrt(rate)
            m.mean_sqrt_tau = 0.5 * std::sqrt(std::numbers::pi / p.rate);
            break;
        case TauFamily::Uniform:
            m.mean_tau = 0.5 * (p.lo + p.hi);
            m.mean_sqrt_tau =
                (2.0 / 3.0) * (std::pow(p.hi, 1.5) - std::pow(p.lo, 1.5)) / (p.hi - p.lo);
            break;
    }
    m.mean_x = p.a * m.mean_sqrt_tau + p.b;
    double m2 = p.a * p.a * m.mean_tau + 2.0 * p.a * p.b * m.mean_sqrt_tau + p.b * p.b;
    m.var_x = m2 - m.mean_x * m.mean_x;
    return m;
}

// Integer square root test: returns r with r*r == n, if it exists.
std::optional<BigInt> perfect_sqrt(const BigInt& n) {
    if (n < 0) return std::nullopt;
    BigInt r = boost::multiprecision::sqrt(n);
    if (r * r == n) return r;
    return std::nullopt;
}

}  // namespace

Rational DiscreteMeasure::span() const {
    Rational g(0);
    for (const Rational& loc : locations) g = rational_gcd(g, loc);
    return g;
}

double DiscreteMeasure::mean() const {
    Kahan acc;
    for (size_t i = 0; i < locations.size(); ++i) acc.add(to_double(locations[i]) * masses[i]);
    return acc.value();
}

double DiscreteMeasure::total() const {
    Kahan acc;
    for (double m : masses) acc.add(m);
    return acc.value();
}

double DiscreteMeasure::tail_above(const Rational& t) const {
    Kahan acc;
    for (size_t i = locations.size(); i-- > 0;) {
        if (locations[i] > t)
            acc.add(masses[i]);
        else
            break;  // locations ascending
    }
    return acc.value();
}

std::vector<double> DiscreteMeasure::on_lattice(const Rational& delta, size_t max_index) const {
    std::vector<double> out(max_index + 1, 0.0);
    for (size_t i = 0; i < locations.size(); ++i) {
        long long k = exact_lattice_index(locations[i], delta);
        if (k >= 0 && static_cast<size_t>(k) <= max_index) out[static_cast<size_t>(k)] += masses[i];
    }
    return out;
}

JointLaw JointLaw::discrete(std::vector<Atom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("discrete law needs at least one atom");
    Kahan total;
    for (const Atom& a : atoms) {
        if (a.tau <= 0) throw std::invalid_argument("non-positive tau atom");
        if (!(a.p >= 0.0)) throw std::invalid_argument("negative atom probability");
        total.add(a.p);
    }
    if (std::fabs(total.value() - 1.0) > kMomentTol)
        throw std::invalid_argument("atom probabilities sum to " + std::to_string(total.value()) +
                                    ", not 1 within 1e-12");
    JointLaw law;
    law.kind_ = LawKind::Discrete;
    law.atoms_ = std::move(atoms);
    law.tau_dbl_.reserve(law.atoms_.size());
    std::vector<double> weights;
    weights.reserve(law.atoms_.size());
    for (const Atom& a : law.atoms_) {
        law.tau_dbl_.push_back(to_double(a.tau));
        weights.push_back(a.p);
    }
    law.alias_ = AliasSampler(weights);
    return law;
}

JointLaw JointLaw::scaled_sqrt(ScaledSqrtParams params) {
    switch (params.tau_family) {
        case TauFamily::Exponential:
            if (!(params.rate > 0.0))
                throw std::invalid_argument("scaled-sqrt: exponential rate must be positive");
            break;
        case TauFamily::Uniform:
            if (!(0.0 < params.lo && params.lo < params.hi))
                throw std::invalid_argument("scaled-sqrt: uniform needs 0 < lo < hi");
            break;
    }
    JointLaw law;
    law.kind_ = LawKind::Parametric;
    law.family_ = ParametricFamily::ScaledSqrt;
    law.scaled_sqrt_ = params;
    return law;
}

JointLaw JointLaw::custom(CustomSamplerLaw sampler) {
    if (!sampler.sample) throw std::invalid_argument("custom law needs a sampler");
    JointLaw law;
    law.kind_ = LawKind::Parametric;
    law.family_ = ParametricFamily::CustomSampler;
    law.custom_ = std::move(sampler);
    return law;
}

double JointLaw::min_tau() const {
    switch (kind_) {
        case LawKind::Discrete: {
            double m = tau_dbl_[0];
            for (double t : tau_dbl_) m = std::min(m, t);
            return m;
        }
        case LawKind::Parametric:
            return family_ == ParametricFamily::ScaledSqrt &&
                           scaled_sqrt_.tau_family == TauFamily::Uniform
                       ? scaled_sqrt_.lo
                       : 0.0;
    }
    return 0.0;
}

DiscreteMeasure JointLaw::tau_marginal() const {
    if (kind_ != LawKind::Discrete)
        throw std::invalid_argument("tau_marginal: law is not discrete");
    std::map<Rational, Kahan> agg;
    for (const Atom& a : atoms_) agg[a.tau].add(a.p);
    DiscreteMeasure m;
    m.locations.reserve(agg.size());
    m.masses.reserve(agg.size());
    for (auto& [loc, mass] : agg) {
        m.locations.push_back(loc);
        m.masses.push_back(mass.value());
    }
    return m;
}

MomentReport validate(const JointLaw& law) {
    MomentReport r;
    switch (law.kind()) {
        case LawKind::Discrete: {
            ExactMoments m = exact_moments(law.atoms());
            r.mean_tau = to_double(m.mean_tau);
            r.mean_x = to_double(m.mean_x);
            r.var_x = to_double(m.var_x());
            // finite support: both exponential-moment conditions are automatic
            r.condition_flags = {true, true};
            break;
        }
        case LawKind::Parametric: {
            if (law.family() == ParametricFamily::ScaledSqrt) {
                ContinuousMoments m = scaled_sqrt_moments(law.scaled_sqrt_params());
                r.mean_tau = m.mean_tau;
                r.mean_x = m.mean_x;
                r.var_x = m.var_x;
                // X^2 grows linearly in tau and the named tau laws have
                // exponential (or bounded) tails; verified per family.
                r.condition_flags = {true, true};
            } else {
                const CustomSamplerLaw& c = law.custom_law();
                r.mean_tau = c.mean_tau;
                r.mean_x = c.mean_x;
                r.var_x = c.var_x;
                r.condition_flags = {c.sq_exp_moment, c.all_lambda_moment};
            }
            break;
        }
    }
    if (!(r.mean_tau > 0.0)) throw std::invalid_argument("law has non-positive mean tau");
    r.standardized = std::fabs(r.mean_x) <= kMomentTol &&
                     std::fabs(r.var_x + r.mean_x * r.mean_x - 1.0) <= kMomentTol &&
                     std::fabs(r.mean_tau - 1.0) <= kMomentTol;
    return r;
}

JointLaw standardize(const JointLaw& law) {
    switch (law.kind()) {
        case LawKind::Discrete: {
            ExactMoments m = exact_moments(law.atoms());
            Rational var = m.var_x();
            if (var == 0) throw std::invalid_argument("standardize: var(X) = 0");
            std::vector<Atom> out;
            out.reserve(law.atoms().size());
            auto num_root = perfect_sqrt(numerator(var));
            auto den_root = perfect_sqrt(denominator(var));
            if (num_root && den_root) {
                // sigma is exactly rational: the whole map stays in Q
                Rational sigma(*num_root, *den_root);
                for (const Atom& a : law.atoms()) {
                    Rational x = (rational_from_double(a.x) - m.mean_x) / sigma;
                    out.push_back({a.tau / m.mean_tau, to_double(x), a.p});
                }
            } else {
                double sigma = std::sqrt(to_double(var));
                for (const Atom& a : law.atoms()) {
                    double x = to_double(rational_from_double(a.x) - m.mean_x) / sigma;
                    out.push_back({a.tau / m.mean_tau, x, a.p});
                }
            }
            return JointLaw::discrete(std::move(out));
        }
        case LawKind::Parametric: {
            if (law.family() != ParametricFamily::ScaledSqrt)
                throw std::invalid_argument("standardize: custom laws carry their own descriptor");
            ScaledSqrtParams p = law.scaled_sqrt_params();
            ContinuousMoments m = scaled_sqrt_moments(p);
            if (!(m.var_x > 0.0)) throw std::invalid_argument("standardize: var(X) = 0");
            double scale = m.mean_tau;
            ScaledSqrtParams q = p;
            switch (p.tau_family) {
                case TauFamily::Exponential:
                    q.rate = p.rate * scale;
                    break;
                case TauFamily::Uniform:
                    q.lo = p.lo / scale;
                    q.hi = p.hi / scale;
                    break;
            }
            double sigma = std::sqrt(m.var_x);
            q.a = p.a * std::sqrt(scale) / sigma;
            q.b = (p.b - m.mean_x) / sigma;
            return JointLaw::scaled_sqrt(q);
        }
    }
    throw std::logic_error("unreachable");
}

Rational span(const JointLaw& law) {
    if (law.kind() != LawKind::Discrete) return Rational(0);
    return law.tau_marginal().span();
}

std::pair<double, double> sample_pair(const JointLaw& law, PhiloxRng& rng) {
    switch (law.kind()) {
        case LawKind::Discrete: {
            size_t i = law.alias_(rng);
            return {law.tau_dbl_[i], law.atoms_[i].x};
        }
        case LawKind::Parametric: {
            if (law.family_ == ParametricFamily::ScaledSqrt) {
                const ScaledSqrtParams& p = law.scaled_sqrt_;
                double tau = 0.0;
                switch (p.tau_family) {
                    case TauFamily::Exponential:
                        tau = -std::log(rng.uniform01_open()) / p.rate;
                        break;
                    case TauFamily::Uniform:
                        tau = p.lo + rng.uniform01() * (p.hi - p.lo);
                        break;
                }
                return {tau, p.a * std::sqrt(tau) + p.b};
            }
            return law.custom_.sample(rng);
        }
    }
    throw std::logic_error("unreachable");
}

namespace {

using nlohmann::json;

JointLaw law_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("law file: expected an object with a \"kind\" field");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "discrete") {
        if (!j.contains("atoms") || !j.at("atoms").is_array())
            throw std::invalid_argument("law file: discrete kind needs an \"atoms\" array");
        std::vector<Atom> atoms;
        for (const json& a : j.at("atoms")) {
            Atom atom;
            const json& tau = a.at("tau");
            if (tau.is_string())
                atom.tau = parse_rational(tau.get<std::string>());
            else if (tau.is_number())
                atom.tau = rational_from_double(tau.get<double>());
            else
                throw std::invalid_argument("law file: tau must be a rational string or number");
            atom.x = a.at("x").get<double>();
            atom.p = a.at("p").get<double>();
            atoms.push_back(std::move(atom));
        }
        return JointLaw::discrete(std::move(atoms));
    }
    if (kind == "parametric") {
        std::string family = j.at("family").get<std::string>();
        if (family != "scaled-sqrt")
            throw std::invalid_argument("law file: unknown parametric family '" + family + "'");
        const json& p = j.at("params");
        ScaledSqrtParams params;
        std::string tau_family = p.at("tau_family").get<std::string>();
        if (tau_family == "exponential") {
            params.tau_family = TauFamily::Exponential;
            params.rate = p.at("rate").get<double>();
        } else if (tau_family == "uniform") {
            params.tau_family = TauFamily::Uniform;
            params.lo = p.at("lo").get<double>();
            params.hi = p.at("hi").get<double>();
        } else {
            throw std::invalid_argument("law file: unknown tau_family '" + tau_family + "'");
        }
        params.a = p.value("a", 1.0);
        params.b = p.value("b", 0.0);
        return JointLaw::scaled_sqrt(params);
    }
    throw std::invalid_argument("law file: unknown kind '" + kind + "'");
}

}  // namespace

JointLaw law_from_json_text(const std::string& text) {
    json j = json::parse(text);
    return law_from_json(j);
}

std::string law_to_json_text(const JointLaw& law) {
    json j;
    switch (law.kind()) {
        case LawKind::Discrete: {
            j["kind"] = "discrete";
            json atoms = json::array();
            for (const Atom& a : law.atoms()) {
                atoms.push_back({{"tau", rational_to_string(a.tau)}, {"x", a.x}, {"p", a.p}});
            }
            j["atoms"] = std::move(atoms);
            break;
        }
        case LawKind::Parametric: {
            if (law.family() != ParametricFamily::ScaledSqrt)
                throw std::invalid_argument("custom-sampler laws are in-process only");
            const ScaledSqrtParams& p = law.scaled_sqrt_params();
            j["kind"] = "parametric";
            j["family"] = "scaled-sqrt";
            json params;
            if (p.tau_family == TauFamily::Exponential) {
                params["tau_family"] = "exponential";
                params["rate"] = p.rate;
            } else {
                params["tau_family"] = "uniform";
                params["lo"] = p.lo;
                params["hi"] = p.hi;
            }
            params["a"] = p.a;
            params["b"] = p.b;
            j["params"] = std::move(params);
            break;
        }
    }
    return j.dump(2);
}

JointLaw load_law_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open law file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return law_from_json_text(buf.str());
}

}  // namespace rrproc
