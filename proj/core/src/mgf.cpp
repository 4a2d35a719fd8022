#include "rrproc/mgf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "rrproc/summation.hpp"

namespace rrproc {

namespace {

// Lattice weights w(k) = sum_{tau_i = k*delta} p_i exp(lambda x_i) and the
// base tail P(tau > k*delta).
struct LatticeLaw {
    Rational delta;
    double delta_d = 0.0;
    std::vector<double> weights;  // index by lattice step, weights[0] unused (tau > 0)
    std::vector<double> tail;     // tail[k] = P(tau > k*delta)
    size_t support = 0;           // largest step with positive mass
};

LatticeLaw lattice_law(const JointLaw& law, double lambda) {
    if (law.kind() != LawKind::Discrete)
        throw std::invalid_argument("MGF recursion needs a lattice law");
    LatticeLaw lat;
    DiscreteMeasure marginal = law.tau_marginal();
    lat.delta = marginal.span();
    lat.delta_d = to_double(lat.delta);
    lat.support = static_cast<size_t>(exact_lattice_index(marginal.locations.back(), lat.delta));

    std::map<long long, Kahan> agg;
    for (const Atom& a : law.atoms())
        agg[exact_lattice_index(a.tau, lat.delta)].add(a.p * std::exp(lambda * a.x));
    lat.weights.assign(lat.support + 1, 0.0);
    for (auto& [k, w] : agg) lat.weights[static_cast<size_t>(k)] = w.value();

    lat.tail.assign(lat.support + 1, 0.0);
    {
        Kahan acc;
        size_t i = marginal.locations.size();
        for (size_t k = lat.support; k-- > 0;) {
            while (i > 0 && static_cast<size_t>(exact_lattice_index(marginal.locations[i - 1],
                                                                    lat.delta)) > k)
                acc.add(marginal.masses[--i]);
            lat.tail[k] = acc.value();
        }
    }
    return lat;
}

constexpr double kRescaleHigh = 1e250;
constexpr double kRescaleLow = 1e-250;

}  // namespace

double MGFSeries::max_relative_gap() const {
    double gap = 0.0;
    for (size_t n = 0; n < log_direct.size(); ++n)
        gap = std::max(gap, std::fabs(std::expm1(log_tilted[n] - log_direct[n])));
    return gap;
}

std::vector<double> mgf_direct_log(const JointLaw& law, double lambda, size_t n_max) {
    if (n_max > 1000000)
        throw std::invalid_argument(
            "mgf_direct: grids beyond 1e6 lattice points are not held in memory; "
            "use the tilted route");
    LatticeLaw lat = lattice_law(law, lambda);
    std::vector<double> logm(n_max + 1);
    // vals holds m(n*delta) / exp(scale); rescaled whenever it drifts out of
    // range so the recursion never overflows. Only the last `support` entries
    // feed future steps, so those are the ones rescaled.
    std::vector<double> vals(n_max + 1, 0.0);
    double scale = 0.0;
    vals[0] = 1.0;
    logm[0] = 0.0;
    for (size_t n = 1; n <= n_max; ++n) {
        Kahan acc;
        double g = n < lat.tail.size() ? lat.tail[n] : 0.0;
        if (g != 0.0) {
            double scaled_g = scale > 700.0 ? 0.0 : g * std::exp(-scale);
            acc.add(scaled_g);
        }
        size_t kmax = std::min(n, lat.support);
        for (size_t k = 1; k <= kmax; ++k) {
            if (lat.weights[k] != 0.0) acc.add(lat.weights[k] * vals[n - k]);
        }
        vals[n] = acc.value();
        logm[n] = std::log(vals[n]) + scale;
        if (vals[n] > kRescaleHigh || (vals[n] < kRescaleLow && vals[n] > 0.0)) {
            double factor = vals[n];
            double logf = std::log(factor);
            size_t start = n >= lat.support ? n - lat.support + 1 : 0;
            for (size_t j = start; j <= n; ++j) vals[j] /= factor;
            scale += logf;
        }
    }
    return logm;
}

std::vector<double> mgf_direct(const JointLaw& law, double lambda, size_t n_max) {
    std::vector<double> logm = mgf_direct_log(law, lambda, n_max);
    std::vector<double> out(logm.size());
    for (size_t i = 0; i < logm.size(); ++i) out[i] = std::exp(logm[i]);
    return out;
}

std::vector<double> mgf_tilted(const JointLaw& law, const TiltResult& tilt, size_t n_max) {
    Rational delta = span(law);
    double delta_d = to_double(delta);
    RenewalTable table = renewal_table(tilt.tau_marginal, delta, n_max);
    HFunction h = h_function(tilt, n_max);
    std::vector<double> out(n_max + 1);
    for (size_t n = 0; n <= n_max; ++n) {
        Kahan acc;
        for (size_t k = 0; k <= n && k < h.values.size(); ++k) {
            if (h.values[k] != 0.0) acc.add(h.values[k] * table.masses[n - k]);
        }
        out[n] = std::exp(tilt.eta * delta_d * static_cast<double>(n)) * acc.value();
    }
    return out;
}

MGFSeries mgf_series(const JointLaw& law, double lambda, size_t n_max, double tol) {
    MGFSeries s;
    s.lambda = lambda;
    s.delta = span(law);
    double delta_d = to_double(s.delta);

    TiltResult tilt = solve_eta(law, lambda, tol);
    s.eta = tilt.eta;

    s.log_direct = mgf_direct_log(law, lambda, n_max);
    s.direct.resize(n_max + 1);
    s.normalized.resize(n_max + 1);
    for (size_t n = 0; n <= n_max; ++n) {
        s.direct[n] = std::exp(s.log_direct[n]);
        s.normalized[n] = std::exp(s.log_direct[n] - s.eta * delta_d * static_cast<double>(n));
    }

    RenewalTable table = renewal_table(tilt.tau_marginal, s.delta, n_max);
    HFunction h = h_function(tilt, n_max);
    s.tilted.resize(n_max + 1);
    s.log_tilted.resize(n_max + 1);
    for (size_t n = 0; n <= n_max; ++n) {
        Kahan acc;
        for (size_t k = 0; k <= n && k < h.values.size(); ++k) {
            if (h.values[k] != 0.0) acc.add(h.values[k] * table.masses[n - k]);
        }
        double etat = s.eta * delta_d * static_cast<double>(n);
        s.log_tilted[n] = std::log(acc.value()) + etat;
        s.tilted[n] = std::exp(s.log_tilted[n]);
    }

    s.limit = asymptotic_constant(law, tilt);
    return s;
}

double asymptotic_constant(const JointLaw& law, const TiltResult& tilt) {
    Rational delta = span(law);
    if (delta == 0) throw std::invalid_argument("asymptotic_constant: lattice laws only");
    DiscreteMeasure marginal = law.tau_marginal();
    auto support = static_cast<size_t>(exact_lattice_index(marginal.locations.back(), delta));
    HFunction h = h_function(tilt, support);
    Kahan hsum;
    for (double v : h.values) hsum.add(v);
    return to_double(delta) * (1.0 / tilt.tau_marginal.mean()) * hsum.value();
}

UniformityStatistic uniformity_statistic(const JointLaw& law, std::span<const double> lambdas,
                                         size_t n_max, double tol) {
    UniformityStatistic stat;
    stat.sup_per_step.assign(n_max + 1, 0.0);
    double delta_d = to_double(span(law));
    for (double lambda : lambdas) {
        TiltResult tilt = solve_eta(law, lambda, tol);
        std::vector<double> logm = mgf_direct_log(law, lambda, n_max);
        for (size_t n = 0; n <= n_max; ++n) {
            double v = std::fabs(logm[n] - tilt.eta * delta_d * static_cast<double>(n));
            if (v > stat.sup_per_step[n]) stat.sup_per_step[n] = v;
            if (v > stat.sup) {
                stat.sup = v;
                stat.argmax_lambda = lambda;
                stat.argmax_step = n;
            }
        }
    }
    return stat;
}

double convergence_rate_fit(const MGFSeries& series) {
    size_t n_max = series.normalized.size() - 1;
    size_t start = std::max<size_t>(1, n_max / 4);
    double delta_d = to_double(series.delta);
    double num = 0.0, den = 0.0;
    for (size_t n = start; n <= n_max; ++n) {
        double t = delta_d * static_cast<double>(n);
        double y = std::fabs(std::log(series.normalized[n] / series.limit));
        num += y / t;
        den += 1.0 / (t * t);
    }
    return den == 0.0 ? 0.0 : num / den;
}

}  // namespace rrproc
