#include "rrproc/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <fftw3.h>

#include "rrproc/summation.hpp"

namespace rrproc {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// c = a * b, truncated to n_keep coefficients.
std::vector<double> poly_mul_fft(const std::vector<double>& a, const std::vector<double>& b,
                                 size_t n_keep) {
    size_t full = a.size() + b.size() - 1;
    size_t n = next_pow2(full);
    std::vector<double> ra(n, 0.0), rb(n, 0.0);
    std::copy(a.begin(), a.end(), ra.begin());
    std::copy(b.begin(), b.end(), rb.begin());

    size_t nc = n / 2 + 1;
    fftw_complex* fa = fftw_alloc_complex(nc);
    fftw_complex* fb = fftw_alloc_complex(nc);
    fftw_plan pa, pb, pinv;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        pa = fftw_plan_dft_r2c_1d(static_cast<int>(n), ra.data(), fa, FFTW_ESTIMATE);
        pb = fftw_plan_dft_r2c_1d(static_cast<int>(n), rb.data(), fb, FFTW_ESTIMATE);
        pinv = fftw_plan_dft_c2r_1d(static_cast<int>(n), fa, ra.data(), FFTW_ESTIMATE);
    }
    fftw_execute(pa);
    fftw_execute(pb);
    for (size_t i = 0; i < nc; ++i) {
        double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
        double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
        fa[i][0] = re;
        fa[i][1] = im;
    }
    fftw_execute(pinv);
    std::vector<double> out(std::min(n_keep, full), 0.0);
    double scale = 1.0 / static_cast<double>(n);
    for (size_t i = 0; i < out.size(); ++i) out[i] = ra[i] * scale;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pb);
        fftw_destroy_plan(pinv);
    }
    fftw_free(fa);
    fftw_free(fb);
    out.resize(n_keep, 0.0);
    return out;
}

// Power-series inverse of A (A[0] != 0) to n terms, by Newton doubling:
// B <- B (2 - A B). Cost O(n log n).
std::vector<double> poly_inverse_fft(const std::vector<double>& a, size_t n) {
    std::vector<double> b{1.0 / a[0]};
    size_t m = 1;
    while (m < n) {
        size_t m2 = std::min(2 * m, n);
        std::vector<double> a_trunc(a.begin(), a.begin() + std::min(a.size(), m2));
        std::vector<double> ab = poly_mul_fft(a_trunc, b, m2);
        for (double& c : ab) c = -c;
        ab[0] += 2.0;
        b = poly_mul_fft(b, ab, m2);
        m = m2;
    }
    return b;
}

RenewalTable renewal_table_impl(std::vector<double> mu, const Rational& delta, size_t n_max,
                                double inv_mean, ConvolvePolicy policy) {
    double p0 = mu.empty() ? 0.0 : mu[0];
    if (p0 >= 1.0) throw std::invalid_argument("renewal table: unit mass at the origin");

    size_t support = 0;
    for (size_t k = mu.size(); k-- > 1;) {
        if (mu[k] != 0.0) {
            support = k;
            break;
        }
    }

    // measured crossover: the O(N*s) recursion beats the FFT inversion until
    // the support covers several hundred lattice steps
    bool use_fft = policy == ConvolvePolicy::Fft ||
                   (policy == ConvolvePolicy::Auto && n_max >= 100000 && support > 384);

    RenewalTable table;
    table.delta = delta;
    table.inv_mean = inv_mean;

    if (use_fft) {
        std::vector<double> a(n_max + 1, 0.0);
        a[0] = 1.0 - p0;
        for (size_t k = 1; k < std::min(mu.size(), n_max + 1); ++k) a[k] = -mu[k];
        table.masses = poly_inverse_fft(a, n_max + 1);
    } else {
        std::vector<double>& u = table.masses;
        u.assign(n_max + 1, 0.0);
        double inv = 1.0 / (1.0 - p0);
        u[0] = inv;
        for (size_t n = 1; n <= n_max; ++n) {
            Kahan acc;
            size_t kmax = std::min(n, support);
            for (size_t k = 1; k <= kmax; ++k) {
                if (mu[k] != 0.0) acc.add(mu[k] * u[n - k]);
            }
            u[n] = acc.value() * inv;
        }
    }
    return table;
}

}  // namespace

double RenewalTable::interval(size_t a, size_t b) const {
    if (a + b > masses.size())
        throw std::out_of_range("RenewalTable::interval beyond the computed horizon");
    Kahan acc;
    for (size_t k = a; k < a + b; ++k) acc.add(masses[k]);
    return acc.value();
}

double RenewalTable::cumulative_below(size_t k) const {
    if (k > masses.size())
        throw std::out_of_range("RenewalTable::cumulative_below beyond the computed horizon");
    Kahan acc;
    for (size_t i = 0; i < k; ++i) acc.add(masses[i]);
    return acc.value();
}

RenewalTable renewal_table(const DiscreteMeasure& tau_marginal, const Rational& delta, size_t n_max,
                           ConvolvePolicy policy) {
    if (n_max < 1) throw std::invalid_argument("renewal_table: n_max must be >= 1");
    if (tau_marginal.locations.empty()) throw std::invalid_argument("renewal_table: empty measure");
    if (std::fabs(tau_marginal.total() - 1.0) > 1e-9)
        throw std::invalid_argument("renewal_table: marginal is not a probability measure");
    for (const Rational& loc : tau_marginal.locations)
        if (loc <= 0) throw std::invalid_argument("renewal_table: marginal has mass at t <= 0");
    // throws "not on the lattice" for non-lattice marginals
    std::vector<double> mu = tau_marginal.on_lattice(delta, n_max);
    return renewal_table_impl(std::move(mu), delta, n_max, 1.0 / tau_marginal.mean(), policy);
}

InequalityCheck renewal_inequality_check(const RenewalTable& table, uint64_t trials,
                                         uint64_t seed) {
    InequalityCheck result;
    result.trials = trials;
    size_t n = table.masses.size() - 1;
    PhiloxRng rng(seed, 0);
    for (uint64_t i = 0; i < trials; ++i) {
        size_t b = 1 + static_cast<size_t>(rng() % n);
        size_t a = static_cast<size_t>(rng() % (n - b + 1));
        // U((a, a+b]) vs U([0, b)) in lattice steps
        double lhs = table.interval(a + 1, b);
        double rhs = table.interval(0, b);
        if (lhs > rhs + 1e-12 * (1.0 + rhs)) {
            result.ok = false;
            result.witness_u = a;
            result.witness_v = b;
            result.lhs = lhs;
            result.rhs = rhs;
            return result;
        }
    }
    return result;
}

LawFamily make_family(std::vector<DiscreteMeasure> members) {
    if (members.empty()) throw std::invalid_argument("law family: no members");
    LawFamily family;
    family.span = members.front().span();
    for (const DiscreteMeasure& m : members) {
        if (m.span() != family.span)
            throw std::invalid_argument("law family: mixed spans (" +
                                        rational_to_string(family.span) + " vs " +
                                        rational_to_string(m.span()) + ")");
    }
    family.members = std::move(members);
    return family;
}

LawFamily tilt_family(const JointLaw& law, std::span<const double> lambdas, double tol) {
    if (law.kind() != LawKind::Discrete)
        throw std::invalid_argument("tilt_family: tilted-marginal families need a lattice law");
    std::vector<DiscreteMeasure> members;
    members.reserve(lambdas.size());
    for (double lambda : lambdas) members.push_back(solve_eta(law, lambda, tol).tau_marginal);
    return make_family(std::move(members));
}

std::vector<BlackwellGapPoint> blackwell_gap(const LawFamily& family, size_t v_steps,
                                             std::span<const size_t> u_steps, size_t n_max,
                                             ConvolvePolicy policy) {
    if (v_steps == 0) throw std::invalid_argument("blackwell_gap: v must be positive");
    std::vector<RenewalTable> tables;
    tables.reserve(family.members.size());
    for (const DiscreteMeasure& m : family.members)
        tables.push_back(renewal_table(m, family.span, n_max + v_steps, policy));
    double delta = to_double(family.span);
    std::vector<BlackwellGapPoint> out;
    out.reserve(u_steps.size());
    for (size_t u : u_steps) {
        BlackwellGapPoint pt;
        pt.u_steps = u;
        for (const RenewalTable& table : tables) {
            double target = static_cast<double>(v_steps) * delta * table.inv_mean;
            pt.sup_gap = std::max(pt.sup_gap, std::fabs(table.interval(u, v_steps) - target));
        }
        out.push_back(pt);
    }
    return out;
}

ConvolveResult key_renewal_convolve(const RenewalTable& table, const HFunction& h, size_t n) {
    if (h.delta != table.delta)
        throw std::invalid_argument("key_renewal_convolve: h and table live on different lattices");
    if (n >= table.masses.size())
        throw std::out_of_range("key_renewal_convolve: n beyond the computed horizon");
    ConvolveResult result;
    Kahan acc;
    for (size_t k = 0; k <= n && k < h.values.size(); ++k)
        acc.add(h.values[k] * table.masses[n - k]);
    result.value = acc.value();
    Kahan hsum;
    for (double v : h.values) hsum.add(v);
    result.limit = to_double(table.delta) * table.inv_mean * hsum.value();
    return result;
}

DRIReport dri_check(const std::vector<DRIFunction>& family, std::span<const double> delta_grid,
                    std::span<const double> n_grid, double t_max,
                    size_t envelope_samples_per_block) {
    if (family.empty()) throw std::invalid_argument("dri_check: empty family");
    if (!(t_max > 1.0)) throw std::invalid_argument("dri_check: t_max must exceed 1");

    auto block_sup = [&](const DRIFunction& h, double a, double width) {
        if (h.monotone_nonincreasing) return std::fabs(h.f(a));
        double sup = 0.0;
        for (size_t i = 0; i < envelope_samples_per_block; ++i) {
            double t = a + width * static_cast<double>(i) /
                               static_cast<double>(envelope_samples_per_block);
            sup = std::max(sup, std::fabs(h.f(t)));
        }
        return sup;
    };
    auto block_inf = [&](const DRIFunction& h, double a, double width) {
        if (h.monotone_nonincreasing) return std::fabs(h.f(a + width));
        double inf = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < envelope_samples_per_block; ++i) {
            double t = a + width * static_cast<double>(i) /
                               static_cast<double>(envelope_samples_per_block);
            inf = std::min(inf, std::fabs(h.f(t)));
        }
        return inf;
    };

    DRIReport report;
    auto blocks = static_cast<size_t>(std::ceil(t_max));

    // unit-block sums and their tails
    std::vector<double> sup_tail_after(n_grid.size(), 0.0);
    for (const DRIFunction& h : family) {
        std::vector<double> sups(blocks);
        for (size_t n = 0; n < blocks; ++n) sups[n] = block_sup(h, static_cast<double>(n), 1.0);
        Kahan total;
        for (double s : sups) total.add(s);
        report.sup_block_sum = std::max(report.sup_block_sum, total.value());
        for (size_t j = 0; j < n_grid.size(); ++j) {
            auto start = static_cast<size_t>(std::ceil(n_grid[j]));
            Kahan tail;
            for (size_t n = start; n < blocks; ++n) tail.add(sups[n]);
            sup_tail_after[j] = std::max(sup_tail_after[j], tail.value());
        }
    }
    for (size_t j = 0; j < n_grid.size(); ++j)
        report.tail_curve.emplace_back(n_grid[j], sup_tail_after[j]);

    // Riemann gap as a function of the block width
    for (double delta : delta_grid) {
        if (!(delta > 0.0)) throw std::invalid_argument("dri_check: delta must be positive");
        double sup_gap = 0.0;
        auto nblocks = static_cast<size_t>(std::ceil(t_max / delta));
        for (const DRIFunction& h : family) {
            Kahan gap;
            for (size_t n = 0; n < nblocks; ++n) {
                double a = delta * static_cast<double>(n);
                gap.add(block_sup(h, a, delta) - block_inf(h, a, delta));
            }
            sup_gap = std::max(sup_gap, delta * gap.value());
        }
        report.riemann_gap_curve.emplace_back(delta, sup_gap);
    }
    return report;
}

std::pair<double, double> RenewalBracket::interval_bounds(size_t a, size_t b) const {
    double hi = round_down.cumulative_below(a + b) - round_up.cumulative_below(a);
    double lo = round_up.cumulative_below(a + b) - round_down.cumulative_below(a);
    return {std::max(0.0, lo), hi};
}

RenewalBracket nonlattice_bracket(const JointLaw& law, const Rational& delta, double horizon) {
    if (delta <= 0) throw std::invalid_argument("nonlattice_bracket: delta must be positive");
    double delta_d = to_double(delta);
    auto n_max = static_cast<size_t>(std::floor(horizon / delta_d));
    if (n_max < 2) throw std::invalid_argument("nonlattice_bracket: horizon too small");

    std::vector<double> down(n_max + 1, 0.0), up(n_max + 1, 0.0);
    double mean_down = 0.0, mean_up = 0.0;

    if (law.kind() == LawKind::Discrete) {
        // exact rational rounding of each atom onto the grid
        DiscreteMeasure marginal = law.tau_marginal();
        Kahan md, mu;
        for (size_t i = 0; i < marginal.locations.size(); ++i) {
            Rational ratio = marginal.locations[i] / delta;
            auto kd = rational_floor(ratio).convert_to<long long>();
            auto ku = rational_ceil(ratio).convert_to<long long>();
            double mass = marginal.masses[i];
            if (static_cast<size_t>(kd) <= n_max) down[static_cast<size_t>(kd)] += mass;
            if (static_cast<size_t>(ku) <= n_max) up[static_cast<size_t>(ku)] += mass;
            md.add(static_cast<double>(kd) * delta_d * mass);
            mu.add(static_cast<double>(ku) * delta_d * mass);
        }
        mean_down = md.value();
        mean_up = mu.value();
    } else if (law.family() == ParametricFamily::ScaledSqrt) {
        const ScaledSqrtParams& p = law.scaled_sqrt_params();
        switch (p.tau_family) {
            case TauFamily::Exponential: {
                double q = -std::expm1(-p.rate * delta_d);  // P(tau < delta)
                for (size_t k = 0; k <= n_max; ++k)
                    down[k] = std::exp(-p.rate * delta_d * static_cast<double>(k)) * q;
                for (size_t k = 1; k <= n_max; ++k)
                    up[k] = std::exp(-p.rate * delta_d * static_cast<double>(k - 1)) * q;
                double r = std::exp(-p.rate * delta_d);
                mean_down = delta_d * r / (1.0 - r);
                mean_up = mean_down + delta_d;
                break;
            }
            case TauFamily::Uniform: {
                auto cdf = [&](double t) {
                    return std::clamp((t - p.lo) / (p.hi - p.lo), 0.0, 1.0);
                };
                Kahan md, mu;
                auto k_end = static_cast<size_t>(std::ceil(p.hi / delta_d)) + 1;
                for (size_t k = 0; k <= k_end; ++k) {
                    double t = delta_d * static_cast<double>(k);
                    double mass_down = cdf(t + delta_d) - cdf(t);
                    double mass_up = k == 0 ? 0.0 : cdf(t) - cdf(t - delta_d);
                    if (k <= n_max) {
                        down[k] += mass_down;
                        up[k] += mass_up;
                    }
                    md.add(t * mass_down);
                    mu.add(t * mass_up);
                }
                mean_down = md.value();
                mean_up = mu.value();
                break;
            }
        }
    } else {
        throw std::invalid_argument("nonlattice_bracket: no CDF available for custom laws");
    }

    if (!(mean_down > 0.0))
        throw std::invalid_argument("nonlattice_bracket: delta too coarse, rounded mean is zero");

    RenewalBracket bracket;
    bracket.round_down =
        renewal_table_impl(std::move(down), delta, n_max, 1.0 / mean_down, ConvolvePolicy::Auto);
    bracket.round_up =
        renewal_table_impl(std::move(up), delta, n_max, 1.0 / mean_up, ConvolvePolicy::Auto);
    return bracket;
}

}  // namespace rrproc
