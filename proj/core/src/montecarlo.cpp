#include "rrproc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "rrproc/summation.hpp"

namespace rrproc {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Discrete law prepared for exact integer-time path simulation.
struct LatticePaths {
    AliasSampler alias;
    std::vector<long long> steps;  // per-atom tau in lattice units
    std::vector<double> xs;
    std::vector<double> probs;
    double delta_d = 0.0;
    long long common_steps = 0;  // nonzero when every atom has the same tau

    explicit LatticePaths(const JointLaw& law, const Rational& delta) {
        delta_d = to_double(delta);
        std::vector<double> weights;
        for (const Atom& a : law.atoms()) {
            steps.push_back(exact_lattice_index(a.tau, delta));
            xs.push_back(a.x);
            probs.push_back(a.p);
            weights.push_back(a.p);
        }
        alias = AliasSampler(weights);
        common_steps = steps.front();
        for (long long s : steps)
            if (s != common_steps) {
                common_steps = 0;
                break;
            }
    }
};

long long lattice_units(double t, const Rational& delta) {
    return rational_floor(rational_from_double(t) / delta).convert_to<long long>();
}

struct PathOutcome {
    double reward_sum = 0.0;  // S(t), straddling reward excluded
    double log_weight = 0.0;  // 0 under the base law
};

// Generic pair-by-pair walk on the lattice. lambda/eta describe the measure
// the pairs are drawn from; the weight undoes that tilt.
PathOutcome walk_lattice(const LatticePaths& paths, long long t_units, double lambda, double eta,
                         PhiloxRng& rng) {
    long long elapsed = 0;
    double reward = 0.0;
    double reward_all = 0.0;
    long long straddled;
    for (;;) {
        size_t i = paths.alias(rng);
        straddled = elapsed + paths.steps[i];
        reward_all += paths.xs[i];
        if (straddled > t_units) break;
        elapsed = straddled;
        reward += paths.xs[i];
    }
    PathOutcome out;
    out.reward_sum = reward;
    if (lambda != 0.0 || eta != 0.0)
        out.log_weight =
            -lambda * reward_all + eta * paths.delta_d * static_cast<double>(straddled);
    return out;
}

// Constant-tau fast path: the pair count N = floor(t/tau) is deterministic, so
// the reward sum over the first N pairs is multinomial in the atom counts.
// Distribution-identical to walk_lattice, at O(atoms) cost per path.
PathOutcome walk_constant_tau(const LatticePaths& paths, long long t_units, double lambda,
                              double eta, PhiloxRng& rng) {
    long long k = paths.common_steps;
    long long n_pairs = t_units / k;
    double reward = 0.0;
    long long remaining = n_pairs;
    double prob_left = 1.0;
    for (size_t j = 0; j + 1 < paths.probs.size() && remaining > 0; ++j) {
        double cond = std::clamp(paths.probs[j] / prob_left, 0.0, 1.0);
        long long c = std::binomial_distribution<long long>(remaining, cond)(rng);
        reward += static_cast<double>(c) * paths.xs[j];
        remaining -= c;
        prob_left -= paths.probs[j];
    }
    if (remaining > 0) reward += static_cast<double>(remaining) * paths.xs.back();

    size_t straddler = paths.alias(rng);
    PathOutcome out;
    out.reward_sum = reward;
    if (lambda != 0.0 || eta != 0.0) {
        double reward_all = reward + paths.xs[straddler];
        double elapsed_all = paths.delta_d * static_cast<double>((n_pairs + 1) * k);
        out.log_weight = -lambda * reward_all + eta * elapsed_all;
    }
    return out;
}

// Continuous-time walk for parametric laws; `sample` draws one (tau, x) pair
// from the simulation measure.
template <class Sampler>
PathOutcome walk_continuous(Sampler&& sample, double t, double lambda, double eta,
                            PhiloxRng& rng) {
    double elapsed = 0.0, reward = 0.0;
    double log_weight = 0.0;
    for (;;) {
        auto [tau, x] = sample(rng);
        if (lambda != 0.0 || eta != 0.0) log_weight += -lambda * x + eta * tau;
        if (elapsed + tau > t) break;
        elapsed += tau;
        reward += x;
    }
    PathOutcome out;
    out.reward_sum = reward;
    out.log_weight = log_weight;
    return out;
}

// Tilted tau sampler for X = a*sqrt(tau)+b over exponential tau: the density
// in s = sqrt(tau) is proportional to s*exp(-alpha*s^2 + beta*s), whose CDF is
// elementary; inverted by safeguarded Newton to ~1e-14.
struct TiltedSqrtExpSampler {
    double alpha, beta, a, b;

    double cdf_unnormalized(double s) const {
        double m = beta / (2.0 * alpha);
        double expo = std::exp(-alpha * s * s + beta * s);
        double gauss = std::exp(beta * beta / (4.0 * alpha)) * 0.5 *
                       std::sqrt(std::numbers::pi / alpha) *
                       (std::erf(std::sqrt(alpha) * (s - m)) + std::erf(std::sqrt(alpha) * m));
        return (1.0 - expo) / alpha + (beta / alpha) * gauss;
    }
    double pdf_unnormalized(double s) const {
        return 2.0 * s * std::exp(-alpha * s * s + beta * s);
    }

    std::pair<double, double> operator()(PhiloxRng& rng) const {
        double m = beta / (2.0 * alpha);
        double total = cdf_unnormalized(std::max(m, 0.0) + 40.0 / std::sqrt(alpha));
        double target = rng.uniform01_open() * total;
        double lo = 0.0, hi = std::max(m, 0.0) + 1.0 / std::sqrt(alpha);
        while (cdf_unnormalized(hi) < target) hi *= 2.0;
        double s = 0.5 * (lo + hi);
        for (int i = 0; i < 200; ++i) {
            double f = cdf_unnormalized(s) - target;
            if (std::fabs(f) <= 1e-14 * total) break;
            (f > 0.0 ? hi : lo) = s;
            double d = pdf_unnormalized(s);
            double next = d > 0.0 ? s - f / d : 0.5 * (lo + hi);
            s = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
        }
        double tau = s * s;
        return {tau, a * s + b};
    }
};

// Tilted tau sampler over uniform tau: bounded support, plain rejection.
struct TiltedSqrtUniformSampler {
    double lo, hi, a, b, lambda, eta, max_exponent;

    double exponent(double t) const { return lambda * a * std::sqrt(t) - eta * t; }

    std::pair<double, double> operator()(PhiloxRng& rng) const {
        for (;;) {
            double t = lo + rng.uniform01() * (hi - lo);
            double u = rng.uniform01_open();
            if (std::log(u) <= exponent(t) - max_exponent) return {t, a * std::sqrt(t) + b};
        }
    }
};

struct BlockPartial {
    Kahan sum_v;
    Kahan sum_v2;
    uint64_t hits = 0;
};

constexpr uint64_t kBlockSize = 4096;

// Per-sample substreams plus a fixed block reduction order make the estimate
// independent of the worker count.
template <class SampleFn>
void run_blocks(uint64_t n_samples, uint64_t seed, unsigned threads, SampleFn&& fn,
                std::vector<BlockPartial>& partials) {
    uint64_t n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
    partials.assign(n_blocks, BlockPartial{});
    auto work = [&](uint64_t block) {
        PhiloxRng rng;
        BlockPartial& part = partials[block];
        uint64_t begin = block * kBlockSize;
        uint64_t end = std::min(n_samples, begin + kBlockSize);
        for (uint64_t i = begin; i < end; ++i) {
            rng.reset(seed, i);
            double v = fn(rng);
            part.sum_v.add(v);
            part.sum_v2.add(v * v);
            if (v > 0.0) ++part.hits;
        }
    };
    if (threads <= 1 || n_blocks <= 1) {
        for (uint64_t b = 0; b < n_blocks; ++b) work(b);
        return;
    }
    std::atomic<uint64_t> next{0};
    unsigned n_workers = std::min<unsigned>(threads, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                uint64_t b = next.fetch_add(1);
                if (b >= n_blocks) return;
                work(b);
            }
        });
    }
    for (std::thread& th : pool) th.join();
}

TailEstimate reduce_blocks(const std::vector<BlockPartial>& partials, uint64_t n_samples, double t,
                           double x, TailMethod method) {
    Kahan sum_v, sum_v2;
    uint64_t hits = 0;
    for (const BlockPartial& p : partials) {
        sum_v.add(p.sum_v);
        sum_v2.add(p.sum_v2);
        hits += p.hits;
    }
    TailEstimate est;
    est.t = t;
    est.x = x;
    est.n_samples = n_samples;
    est.hits = hits;
    est.method = method;
    double n = static_cast<double>(n_samples);
    est.p_hat = sum_v.value() / n;
    if (method == TailMethod::Naive) {
        est.std_err = std::sqrt(std::max(0.0, est.p_hat * (1.0 - est.p_hat)) / n);
    } else {
        double var = std::max(0.0, sum_v2.value() / n - est.p_hat * est.p_hat);
        if (n > 1.5) var *= n / (n - 1.0);
        est.std_err = std::sqrt(var / n);
    }
    est.rate = -std::log(est.p_hat) / (x * x);
    return est;
}

double solve_drift_lambda(const JointLaw& law, double target, double tol) {
    if (law.kind() == LawKind::Discrete) {
        double sup_rate = -std::numeric_limits<double>::infinity();
        for (const Atom& a : law.atoms())
            if (a.p > 0.0) sup_rate = std::max(sup_rate, a.x / to_double(a.tau));
        if (target >= sup_rate)
            throw std::invalid_argument(
                "tail_tilted: x/sqrt(t) is beyond the achievable drift of the law");
    }
    auto drift_at = [&](double lambda) { return tilted_drift(solve_eta(law, lambda, 1e-13)); };
    double lo = 0.0, hi = 1.0;
    int doublings = 0;
    while (drift_at(hi) < target) {
        hi *= 2.0;
        if (++doublings > 60)
            throw std::invalid_argument(
                "tail_tilted: x/sqrt(t) is beyond the achievable drift of the law");
    }
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        double d = drift_at(mid);
        if (std::fabs(d - target) <= tol * std::max(1.0, std::fabs(target))) return mid;
        (d < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double simulate_S(const JointLaw& law, double t, PhiloxRng& rng) {
    if (!(t >= 0.0)) throw std::invalid_argument("simulate_S: t must be nonnegative");
    if (law.kind() == LawKind::Discrete) {
        Rational delta = span(law);
        LatticePaths paths(law, delta);
        return walk_lattice(paths, lattice_units(t, delta), 0.0, 0.0, rng).reward_sum;
    }
    return walk_continuous([&](PhiloxRng& r) { return sample_pair(law, r); }, t, 0.0, 0.0, rng)
        .reward_sum;
}

namespace detail {

TailEstimate tail_estimate_impl(const JointLaw& law, double t, double x, uint64_t n_samples,
                                uint64_t seed, unsigned threads, TailMethod method,
                                bool allow_fast_path) {
    if (!(t >= 0.0)) throw std::invalid_argument("tail estimate: t must be nonnegative");
    if (n_samples < 1) throw std::invalid_argument("tail estimate: n_samples must be >= 1");
    double cutoff = x * std::sqrt(t);

    double lambda_star = 0.0, eta_star = 0.0;
    JointLaw sim_law = law;
    if (method == TailMethod::Tilted) {
        if (!(x > 0.0)) throw std::invalid_argument("tail_tilted: x must be positive");
        lambda_star = solve_drift_lambda(law, x / std::sqrt(t), 1e-12);
        TiltResult tilt = solve_eta(law, lambda_star, 1e-13);
        eta_star = tilt.eta;
        if (law.kind() == LawKind::Discrete) sim_law = tilted_pair_law(tilt);
    }

    std::vector<BlockPartial> partials;
    if (law.kind() == LawKind::Discrete) {
        Rational delta = span(law);
        LatticePaths paths(sim_law, delta);
        long long t_units = lattice_units(t, delta);
        bool fast = allow_fast_path && paths.common_steps > 0;
        auto sample = [&](PhiloxRng& rng) {
            PathOutcome out = fast ? walk_constant_tau(paths, t_units, lambda_star, eta_star, rng)
                                   : walk_lattice(paths, t_units, lambda_star, eta_star, rng);
            if (out.reward_sum <= cutoff) return 0.0;
            return method == TailMethod::Naive ? 1.0 : std::exp(out.log_weight);
        };
        run_blocks(n_samples, seed, threads, sample, partials);
    } else if (law.family() == ParametricFamily::ScaledSqrt) {
        const ScaledSqrtParams& p = law.scaled_sqrt_params();
        auto run_with = [&](auto&& pair_sampler) {
            auto sample = [&](PhiloxRng& rng) {
                PathOutcome out =
                    walk_continuous(pair_sampler, t, lambda_star, eta_star, rng);
                if (out.reward_sum <= cutoff) return 0.0;
                return method == TailMethod::Naive ? 1.0 : std::exp(out.log_weight);
            };
            run_blocks(n_samples, seed, threads, sample, partials);
        };
        if (method == TailMethod::Naive) {
            run_with([&](PhiloxRng& r) { return sample_pair(law, r); });
        } else if (p.tau_family == TauFamily::Exponential) {
            TiltedSqrtExpSampler sampler{p.rate + eta_star, lambda_star * p.a, p.a, p.b};
            run_with(sampler);
        } else {
            double lo_e = lambda_star * p.a * std::sqrt(p.lo) - eta_star * p.lo;
            double hi_e = lambda_star * p.a * std::sqrt(p.hi) - eta_star * p.hi;
            double max_e = std::max(lo_e, hi_e);
            if (eta_star > 0.0) {
                double t_crit = std::pow(lambda_star * p.a / (2.0 * eta_star), 2);
                if (t_crit > p.lo && t_crit < p.hi)
                    max_e = std::max(max_e,
                                     lambda_star * p.a * std::sqrt(t_crit) - eta_star * t_crit);
            }
            TiltedSqrtUniformSampler sampler{p.lo, p.hi,  p.a,  p.b,
                                             lambda_star, eta_star, max_e};
            run_with(sampler);
        }
    } else {
        if (method == TailMethod::Tilted)
            throw std::invalid_argument("tail_tilted: custom laws cannot be tilt-sampled");
        auto sample = [&](PhiloxRng& rng) {
            PathOutcome out = walk_continuous([&](PhiloxRng& r) { return sample_pair(law, r); },
                                              t, 0.0, 0.0, rng);
            return out.reward_sum > cutoff ? 1.0 : 0.0;
        };
        run_blocks(n_samples, seed, threads, sample, partials);
    }

    TailEstimate est = reduce_blocks(partials, n_samples, t, x, method);
    est.lambda_star = lambda_star;
    return est;
}

}  // namespace detail

TailEstimate tail_naive(const JointLaw& law, double t, double x, uint64_t n_samples, uint64_t seed,
                        unsigned threads) {
    return detail::tail_estimate_impl(law, t, x, n_samples, seed, threads, TailMethod::Naive, true);
}

TailEstimate tail_tilted(const JointLaw& law, double t, double x, uint64_t n_samples, uint64_t seed,
                         unsigned threads) {
    return detail::tail_estimate_impl(law, t, x, n_samples, seed, threads, TailMethod::Tilted,
                                      true);
}

double mdp_reference_rate(double x) {
    return 0.5 + std::log(x * std::sqrt(2.0 * std::numbers::pi)) / (x * x);
}

std::vector<MdpScanRow> mdp_rate_scan(const JointLaw& law, std::span<const SchedulePoint> schedule,
                                      TailMethod method, uint64_t seed, unsigned threads) {
    for (size_t i = 1; i < schedule.size(); ++i) {
        bool x_up = schedule[i].x > schedule[i - 1].x;
        bool ratio_down = schedule[i].x / std::sqrt(schedule[i].t) <
                          schedule[i - 1].x / std::sqrt(schedule[i - 1].t);
        if (!x_up || !ratio_down)
            throw std::invalid_argument(
                "mdp schedule must have x increasing and x/sqrt(t) decreasing");
    }
    std::vector<MdpScanRow> rows;
    rows.reserve(schedule.size());
    for (size_t i = 0; i < schedule.size(); ++i) {
        const SchedulePoint& pt = schedule[i];
        uint64_t point_seed = splitmix64(seed + 0x9E3779B97F4A7C15ULL * (i + 1));
        MdpScanRow row;
        row.estimate = detail::tail_estimate_impl(law, pt.t, pt.x, pt.n_samples, point_seed,
                                                  threads, method, true);
        row.reference = mdp_reference_rate(pt.x);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace rrproc
