#include <benchmark/benchmark.h>

#include "rrproc/renewal.hpp"
#include "rrproc/rng.hpp"

using namespace rrproc;

namespace {

// measure with `support` equiprobable atoms on 1..support
DiscreteMeasure wide_measure(int support) {
    DiscreteMeasure m;
    double p = 1.0 / support;
    for (int k = 1; k <= support; ++k) {
        m.locations.push_back(Rational(k));
        m.masses.push_back(p);
    }
    return m;
}

}  // namespace

static void BM_RenewalRecursion(benchmark::State& state) {
    auto n_max = static_cast<size_t>(state.range(0));
    auto support = static_cast<int>(state.range(1));
    DiscreteMeasure m = wide_measure(support);
    for (auto _ : state) {
        RenewalTable table = renewal_table(m, Rational(1), n_max, ConvolvePolicy::Recursion);
        benchmark::DoNotOptimize(table.masses.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RenewalRecursion)
    ->Args({1 << 14, 4})
    ->Args({1 << 17, 4})
    ->Args({1 << 14, 256})
    ->Args({1 << 17, 256});

static void BM_RenewalFft(benchmark::State& state) {
    auto n_max = static_cast<size_t>(state.range(0));
    auto support = static_cast<int>(state.range(1));
    DiscreteMeasure m = wide_measure(support);
    for (auto _ : state) {
        RenewalTable table = renewal_table(m, Rational(1), n_max, ConvolvePolicy::Fft);
        benchmark::DoNotOptimize(table.masses.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RenewalFft)
    ->Args({1 << 14, 4})
    ->Args({1 << 17, 4})
    ->Args({1 << 14, 256})
    ->Args({1 << 17, 256});

static void BM_KeyRenewalConvolve(benchmark::State& state) {
    DiscreteMeasure m = wide_measure(16);
    RenewalTable table = renewal_table(m, Rational(1), 4096);
    HFunction h;
    h.delta = Rational(1);
    h.values.assign(256, 0.0);
    for (size_t k = 0; k < h.values.size(); ++k) h.values[k] = std::exp(-0.05 * double(k));
    for (auto _ : state) {
        ConvolveResult r = key_renewal_convolve(table, h, 4000);
        benchmark::DoNotOptimize(r.value);
    }
}
BENCHMARK(BM_KeyRenewalConvolve);

BENCHMARK_MAIN();
