#include <benchmark/benchmark.h>

#include "rrproc/montecarlo.hpp"

using namespace rrproc;

namespace {

JointLaw rademacher() {
    return JointLaw::discrete({{Rational(1), 1.0, 0.5}, {Rational(1), -1.0, 0.5}});
}

JointLaw mixed_lattice() {
    return JointLaw::discrete({{Rational(1), 1.0, 0.25},
                               {Rational(1), -1.0, 0.25},
                               {Rational(2), 1.0, 0.25},
                               {Rational(2), -1.0, 0.25}});
}

}  // namespace

static void BM_PairLoopPath(benchmark::State& state) {
    JointLaw law = mixed_lattice();
    auto t = static_cast<double>(state.range(0));
    uint64_t i = 0;
    PhiloxRng rng(1, 0);
    for (auto _ : state) {
        rng.set_substream(i++);
        benchmark::DoNotOptimize(simulate_S(law, t, rng));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PairLoopPath)->Arg(1000)->Arg(10000);

static void BM_TiltedEstimatorFastPath(benchmark::State& state) {
    JointLaw law = rademacher();
    auto n = static_cast<uint64_t>(state.range(0));
    uint64_t seed = 0;
    for (auto _ : state) {
        TailEstimate est = tail_tilted(law, 1e6, 8.0, n, seed++);
        benchmark::DoNotOptimize(est.p_hat);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TiltedEstimatorFastPath)->Arg(1000)->Arg(10000);

static void BM_TiltedEstimatorGenericPath(benchmark::State& state) {
    JointLaw law = mixed_lattice();
    auto n = static_cast<uint64_t>(state.range(0));
    uint64_t seed = 0;
    for (auto _ : state) {
        TailEstimate est = tail_tilted(law, 1000.0, 2.0, n, seed++);
        benchmark::DoNotOptimize(est.p_hat);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TiltedEstimatorGenericPath)->Arg(1000)->Arg(10000);
