#include "hifu/acoustics.hpp"
#include "hifu/fem.hpp"
#include "hifu/kernels.hpp"
#include "hifu/transport.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace hifu;

namespace {

std::shared_ptr<const FeSpace> space_for(double h) {
    return std::make_shared<const FeSpace>(std::make_shared<const Mesh>(build_domain_mesh(h)));
}

}  // namespace

static void BM_L1Weights(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(l1_weights(0.8, n));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_L1Weights)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

static void BM_L1WeightCache(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        L1WeightCache cache(0.8);
        for (std::size_t i = 0; i < n; ++i) benchmark::DoNotOptimize(cache.at_step(i).weights.data());
    }
}
BENCHMARK(BM_L1WeightCache)->Arg(256)->Arg(1024);

static void BM_MittagLeffler(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(mittag_leffler(0.7, 1.3, -3.5));
}
BENCHMARK(BM_MittagLeffler);

static void BM_WeightedStiffness(benchmark::State& state) {
    const auto space = space_for(1e-3 * static_cast<double>(state.range(0)));
    const NodalField w = NodalField::LinSpaced(Eigen::Index(space->dim()), 1.0, 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(space->weighted_stiffness(w));
    state.counters["triangles"] = static_cast<double>(space->num_elements());
}
BENCHMARK(BM_WeightedStiffness)->Arg(6)->Arg(3)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_HistoryTerm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::size_t dim = 20000;
    AcousticState s = AcousticState::zeros(dim);
    s.velocity_history.assign(n + 1, NodalField::Random(Eigen::Index(dim)));
    const auto w = l1_weights(0.8, n);
    for (auto _ : state) benchmark::DoNotOptimize(history_term(s, w));
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * (n + 1) * dim * sizeof(double)));
}
BENCHMARK(BM_HistoryTerm)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_WesterveltStep(benchmark::State& state) {
    const auto space = space_for(1e-3 * static_cast<double>(state.range(0)));
    const NodalField theta = NodalField::Zero(Eigen::Index(space->dim()));
    WesterveltStepper stepper(space, liver_model(1e5), Excitation::from_frequency(1e9, 1e5), 6.67e-8,
                              WesterveltOptions{});
    AcousticState s = AcousticState::zeros(space->dim());
    stepper.initialize(s, theta);
    for (auto _ : state) benchmark::DoNotOptimize(stepper.step(s, theta));
}
BENCHMARK(BM_WesterveltStep)->Arg(6)->Arg(3)->Iterations(200)->Unit(benchmark::kMillisecond);

static void BM_TransportStep(benchmark::State& state) {
    const auto space = space_for(1e-3 * static_cast<double>(state.range(0)));
    VelocityModel vel;
    vel.v0 = {0.0, 10.0};
    TransportStepper tr(space, vel, TransportBoundary::inflow_outflow(5e-3, 100.0), 1e-6);
    auto c = ConcentrationState::uniform(space->dim(), 1e-4);
    for (auto _ : state) benchmark::DoNotOptimize(tr.step(c, {}));
}
BENCHMARK(BM_TransportStep)->Arg(6)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
