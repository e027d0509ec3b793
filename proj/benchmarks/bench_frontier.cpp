#include <benchmark/benchmark.h>

#include "collapse/frontier.hpp"

using namespace collapse;

namespace {

const Quantity kGeV{constants::kGeVPerC2InKg, dims::kMass};

void BM_TrappedSweep(benchmark::State& state) {
    SweepSpec spec;
    spec.scenario = Scenario::Trapped;
    spec.axis = "M";
    spec.grid = Grid{kGeV, kGeV * 1e6, static_cast<std::size_t>(state.range(0)), Spacing::Geometric};
    spec.fixed = {{"v", {100.0, dims::kVelocity}}, {"D", {1e-5, dims::kLength}}};
    for (auto _ : state) benchmark::DoNotOptimize(sweep(spec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrappedSweep)->Arg(16)->Arg(256)->Arg(4096);

void BM_FindCriticalMass(benchmark::State& state) {
    const ParameterSet fixed{{"v", {1e3, dims::kVelocity}}, {"D", {1e-5, dims::kLength}}, {"theta", {1e-5, dims::kNone}}};
    for (auto _ : state) benchmark::DoNotOptimize(find_critical_mass(Scenario::FreeFlight, fixed));
}
BENCHMARK(BM_FindCriticalMass);

void BM_VisibilityCurve(benchmark::State& state) {
    const auto v = DiscriminationVerdict::finite("trapped", {1.0, dims::kTime}, Regime::Classical, {});
    CurveConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(visibility_curve(v, cfg));
}
BENCHMARK(BM_VisibilityCurve);

}  // namespace
