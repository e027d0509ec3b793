#include <benchmark/benchmark.h>

#include <random>

#include "collapse/evolver.hpp"

using namespace collapse;

namespace {

ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n, double scale) {
    std::normal_distribution<double> g;
    ComplexMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
    return 0.5 * scale * (a + a.adjoint());
}

void BM_EvolveRandom(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    std::mt19937_64 rng(1);
    const Basis basis = Basis::numbered(static_cast<std::size_t>(n));
    ComplexMatrix rho = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
    rho(0, n - 1) = rho(n - 1, 0) = 0.5 / static_cast<double>(n);
    const Hamiltonian h(basis, random_hermitian(rng, n, 1e-34));
    RealMatrix r = RealMatrix::Constant(n, n, 0.5);
    r.diagonal().setZero();
    const CollapseRateMatrix rates(basis, r);

    EvolutionConfig cfg;
    cfg.t_end = Quantity{1.0, dims::kTime};
    cfg.dt = Quantity{1e-3, dims::kTime};
    cfg.record_stride = 100;
    const DensityMatrix rho0(basis, rho);
    for (auto _ : state) benchmark::DoNotOptimize(evolve(rho0, h, rates, cfg));
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_EvolveRandom)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_Derivative(benchmark::State& state) {
    const Basis basis = Basis::here_there();
    const auto rho = equal_superposition(basis);
    const auto h = Hamiltonian::rabi_drive(basis, {1e3, dims::kFrequency});
    RealMatrix r(2, 2);
    r << 0, 1, 1, 0;
    const CollapseRateMatrix rates(basis, r);
    for (auto _ : state) benchmark::DoNotOptimize(derivative(rho, h, rates));
}
BENCHMARK(BM_Derivative);

void BM_Convergence(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(convergence_order(Method::RK4));
}
BENCHMARK(BM_Convergence);

}  // namespace
