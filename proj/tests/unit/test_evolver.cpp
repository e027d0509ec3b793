#include <doctest.h>

#include <cmath>
#include <random>

#include "collapse/evolver.hpp"
#include "support/oracles.hpp"

using namespace collapse;

namespace {

Quantity seconds(double x) { return {x, dims::kTime}; }

CollapseRateMatrix two_level_rate(double gamma) {
    RealMatrix r(2, 2);
    r << 0, gamma, gamma, 0;
    return {Basis::here_there(), r};
}

EvolutionConfig config(double t_end, std::optional<double> dt = std::nullopt, Method m = Method::RK4) {
    EvolutionConfig cfg;
    cfg.t_end = seconds(t_end);
    if (dt) cfg.dt = seconds(*dt);
    cfg.method = m;
    return cfg;
}

DensityMatrix ground(const Basis& b) {
    ComplexMatrix e = ComplexMatrix::Zero(2, 2);
    e(0, 0) = 1.0;
    return {b, e};
}

}  // namespace

TEST_CASE("derivative: pure dephasing and Rabi drive") {
    const Basis b = Basis::here_there();
    const auto rho = equal_superposition(b);
    const ComplexMatrix d = derivative(rho, Hamiltonian::zero(b), two_level_rate(3.0));
    CHECK(std::abs(d(0, 0)) == 0.0);
    CHECK(std::abs(d(1, 1)) == 0.0);
    CHECK(std::abs(d(0, 1) - Complex(-1.5, 0.0)) < 1e-15);
    CHECK(std::abs(d(1, 0) - Complex(-1.5, 0.0)) < 1e-15);

    const double omega = 2.0;
    const ComplexMatrix r = derivative(ground(b), Hamiltonian::rabi_drive(b, {omega, dims::kFrequency}),
                                       CollapseRateMatrix::zero(b));
    CHECK(std::abs(r(0, 0)) < 1e-15);
    CHECK(std::abs(r(0, 1) - Complex(0.0, omega / 2)) < 1e-12);
    CHECK(std::abs(r(1, 0) - Complex(0.0, -omega / 2)) < 1e-12);
}

TEST_CASE("resolve_step") {
    const Basis b = Basis::here_there();
    CHECK(resolve_step(Hamiltonian::zero(b), two_level_rate(2.0), config(1.0)).value() == doctest::Approx(0.0025));
    CHECK(resolve_step(Hamiltonian::zero(b), CollapseRateMatrix::zero(b), config(3.0)).value() ==
          doctest::Approx(0.03));
    const auto h = Hamiltonian::rabi_drive(b, {200.0, dims::kFrequency});  // hbar/max|H| = 1/100 s
    CHECK(resolve_step(h, two_level_rate(1.0), config(1.0)).value() == doctest::Approx(5e-5));
    CHECK(resolve_step(h, two_level_rate(1.0), config(1.0, 0.25)).value() == 0.25);
}

TEST_CASE("evolve: isolated decay matches rho_ij(0) exp(-t/tau)") {
    const Basis b = Basis::here_there();
    const auto rho0 = equal_superposition(b);
    for (double gamma : {0.1, 1.0, 37.0}) {
        const auto rates = two_level_rate(gamma);
        const double t_end = 3.0 / gamma;
        const auto traj = evolve(rho0, Hamiltonian::zero(b), rates, config(t_end));
        CHECK(traj.times.back().value() == doctest::Approx(t_end).epsilon(1e-14));
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const auto want = analytic_isolated(rho0, rates, traj.times[k]);
            CHECK(oracle::max_rel_error(traj.states[k].elements(), want.elements()) < 1e-9);
        }
        CHECK_FALSE(traj.any_flagged());
    }
    CHECK(coherence_visibility(analytic_isolated(rho0, two_level_rate(1.0), seconds(1.0)), 0, 1) ==
          doctest::Approx(oracle::kExpMinus1).epsilon(1e-15));
}

TEST_CASE("evolve: Rabi oscillation against the closed form") {
    const Basis b = Basis::here_there();
    const double omega = 2 * oracle::kPi;
    const auto traj = evolve(ground(b), Hamiltonian::rabi_drive(b, {omega, dims::kFrequency}),
                             CollapseRateMatrix::zero(b), config(5.0, 1e-3));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Eigen::MatrixXcd want = oracle::rabi_state(omega, traj.times[k].value());
        CHECK((traj.states[k].elements() - want).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(traj.states[k].purity() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("evolve: random systems against the Liouvillian exponential") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index n = 2 + trial % 3;
        const Basis b = Basis::numbered(static_cast<std::size_t>(n));
        const DensityMatrix rho0(b, oracle::random_density(rng, n));
        const Hamiltonian h(b, oracle::random_hamiltonian(rng, n, 3.0));
        const CollapseRateMatrix rates(b, oracle::random_rates(rng, n, 2.0));
        const auto traj = evolve(rho0, h, rates, config(1.5, 1e-3));
        const auto want = oracle::liouvillian_solution(rho0.elements(), h.elements(), rates.rates(), 1.5);
        CHECK((traj.final_state().elements() - want).cwiseAbs().maxCoeff() < 1e-9);

        for (std::size_t k = 0; k < traj.size(); ++k) {
            CHECK(std::abs(traj.states[k].trace() - Complex(1.0, 0.0)) < 1e-12);
            CHECK(traj.states[k].hermiticity_defect() < 1e-13);
        }
        CHECK_FALSE(traj.any_flagged());
    }
}

TEST_CASE("convergence orders") {
    const auto rk4 = convergence_order(Method::RK4);
    CHECK(rk4.order == doctest::Approx(4.0).epsilon(0.3 / 4.0));
    CHECK(rk4.error_fine < rk4.error_coarse);
    const auto euler = convergence_order(Method::Euler);
    CHECK(euler.order == doctest::Approx(1.0).epsilon(0.2));
    CHECK(euler.dt_coarse.value() == 0.01);
}

TEST_CASE("diagonal Hamiltonian: phase and damping factorize") {
    const Basis b = Basis::here_there();
    const double e0 = 0.0, e1 = 4.0 * oracle::kHbar;  // splitting 4 rad/s
    const std::vector<Quantity> energies{{e0, dims::kEnergy}, {e1, dims::kEnergy}};
    const auto h = Hamiltonian::diagonal(b, energies);
    const double gamma = 0.7;
    const auto rho0 = equal_superposition(b);
    const auto traj = evolve(rho0, h, two_level_rate(gamma), config(4.0));
    double previous = 2.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k].value();
        const Complex want = 0.5 * std::exp(Complex(-gamma * t, 4.0 * t));
        CHECK(std::abs(traj.states[k](0, 1) - want) < 1e-9);
        const double vis = coherence_visibility(traj.states[k], 0, 1);
        CHECK(vis <= previous);
        previous = vis;
        CHECK(traj.states[k](0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("purity never increases under pure dephasing") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Basis b = Basis::numbered(3);
        const DensityMatrix rho0(b, oracle::random_density(rng, 3));
        const CollapseRateMatrix rates(b, oracle::random_rates(rng, 3, 5.0));
        const auto traj = evolve(rho0, Hamiltonian::zero(b), rates, config(1.0));
        for (std::size_t k = 1; k < traj.size(); ++k)
            CHECK(traj.states[k].purity() <= traj.states[k - 1].purity() + 1e-15);
    }
}

TEST_CASE("unitary_baseline equals evolve with zero rates bit for bit") {
    const Basis b = Basis::here_there();
    const auto h = Hamiltonian::rabi_drive(b, {3.0, dims::kFrequency});
    const auto cfg = config(2.0);
    const auto a = unitary_baseline(ground(b), h, cfg);
    const auto z = evolve(ground(b), h, CollapseRateMatrix::zero(b), cfg);
    REQUIRE(a.size() == z.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.times[k].value() == z.times[k].value());
        CHECK(a.states[k].elements() == z.states[k].elements());
    }
}

TEST_CASE("recording stride and final sample") {
    const Basis b = Basis::here_there();
    auto cfg = config(1.0, 0.03);
    cfg.record_stride = 5;
    const auto traj = evolve(equal_superposition(b), Hamiltonian::zero(b), two_level_rate(1.0), cfg);
    CHECK(traj.times.front().value() == 0.0);
    CHECK(traj.times.back().value() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(traj.steps == 34);
    CHECK(traj.step.value() == doctest::Approx(1.0 / 34));
    CHECK(traj.size() == 8);  // steps 0,5,...,30 and 34
}

TEST_CASE("evolve error cases") {
    const Basis b = Basis::here_there();
    const auto rho = equal_superposition(b);
    const auto h = Hamiltonian::zero(b);
    const auto r = two_level_rate(1.0);
    CHECK_THROWS_AS(evolve(rho, h, r, config(-1.0)), ValidationError);
    CHECK_THROWS_AS(evolve(rho, h, r, config(1.0, 0.0)), ValidationError);
    auto cfg = config(1.0);
    cfg.record_stride = 0;
    CHECK_THROWS_AS(evolve(rho, h, r, cfg), ValidationError);
    cfg = config(1.0);
    cfg.dt = Quantity{0.1, dims::kLength};
    CHECK_THROWS_AS(evolve(rho, h, r, cfg), DimensionError);

    CHECK_THROWS_AS(evolve(rho, Hamiltonian::zero(Basis::numbered(2)), r, config(1.0)), ValidationError);
    ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
    bad(0, 0) = 2.0;
    CHECK_THROWS_AS(evolve(DensityMatrix(b, bad), h, r, config(1.0)), ValidationError);

    CHECK_THROWS_AS(evolve(rho, h, two_level_rate(1e308), config(10.0, 1.0, Method::Euler)), IntegrationError);
    CHECK_THROWS_AS(analytic_isolated(rho, r, seconds(-1.0)), ValidationError);
}

TEST_CASE("explicit Euler overshoot is flagged, not hidden") {
    const Basis b = Basis::here_there();
    ComplexMatrix e(2, 2);
    e << 0.9, 0.3, 0.3, 0.1;
    // dt * rate = 3 flips the coherence sign and overshoots; rho stays Hermitian
    const auto traj = evolve(DensityMatrix(b, e), Hamiltonian::zero(b), two_level_rate(3.0),
                             config(2.0, 1.0, Method::Euler));
    CHECK(traj.any_flagged());
    CHECK(traj.flags.back().positivity_violation);
}
