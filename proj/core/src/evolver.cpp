#include "collapse/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace collapse {

namespace {

void require_same_basis(const Basis& a, const Basis& b, const char* what) {
    if (!(a == b)) throw ValidationError(std::string("basis mismatch: ") + what);
}

// Everything in 1/s: H is pre-divided by hbar.
struct Rhs {
    ComplexMatrix h_over_hbar;
    ComplexMatrix rates;

    ComplexMatrix operator()(const ComplexMatrix& rho) const {
        const Complex minus_i{0.0, -1.0};
        return minus_i * (h_over_hbar * rho - rho * h_over_hbar) - rates.cwiseProduct(rho);
    }
};

Rhs make_rhs(const Hamiltonian& h, const CollapseRateMatrix& rates) {
    return {h.elements() / constants::hbar.value(), rates.rates().cast<Complex>()};
}

SampleFlags inspect(const DensityMatrix& rho, const EvolutionConfig& cfg) {
    SampleFlags f;
    f.trace_drift = std::abs(rho.trace() - 1.0);
    f.hermiticity_defect = rho.hermiticity_defect();
    f.min_eigenvalue = rho.min_eigenvalue();
    f.trace_violation = f.trace_drift > cfg.tol.trace;
    f.hermiticity_violation = f.hermiticity_defect > cfg.tol.hermiticity;
    f.positivity_violation = f.min_eigenvalue < cfg.positivity_floor;
    return f;
}

double max_rel_error(const ComplexMatrix& got, const ComplexMatrix& want) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < got.rows(); ++i) {
        for (Eigen::Index j = 0; j < got.cols(); ++j) {
            const double scale = std::abs(want(i, j));
            const double err = std::abs(got(i, j) - want(i, j));
            worst = std::max(worst, scale > 0.0 ? err / scale : err);
        }
    }
    return worst;
}

}  // namespace

void EvolutionConfig::validate() const {
    t_end.require(dims::kTime, "t_end");
    if (!(t_end.value() > 0.0) || !std::isfinite(t_end.value())) {
        throw ValidationError("t_end must be positive");
    }
    if (dt) {
        dt->require(dims::kTime, "dt");
        if (!(dt->value() > 0.0) || !std::isfinite(dt->value())) throw ValidationError("dt must be positive");
    }
    if (record_stride == 0) throw ValidationError("record_stride must be positive");
}

bool Trajectory::any_flagged() const {
    return std::any_of(flags.begin(), flags.end(), [](const SampleFlags& f) { return f.any(); });
}

ComplexMatrix derivative(const DensityMatrix& rho, const Hamiltonian& h, const CollapseRateMatrix& rates) {
    require_same_basis(rho.basis(), h.basis(), "density matrix vs Hamiltonian");
    require_same_basis(rho.basis(), rates.basis(), "density matrix vs rate matrix");
    return make_rhs(h, rates)(rho.elements());
}

Quantity resolve_step(const Hamiltonian& h, const CollapseRateMatrix& rates, const EvolutionConfig& cfg) {
    cfg.validate();
    if (cfg.dt) return *cfg.dt;

    double fastest = std::numeric_limits<double>::infinity();
    if (auto tau = rates.min_finite_tau()) fastest = tau->value();
    const double hmax = h.max_abs_entry();
    if (hmax > 0.0) fastest = std::min(fastest, constants::hbar.value() / hmax);

    if (!std::isfinite(fastest)) {
        return cfg.t_end / EvolutionConfig::kAutoFallbackSteps;
    }
    return Quantity{fastest / EvolutionConfig::kAutoStepDivisor, dims::kTime};
}

Trajectory evolve(const DensityMatrix& rho0, const Hamiltonian& h, const CollapseRateMatrix& rates,
                  const EvolutionConfig& cfg) {
    require_same_basis(rho0.basis(), h.basis(), "density matrix vs Hamiltonian");
    require_same_basis(rho0.basis(), rates.basis(), "density matrix vs rate matrix");
    if (auto bad = validate(rho0, cfg.tol); !bad.empty()) {
        throw ValidationError("initial state is invalid: " + to_string(bad.front().kind) + " " +
                              std::to_string(bad.front().defect));
    }

    const double t_end = cfg.t_end.value();
    const double requested = resolve_step(h, rates, cfg).value();
    // Shrink dt so that an integer number of steps lands exactly on t_end.
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t_end / requested - 1e-9)));
    const double dt = t_end / static_cast<double>(steps);

    const Rhs f = make_rhs(h, rates);
    const Basis& basis = rho0.basis();

    Trajectory traj;
    traj.step = Quantity{dt, dims::kTime};
    traj.steps = steps;
    const std::size_t expected = steps / cfg.record_stride + 2;
    traj.times.reserve(expected);
    traj.states.reserve(expected);
    traj.flags.reserve(expected);

    auto record = [&](double t, const ComplexMatrix& m) {
        traj.times.emplace_back(t, dims::kTime);
        traj.states.emplace_back(basis, m);
        traj.flags.push_back(inspect(traj.states.back(), cfg));
    };

    ComplexMatrix rho = rho0.elements();
    record(0.0, rho);

    for (std::size_t k = 1; k <= steps; ++k) {
        switch (cfg.method) {
            case Method::RK4: {
                const ComplexMatrix k1 = f(rho);
                const ComplexMatrix k2 = f(rho + (0.5 * dt) * k1);
                const ComplexMatrix k3 = f(rho + (0.5 * dt) * k2);
                const ComplexMatrix k4 = f(rho + dt * k3);
                rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                break;
            }
            case Method::Euler:
                rho += dt * f(rho);
                break;
        }
        const double t = static_cast<double>(k) * dt;
        if (!rho.allFinite()) {
            throw IntegrationError("non-finite density matrix at t = " + std::to_string(t) + " s", t);
        }
        if (k % cfg.record_stride == 0 || k == steps) record(t, rho);
    }
    return traj;
}

Trajectory unitary_baseline(const DensityMatrix& rho0, const Hamiltonian& h, const EvolutionConfig& cfg) {
    return evolve(rho0, h, CollapseRateMatrix::zero(rho0.basis()), cfg);
}

DensityMatrix analytic_isolated(const DensityMatrix& rho0, const CollapseRateMatrix& rates, const Quantity& t) {
    require_same_basis(rho0.basis(), rates.basis(), "density matrix vs rate matrix");
    const double seconds = t.si(dims::kTime);
    if (!(seconds >= 0.0)) throw ValidationError("time must be nonnegative");
    const ComplexMatrix decay = (-seconds * rates.rates().array()).exp().matrix().cast<Complex>();
    return DensityMatrix(rho0.basis(), rho0.elements().cwiseProduct(decay));
}

ConvergenceReport convergence_order(Method method, const Quantity& dt_coarse) {
    const Basis basis = Basis::here_there();
    const DensityMatrix rho0 = equal_superposition(basis);
    const Hamiltonian h = Hamiltonian::zero(basis);
    RealMatrix r(2, 2);
    r << 0.0, 1.0, 1.0, 0.0;
    const CollapseRateMatrix rates(basis, r);
    const Quantity t_end{1.0, dims::kTime};
    const ComplexMatrix exact = analytic_isolated(rho0, rates, t_end).elements();

    auto error_at = [&](const Quantity& dt) {
        EvolutionConfig cfg;
        cfg.dt = dt;
        cfg.t_end = t_end;
        cfg.method = method;
        cfg.record_stride = std::numeric_limits<std::size_t>::max();
        return max_rel_error(evolve(rho0, h, rates, cfg).final_state().elements(), exact);
    };

    ConvergenceReport rep;
    rep.dt_coarse = dt_coarse;
    rep.error_coarse = error_at(dt_coarse);
    rep.error_fine = error_at(dt_coarse / 2.0);
    rep.order = std::log2(rep.error_coarse / rep.error_fine);
    return rep;
}

ConvergenceReport convergence_order(Method method) {
    const double dt = method == Method::RK4 ? 0.05 : 0.01;
    return convergence_order(method, Quantity{dt, dims::kTime});
}

}  // namespace collapse
