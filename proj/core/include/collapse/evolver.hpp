#pragma once

// Time integration of the collapse master equation
//
//     d rho_ij / dt = -(i/hbar) [H, rho]_ij - rates_ij * rho_ij
//
// with the damping applied elementwise in the basis carried by the rate
// matrix. Fixed-step explicit integrators; the closed-form solution for the
// commuting case serves as the reference.

#include <cstddef>
#include <optional>
#include <vector>

#include "collapse/quantities.hpp"
#include "collapse/statekit.hpp"

namespace collapse {

enum class Method { RK4, Euler };

struct EvolutionConfig {
    /// Steps per fastest timescale when dt is AUTO.
    static constexpr double kAutoStepDivisor = 200.0;
    /// Steps over t_end when there is no finite timescale at all.
    static constexpr double kAutoFallbackSteps = 100.0;

    std::optional<Quantity> dt;  // nullopt selects AUTO
    Quantity t_end{1.0, dims::kTime};
    Method method = Method::RK4;
    std::size_t record_stride = 1;
    double positivity_floor = -1e-10;
    Tolerances tol{};

    void validate() const;
};

struct SampleFlags {
    double trace_drift = 0.0;
    double hermiticity_defect = 0.0;
    double min_eigenvalue = 0.0;
    bool trace_violation = false;
    bool hermiticity_violation = false;
    bool positivity_violation = false;

    bool any() const { return trace_violation || hermiticity_violation || positivity_violation; }
};

struct Trajectory {
    std::vector<Quantity> times;
    std::vector<DensityMatrix> states;
    std::vector<SampleFlags> flags;
    Quantity step{0.0, dims::kTime};
    std::size_t steps = 0;

    std::size_t size() const { return times.size(); }
    const DensityMatrix& final_state() const { return states.back(); }
    bool any_flagged() const;
};

/// Right-hand side of the master equation, in 1/s.
ComplexMatrix derivative(const DensityMatrix& rho, const Hamiltonian& h, const CollapseRateMatrix& rates);

/// min(min finite tau, hbar / max|H_ij|) / kAutoStepDivisor, or the explicit dt.
Quantity resolve_step(const Hamiltonian& h, const CollapseRateMatrix& rates, const EvolutionConfig& cfg);

Trajectory evolve(const DensityMatrix& rho0, const Hamiltonian& h, const CollapseRateMatrix& rates,
                  const EvolutionConfig& cfg);

/// Same as evolve with every rate zero.
Trajectory unitary_baseline(const DensityMatrix& rho0, const Hamiltonian& h, const EvolutionConfig& cfg);

/// rho_ij(0) exp(-t rates_ij); valid when [H, rho] = 0.
DensityMatrix analytic_isolated(const DensityMatrix& rho0, const CollapseRateMatrix& rates, const Quantity& t);

struct ConvergenceReport {
    double order = 0.0;
    double error_coarse = 0.0;
    double error_fine = 0.0;
    Quantity dt_coarse{0.0, dims::kTime};
};

/// Observed order of accuracy on the canned decay problem (equal
/// superposition, H = 0, rate 1/s, t_end = 1 s) from errors at dt and dt/2.
ConvergenceReport convergence_order(Method method, const Quantity& dt_coarse);
ConvergenceReport convergence_order(Method method);

}  // namespace collapse
