#pragma once

// Discrimination timescales tau_ij.
//
// For each scenario class the functions below decide whether the two states
// can be told apart by a repeatable (non-demolition) readout and, if so, the
// minimal time such a readout takes. That time is the collapse timescale of
// their superposition; an impossible readout means tau = infinity.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "collapse/quantities.hpp"
#include "collapse/statekit.hpp"

namespace collapse {

/// Relative slack applied when comparing the two sides of a deciding
/// inequality, so an instance built exactly on the boundary lands on the
/// finite side regardless of rounding.
inline constexpr double kBoundaryRelTol = 1e-12;

/// A finite verdict is Marginal when its deciding ratio is below this factor.
inline constexpr double kMarginalFactor = 2.0;

enum class Regime { Classical, Quantum, Marginal };
enum class Reason { WindowClosed, PhotonFlightTime, RabiProbeDestroys, Discriminable };

std::string to_string(Regime r);
std::string to_string(Reason r);

struct DerivationStep {
    std::string symbol;
    Quantity value;
};

class DiscriminationVerdict {
public:
    static DiscriminationVerdict finite(std::string scenario, Quantity tau, Regime regime,
                                        std::vector<DerivationStep> derivation);
    static DiscriminationVerdict infinite(std::string scenario, Reason reason,
                                          std::vector<DerivationStep> derivation);

    bool is_infinite() const { return !tau_.has_value(); }
    /// Throws std::bad_optional_access for infinite verdicts.
    const Quantity& tau() const { return tau_.value(); }
    const std::optional<Quantity>& tau_if_finite() const { return tau_; }
    /// 1/tau in 1/s; exactly 0 for tau = infinity.
    double rate_per_second() const;

    Regime regime() const { return regime_; }
    Reason reason() const { return reason_; }
    const std::string& scenario() const { return scenario_; }
    const std::vector<DerivationStep>& derivation() const { return derivation_; }
    /// Looks up a derivation entry by symbol; nullopt when absent.
    std::optional<Quantity> step(std::string_view symbol) const;

private:
    DiscriminationVerdict() = default;

    std::string scenario_;
    std::optional<Quantity> tau_;
    Regime regime_ = Regime::Quantum;
    Reason reason_ = Reason::WindowClosed;
    std::vector<DerivationStep> derivation_;
};

// ---------------------------------------------------------------------------
// Trapped pair: |here> and |there> in two traps a distance D apart, probed by
// a Heisenberg microscope.

struct TrappedPairSpec {
    Quantity mass;
    Quantity velocity;
    Quantity separation;
    std::optional<Quantity> energy_gap;  // defaults to M v^2
    double margin = 1.0;                 // eta >= 1; probe needs hbar*omega <= E/eta

    void validate() const;
    Quantity energy() const;
};

DiscriminationVerdict trapped_tau(const TrappedPairSpec& spec);

/// M* = 4 pi hbar c eta / (D v^2): the mass at which E D = 4 pi hbar c eta, E = M v^2.
Quantity trapped_critical_mass(const Quantity& velocity, const Quantity& separation,
                               double margin = 1.0);

// ---------------------------------------------------------------------------
// Free flight through a double slit, probed by a Doppler speed meter.

struct FreeFlightSpec {
    Quantity mass;
    Quantity speed;
    Quantity slit_separation;  // D
    Quantity source_distance;  // L
    Quantity slit_width;       // d; validated but does not enter tau

    void validate() const;
    Quantity momentum() const { return mass * speed; }
    /// theta = D / L.
    double theta() const;
    Quantity flight_time() const { return source_distance / speed; }
};

/// Velocity resolution c / (2 omega tau) of a photon of duration tau.
Quantity doppler_error(const Quantity& omega, const Quantity& photon_duration);
/// Recoil 2 hbar omega / (c M) imparted by one photon.
Quantity doppler_back_action(const Quantity& omega, const Quantity& mass);

struct DopplerWindow {
    Quantity low;   // 2c/D
    Quantity high;  // sqrt(p c^2 / (2 hbar L))
    bool open = false;
};

DopplerWindow doppler_window(const FreeFlightSpec& spec);
DiscriminationVerdict free_flight_tau(const FreeFlightSpec& spec);

/// M* = 8 hbar / (v theta D).
Quantity free_flight_critical_mass(const Quantity& speed, double theta, const Quantity& slit_separation);

// ---------------------------------------------------------------------------
// Cases with no repeatable discrimination at all.

/// Photon paths: the which-path record cannot complete before the photon arrives.
DiscriminationVerdict photon_tau();
/// Rabi-driven two-level system: resolving the adiabatic states needs a probe
/// far above the resonant gap, which destroys the system.
DiscriminationVerdict rabi_tau(const Quantity& resonant_gap);

// ---------------------------------------------------------------------------
// Harmonic oscillator position, probed by a Heisenberg microscope.

struct OscillatorSpec {
    Quantity mass;
    Quantity angular_frequency;
    std::uint64_t quantum_number = 0;

    void validate() const;
};

/// Zero-point amplitude sqrt(hbar / (2 M omega0)).
Quantity oscillator_ground_amplitude(const Quantity& mass, const Quantity& angular_frequency);
/// n* = (4 pi c / v0)^(2/3).
double oscillator_threshold(const Quantity& ground_velocity);

DiscriminationVerdict oscillator_verdict(const OscillatorSpec& spec);

// ---------------------------------------------------------------------------
// Composition.

/// An entangled whole collapses on the fastest timescale of any subsystem.
DiscriminationVerdict entangled_tau(std::span<const DiscriminationVerdict> subsystems);

using PairVerdicts = std::map<std::pair<std::size_t, std::size_t>, DiscriminationVerdict>;

/// rates[i][j] = rates[j][i] = 1/tau_ij; unspecified pairs are tau = infinity.
CollapseRateMatrix build_rate_matrix(const Basis& basis, const PairVerdicts& pairs);

}  // namespace collapse
