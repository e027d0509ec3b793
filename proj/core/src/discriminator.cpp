#include "collapse/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace collapse {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(const Quantity& q, const Dimension& dim, const char* name) {
    q.require(dim, name);
    if (!std::isfinite(q.value()) || !(q.value() > 0.0)) {
        throw ValidationError(std::string(name) + " must be positive and finite");
    }
}

bool exceeds(const Quantity& lhs, const Quantity& rhs) {
    return lhs > rhs * (1.0 + kBoundaryRelTol);
}

}  // namespace

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Classical: return "Classical";
        case Regime::Quantum: return "Quantum";
        case Regime::Marginal: return "Marginal";
    }
    return "Unknown";
}

std::string to_string(Reason r) {
    switch (r) {
        case Reason::WindowClosed: return "WindowClosed";
        case Reason::PhotonFlightTime: return "PhotonFlightTime";
        case Reason::RabiProbeDestroys: return "RabiProbeDestroys";
        case Reason::Discriminable: return "Discriminable";
    }
    return "Unknown";
}

DiscriminationVerdict DiscriminationVerdict::finite(std::string scenario, Quantity tau, Regime regime,
                                                    std::vector<DerivationStep> derivation) {
    require_positive(tau, dims::kTime, "tau");
    if (regime == Regime::Quantum) {
        throw std::logic_error("a finite collapse time cannot be in the Quantum regime");
    }
    DiscriminationVerdict v;
    v.scenario_ = std::move(scenario);
    v.tau_ = tau;
    v.regime_ = regime;
    v.reason_ = Reason::Discriminable;
    v.derivation_ = std::move(derivation);
    return v;
}

DiscriminationVerdict DiscriminationVerdict::infinite(std::string scenario, Reason reason,
                                                      std::vector<DerivationStep> derivation) {
    if (reason == Reason::Discriminable) {
        throw std::logic_error("an infinite collapse time needs a non-discrimination reason");
    }
    DiscriminationVerdict v;
    v.scenario_ = std::move(scenario);
    v.regime_ = Regime::Quantum;
    v.reason_ = reason;
    v.derivation_ = std::move(derivation);
    return v;
}

double DiscriminationVerdict::rate_per_second() const {
    return tau_ ? 1.0 / tau_->value() : 0.0;
}

std::optional<Quantity> DiscriminationVerdict::step(std::string_view symbol) const {
    for (const auto& s : derivation_) {
        if (s.symbol == symbol) return s.value;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

void TrappedPairSpec::validate() const {
    require_positive(mass, dims::kMass, "mass M");
    require_positive(velocity, dims::kVelocity, "velocity v");
    require_positive(separation, dims::kLength, "separation D");
    if (energy_gap) require_positive(*energy_gap, dims::kEnergy, "energy gap E");
    if (!(margin >= 1.0) || !std::isfinite(margin)) {
        throw ValidationError("margin eta must be >= 1");
    }
}

Quantity TrappedPairSpec::energy() const {
    return energy_gap ? *energy_gap : mass * velocity * velocity;
}

DiscriminationVerdict trapped_tau(const TrappedPairSpec& spec) {
    spec.validate();
    const Quantity& c = constants::c;
    const Quantity& hbar = constants::hbar;

    const Quantity energy = spec.energy();
    // Gentle probe: hbar omega <= E / eta.
    const Quantity omega_max = energy / (hbar * spec.margin);
    // Resolution: D/2 > lambda = 2 pi c / omega.
    const Quantity omega_min = 4.0 * kPi * c / spec.separation;
    const Quantity lambda = 2.0 * kPi * c / omega_max;
    const Quantity ed = energy * spec.separation;
    const Quantity threshold = 4.0 * kPi * hbar * c * spec.margin;
    ed.require(dims::kEnergyLength, "E*D");

    std::vector<DerivationStep> derivation{
        {"E", energy},
        {"omega_min", omega_min},
        {"omega_max", omega_max},
        {"lambda", lambda},
        {"E*D", ed},
        {"4*pi*hbar*c*eta", threshold},
    };

    if (exceeds(omega_min, omega_max)) {
        return DiscriminationVerdict::infinite("trapped", Reason::WindowClosed, std::move(derivation));
    }
    // Send and receive one photon at the highest admissible frequency.
    const Quantity tau = 4.0 * kPi / omega_max;
    tau.require(dims::kTime, "trapped tau");
    const double ratio = (omega_max / omega_min).value();
    const Regime regime = ratio < kMarginalFactor ? Regime::Marginal : Regime::Classical;
    return DiscriminationVerdict::finite("trapped", tau, regime, std::move(derivation));
}

Quantity trapped_critical_mass(const Quantity& velocity, const Quantity& separation, double margin) {
    require_positive(velocity, dims::kVelocity, "velocity v");
    require_positive(separation, dims::kLength, "separation D");
    if (!(margin >= 1.0) || !std::isfinite(margin)) {
        throw ValidationError("margin eta must be >= 1");
    }
    const Quantity m = 4.0 * kPi * constants::hbar * constants::c * margin /
                       (separation * velocity * velocity);
    m.require(dims::kMass, "critical mass");
    return m;
}

// ---------------------------------------------------------------------------

void FreeFlightSpec::validate() const {
    require_positive(mass, dims::kMass, "mass M");
    require_positive(speed, dims::kVelocity, "speed v");
    require_positive(slit_separation, dims::kLength, "slit separation D");
    require_positive(source_distance, dims::kLength, "source distance L");
    require_positive(slit_width, dims::kLength, "slit width d");
    if (!(slit_width < slit_separation)) throw ValidationError("slit width d must be below separation D");
    if (!(slit_separation < source_distance)) throw ValidationError("separation D must be below distance L");
    if (!(speed < constants::c)) throw ValidationError("speed v must be below c");
}

double FreeFlightSpec::theta() const { return (slit_separation / source_distance).si(dims::kNone); }

Quantity doppler_error(const Quantity& omega, const Quantity& photon_duration) {
    require_positive(omega, dims::kFrequency, "omega");
    require_positive(photon_duration, dims::kTime, "photon duration");
    return constants::c / (2.0 * omega * photon_duration);
}

Quantity doppler_back_action(const Quantity& omega, const Quantity& mass) {
    require_positive(omega, dims::kFrequency, "omega");
    require_positive(mass, dims::kMass, "mass M");
    return 2.0 * constants::hbar * omega / (constants::c * mass);
}

DopplerWindow doppler_window(const FreeFlightSpec& spec) {
    spec.validate();
    const Quantity& c = constants::c;
    DopplerWindow w;
    w.low = 2.0 * c / spec.slit_separation;
    w.high = sqrt(spec.momentum() * c * c / (2.0 * constants::hbar * spec.source_distance));
    w.low.require(dims::kFrequency, "omega_low");
    w.high.require(dims::kFrequency, "omega_high");
    w.open = !exceeds(w.low, w.high);
    return w;
}

DiscriminationVerdict free_flight_tau(const FreeFlightSpec& spec) {
    const DopplerWindow window = doppler_window(spec);
    const double theta = spec.theta();
    const Quantity p = spec.momentum();
    const double criterion = (p * spec.slit_separation * theta / (8.0 * constants::hbar)).si(dims::kNone);
    const Quantity flight = spec.flight_time();

    std::vector<DerivationStep> derivation{
        {"p", p},
        {"theta", Quantity::scalar(theta)},
        {"omega_low", window.low},
        {"omega_high", window.high},
        {"p*theta*D/(8*hbar)", Quantity::scalar(criterion)},
        {"L/v", flight},
    };

    if (!window.open) {
        return DiscriminationVerdict::infinite("free-flight", Reason::WindowClosed, std::move(derivation));
    }

    // Shortest photon meeting the resolution Delta v_perp <= v theta / 2 at
    // the top of the window, then doubled for sending and receiving.
    const Quantity photon = constants::c / (window.high * spec.speed * theta);
    const Quantity tau = 2.0 * photon;
    tau.require(dims::kTime, "free-flight tau");
    derivation.push_back({"tau_photon", photon});
    derivation.push_back({"delta_v_perp", doppler_error(window.high, photon)});
    derivation.push_back({"back_action", doppler_back_action(window.high, spec.mass)});

    if (exceeds(tau, flight)) {
        return DiscriminationVerdict::infinite("free-flight", Reason::WindowClosed, std::move(derivation));
    }
    const Regime regime = criterion < kMarginalFactor ? Regime::Marginal : Regime::Classical;
    return DiscriminationVerdict::finite("free-flight", tau, regime, std::move(derivation));
}

Quantity free_flight_critical_mass(const Quantity& speed, double theta, const Quantity& slit_separation) {
    require_positive(speed, dims::kVelocity, "speed v");
    require_positive(slit_separation, dims::kLength, "slit separation D");
    if (!(theta > 0.0) || !(theta < 1.0)) throw ValidationError("theta must lie in (0, 1)");
    const Quantity m = 8.0 * constants::hbar / (speed * theta * slit_separation);
    m.require(dims::kMass, "critical mass");
    return m;
}

// ---------------------------------------------------------------------------

DiscriminationVerdict photon_tau() {
    return DiscriminationVerdict::infinite("photon", Reason::PhotonFlightTime, {});
}

DiscriminationVerdict rabi_tau(const Quantity& resonant_gap) {
    require_positive(resonant_gap, dims::kEnergy, "resonant gap");
    return DiscriminationVerdict::infinite("rabi", Reason::RabiProbeDestroys,
                                           {{"omega_12", resonant_gap / constants::hbar}});
}

// ---------------------------------------------------------------------------

void OscillatorSpec::validate() const {
    require_positive(mass, dims::kMass, "mass M");
    require_positive(angular_frequency, dims::kFrequency, "angular frequency omega0");
}

Quantity oscillator_ground_amplitude(const Quantity& mass, const Quantity& angular_frequency) {
    require_positive(mass, dims::kMass, "mass M");
    require_positive(angular_frequency, dims::kFrequency, "angular frequency omega0");
    const Quantity r0 = sqrt(constants::hbar / (2.0 * mass * angular_frequency));
    r0.require(dims::kLength, "r0");
    return r0;
}

double oscillator_threshold(const Quantity& ground_velocity) {
    require_positive(ground_velocity, dims::kVelocity, "ground-state velocity v0");
    const double ratio = (4.0 * kPi * constants::c / ground_velocity).si(dims::kNone);
    return std::cbrt(ratio * ratio);
}

DiscriminationVerdict oscillator_verdict(const OscillatorSpec& spec) {
    spec.validate();
    const Quantity r0 = oscillator_ground_amplitude(spec.mass, spec.angular_frequency);
    const Quantity v0 = r0 * spec.angular_frequency;
    const double n_star = oscillator_threshold(v0);
    const double n = static_cast<double>(spec.quantum_number);
    const Quantity vn = v0 * std::sqrt(n);

    std::vector<DerivationStep> derivation{
        {"r0", r0},
        {"v0", v0},
        {"n_star", Quantity::scalar(n_star)},
        {"n", Quantity::scalar(n)},
        {"v_n", vn},
    };

    if (spec.quantum_number == 0 || n <= n_star) {
        return DiscriminationVerdict::infinite("oscillator", Reason::WindowClosed, std::move(derivation));
    }
    // Microscope on the amplitude sqrt(n) r0 with a probe below n hbar omega0.
    const Quantity omega_min = 4.0 * kPi * constants::c / (std::sqrt(n) * r0);
    const Quantity omega_max = n * spec.angular_frequency;
    derivation.push_back({"omega_min", omega_min});
    derivation.push_back({"omega_max", omega_max});
    const Quantity tau = 4.0 * kPi / omega_max;
    const Regime regime = n / n_star < kMarginalFactor ? Regime::Marginal : Regime::Classical;
    return DiscriminationVerdict::finite("oscillator", tau, regime, std::move(derivation));
}

// ---------------------------------------------------------------------------

DiscriminationVerdict entangled_tau(std::span<const DiscriminationVerdict> subsystems) {
    if (subsystems.empty()) throw ValidationError("entangled_tau needs at least one subsystem verdict");
    const DiscriminationVerdict* best = nullptr;
    for (const auto& v : subsystems) {
        if (v.is_infinite()) continue;
        if (best == nullptr || v.tau() < best->tau()) best = &v;
    }
    return best != nullptr ? *best : subsystems.front();
}

CollapseRateMatrix build_rate_matrix(const Basis& basis, const PairVerdicts& pairs) {
    const std::size_t n = basis.size();
    RealMatrix rates = RealMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [key, verdict] : pairs) {
        auto [i, j] = key;
        if (i == j) throw ValidationError("verdict keyed on a diagonal pair (" + std::to_string(i) + ", " +
                                          std::to_string(i) + ")");
        if (i >= n || j >= n) throw ValidationError("verdict pair index out of range");
        if (!seen.insert(std::minmax(i, j)).second) {
            throw ValidationError("pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") given twice");
        }
        const double r = verdict.rate_per_second();
        rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
        rates(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
    }
    return CollapseRateMatrix(basis, std::move(rates));
}

}  // namespace collapse
