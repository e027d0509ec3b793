#include "collapse/statekit.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <unordered_set>

namespace collapse {

Basis::Basis(const std::vector<std::string>& names) {
    if (names.empty()) throw ValidationError("basis must contain at least one state");
    std::unordered_set<std::string> seen;
    labels_.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].empty()) throw ValidationError("basis label must be non-empty");
        if (!seen.insert(names[i]).second) {
            throw ValidationError("duplicate basis label '" + names[i] + "'");
        }
        labels_.push_back({names[i], i});
    }
}

Basis Basis::numbered(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(std::to_string(i));
    return Basis(names);
}

Basis Basis::here_there() { return Basis({"here", "there"}); }

std::size_t Basis::index_of(std::string_view name) const {
    for (const auto& l : labels_) {
        if (l.name == name) return l.index;
    }
    throw ValidationError("label '" + std::string(name) + "' is not in the basis");
}

std::vector<std::string> Basis::names() const {
    std::vector<std::string> out;
    out.reserve(labels_.size());
    for (const auto& l : labels_) out.push_back(l.name);
    return out;
}

std::string to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::Hermiticity: return "HermiticityDefect";
        case Violation::Kind::Trace: return "TraceDefect";
        case Violation::Kind::Positivity: return "PositivityDefect";
    }
    return "Unknown";
}

// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(Basis basis, ComplexMatrix elements)
    : basis_(std::move(basis)), elements_(std::move(elements)) {
    const auto n = static_cast<Eigen::Index>(basis_.size());
    if (elements_.rows() != n || elements_.cols() != n) {
        throw ValidationError("density matrix shape does not match basis of size " +
                              std::to_string(basis_.size()));
    }
}

double DensityMatrix::purity() const {
    // tr(rho^2) = sum_ij rho_ij rho_ji
    return (elements_ * elements_).trace().real();
}

double DensityMatrix::hermiticity_defect() const {
    return (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    const ComplexMatrix herm = 0.5 * (elements_ + elements_.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------

Hamiltonian::Hamiltonian(Basis basis, ComplexMatrix elements_joule, const Tolerances& tol)
    : basis_(std::move(basis)), elements_(std::move(elements_joule)) {
    const auto n = static_cast<Eigen::Index>(basis_.size());
    if (elements_.rows() != n || elements_.cols() != n) {
        throw ValidationError("Hamiltonian shape does not match basis");
    }
    if (!elements_.allFinite()) throw ValidationError("Hamiltonian has non-finite entries");
    const double scale = max_abs_entry();
    if (scale > 0.0) {
        const double defect = (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff() / scale;
        if (defect > tol.hamiltonian_hermiticity) {
            throw ValidationError("Hamiltonian is not Hermitian (relative defect " +
                                  std::to_string(defect) + ")");
        }
    }
}

Hamiltonian Hamiltonian::zero(const Basis& basis) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    return Hamiltonian(basis, ComplexMatrix::Zero(n, n));
}

Hamiltonian Hamiltonian::diagonal(const Basis& basis, std::span<const Quantity> energies) {
    if (energies.size() != basis.size()) {
        throw ValidationError("diagonal Hamiltonian needs one energy per basis state");
    }
    const auto n = static_cast<Eigen::Index>(basis.size());
    ComplexMatrix h = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        h(k, k) = energies[static_cast<std::size_t>(k)].si(dims::kEnergy);
    }
    return Hamiltonian(basis, std::move(h));
}

Hamiltonian Hamiltonian::rabi_drive(const Basis& basis, const Quantity& rabi_frequency) {
    if (basis.size() != 2) throw ValidationError("Rabi drive needs a two-level basis");
    const double half = 0.5 * constants::hbar.value() * rabi_frequency.si(dims::kFrequency);
    ComplexMatrix h(2, 2);
    h << 0.0, half, half, 0.0;
    return Hamiltonian(basis, std::move(h));
}

double Hamiltonian::max_abs_entry() const {
    return elements_.size() == 0 ? 0.0 : elements_.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

CollapseRateMatrix::CollapseRateMatrix(Basis basis, RealMatrix rates_per_second)
    : basis_(std::move(basis)), rates_(std::move(rates_per_second)) {
    const auto n = static_cast<Eigen::Index>(basis_.size());
    if (rates_.rows() != n || rates_.cols() != n) {
        throw ValidationError("rate matrix shape does not match basis");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (rates_(i, i) != 0.0) throw ValidationError("rate matrix diagonal must be zero");
        for (Eigen::Index j = 0; j < n; ++j) {
            const double r = rates_(i, j);
            if (!std::isfinite(r) || r < 0.0) {
                throw ValidationError("collapse rates must be finite and nonnegative");
            }
            if (r != rates_(j, i)) throw ValidationError("rate matrix must be symmetric");
        }
    }
}

CollapseRateMatrix CollapseRateMatrix::zero(const Basis& basis) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    return CollapseRateMatrix(basis, RealMatrix::Zero(n, n));
}

bool CollapseRateMatrix::all_zero() const { return (rates_.array() == 0.0).all(); }

std::optional<Quantity> CollapseRateMatrix::min_finite_tau() const {
    if (all_zero()) return std::nullopt;
    return Quantity{1.0 / rates_.maxCoeff(), dims::kTime};
}

// ---------------------------------------------------------------------------

DensityMatrix pure_state(std::span<const Complex> amplitudes, const Basis& basis) {
    if (amplitudes.empty()) throw ValidationError("amplitude vector is empty");
    if (amplitudes.size() != basis.size()) {
        throw ValidationError("amplitude count " + std::to_string(amplitudes.size()) +
                              " does not match basis size " + std::to_string(basis.size()));
    }
    Eigen::VectorXcd psi(static_cast<Eigen::Index>(amplitudes.size()));
    for (std::size_t k = 0; k < amplitudes.size(); ++k) {
        psi(static_cast<Eigen::Index>(k)) = amplitudes[k];
    }
    const double norm = psi.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw ValidationError("amplitude vector must be finite and not all zero");
    }
    psi /= norm;
    return DensityMatrix(basis, psi * psi.adjoint());
}

DensityMatrix equal_superposition(const Basis& basis) {
    if (basis.size() != 2) throw ValidationError("equal superposition needs a two-level basis");
    const Complex a{1.0 / std::sqrt(2.0), 0.0};
    const Complex amps[] = {a, a};
    return pure_state(amps, basis);
}

double coherence_visibility(const DensityMatrix& rho, std::size_t i, std::size_t j) {
    if (i >= rho.dimension() || j >= rho.dimension()) {
        throw ValidationError("basis index out of range");
    }
    if (i == j) throw ValidationError("visibility needs two distinct states");
    return 2.0 * std::abs(rho(i, j));
}

double coherence_visibility(const DensityMatrix& rho, std::string_view i, std::string_view j) {
    return coherence_visibility(rho, rho.basis().index_of(i), rho.basis().index_of(j));
}

std::vector<Violation> validate(const DensityMatrix& rho, const Tolerances& tol) {
    std::vector<Violation> out;
    if (!rho.elements().allFinite()) {
        // Nothing else is meaningful; report every invariant as violated.
        const double inf = std::numeric_limits<double>::infinity();
        return {{Violation::Kind::Hermiticity, inf},
                {Violation::Kind::Trace, inf},
                {Violation::Kind::Positivity, inf}};
    }
    const double herm = rho.hermiticity_defect();
    if (herm > tol.hermiticity) out.push_back({Violation::Kind::Hermiticity, herm});
    const double trace = std::abs(rho.trace() - 1.0);
    if (trace > tol.trace) out.push_back({Violation::Kind::Trace, trace});
    const double min_ev = rho.min_eigenvalue();
    if (min_ev < -tol.positivity) out.push_back({Violation::Kind::Positivity, -min_ev});
    return out;
}

}  // namespace collapse
