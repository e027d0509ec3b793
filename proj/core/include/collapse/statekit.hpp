#pragma once

// Density matrices, Hamiltonians and pairwise collapse rates over a labeled
// finite basis. Dense storage; the bases in play have at most a few levels.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "collapse/quantities.hpp"

namespace collapse {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

struct BasisLabel {
    std::string name;
    std::size_t index = 0;

    bool operator==(const BasisLabel&) const = default;
};

/// Ordered set of uniquely named states, indexed 0..N-1.
class Basis {
public:
    Basis() = default;
    explicit Basis(const std::vector<std::string>& names);

    /// Labels "0", "1", ..., "N-1".
    static Basis numbered(std::size_t n);
    /// {"here", "there"}.
    static Basis here_there();

    std::size_t size() const { return labels_.size(); }
    const std::vector<BasisLabel>& labels() const { return labels_; }
    const BasisLabel& operator[](std::size_t i) const { return labels_.at(i); }
    std::size_t index_of(std::string_view name) const;
    std::vector<std::string> names() const;

    bool operator==(const Basis&) const = default;

private:
    std::vector<BasisLabel> labels_;
};

struct Tolerances {
    double hermiticity = 1e-12;  // absolute, density matrices
    double trace = 1e-10;
    double positivity = 1e-10;   // smallest eigenvalue >= -positivity
    double hamiltonian_hermiticity = 1e-12;  // relative to max |H_ij|
};

struct Violation {
    enum class Kind { Hermiticity, Trace, Positivity };
    Kind kind;
    double defect;
};

std::string to_string(Violation::Kind kind);

class DensityMatrix {
public:
    /// Shape-checked only; call validate() for the physical invariants.
    DensityMatrix(Basis basis, ComplexMatrix elements);

    const Basis& basis() const { return basis_; }
    const ComplexMatrix& elements() const { return elements_; }
    std::size_t dimension() const { return basis_.size(); }
    Complex operator()(std::size_t i, std::size_t j) const { return elements_(i, j); }

    Complex trace() const { return elements_.trace(); }
    double purity() const;
    double hermiticity_defect() const;
    /// Smallest eigenvalue of the Hermitian part.
    double min_eigenvalue() const;

private:
    Basis basis_;
    ComplexMatrix elements_;
};

class Hamiltonian {
public:
    /// Elements in joules. Throws ValidationError unless Hermitian.
    Hamiltonian(Basis basis, ComplexMatrix elements_joule, const Tolerances& tol = {});

    static Hamiltonian zero(const Basis& basis);
    /// diag(E_0, E_1, ...).
    static Hamiltonian diagonal(const Basis& basis, std::span<const Quantity> energies);
    /// Lab-frame two-level drive (hbar*Omega/2) sigma_x.
    static Hamiltonian rabi_drive(const Basis& basis, const Quantity& rabi_frequency);

    const Basis& basis() const { return basis_; }
    const ComplexMatrix& elements() const { return elements_; }
    /// Largest absolute entry, in joules.
    double max_abs_entry() const;

private:
    Basis basis_;
    ComplexMatrix elements_;
};

/// Pairwise rates 1/tau_ij in 1/s. tau = infinity is stored as rate 0.
class CollapseRateMatrix {
public:
    /// Throws ValidationError unless symmetric, zero-diagonal, finite and >= 0.
    CollapseRateMatrix(Basis basis, RealMatrix rates_per_second);

    static CollapseRateMatrix zero(const Basis& basis);

    const Basis& basis() const { return basis_; }
    const RealMatrix& rates() const { return rates_; }
    double rate(std::size_t i, std::size_t j) const { return rates_(i, j); }
    bool all_zero() const;
    /// Smallest finite tau over all pairs, or nullopt when every rate is 0.
    std::optional<Quantity> min_finite_tau() const;

private:
    Basis basis_;
    RealMatrix rates_;
};

/// |psi><psi| for the normalized amplitude vector.
DensityMatrix pure_state(std::span<const Complex> amplitudes, const Basis& basis);
/// Equal superposition (|0> + |1>)/sqrt(2) over a two-level basis.
DensityMatrix equal_superposition(const Basis& basis);

/// 2|rho_ij|.
double coherence_visibility(const DensityMatrix& rho, std::string_view i, std::string_view j);
double coherence_visibility(const DensityMatrix& rho, std::size_t i, std::size_t j);

/// One entry per violated invariant; empty when rho is a valid state.
std::vector<Violation> validate(const DensityMatrix& rho, const Tolerances& tol = {});

}  // namespace collapse
