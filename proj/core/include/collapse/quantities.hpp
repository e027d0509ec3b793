#pragma once

// Unit-safe physical quantities.
//
// Every value is held in SI base scale (kg, m, s) together with its integer
// dimension exponents. Particle-physics units (GeV/c2, eV, ...) only exist at
// the parse/format boundary.

#include <cmath>
#include <compare>
#include <span>
#include <string>
#include <string_view>

#include "collapse/errors.hpp"

namespace collapse {

struct Dimension {
    int mass = 0;
    int length = 0;
    int time = 0;

    constexpr bool operator==(const Dimension&) const = default;

    constexpr Dimension operator*(const Dimension& o) const {
        return {mass + o.mass, length + o.length, time + o.time};
    }
    constexpr Dimension operator/(const Dimension& o) const {
        return {mass - o.mass, length - o.length, time - o.time};
    }
    constexpr Dimension pow(int k) const { return {mass * k, length * k, time * k}; }
    constexpr bool dimensionless() const { return mass == 0 && length == 0 && time == 0; }

    /// Canonical SI spelling, e.g. "J m", "kg m^2 s^-1", "1".
    std::string to_string() const;
};

namespace dims {
inline constexpr Dimension kNone{0, 0, 0};
inline constexpr Dimension kMass{1, 0, 0};
inline constexpr Dimension kLength{0, 1, 0};
inline constexpr Dimension kTime{0, 0, 1};
inline constexpr Dimension kVelocity = kLength / kTime;
inline constexpr Dimension kFrequency = kNone / kTime;
inline constexpr Dimension kMomentum = kMass * kVelocity;
inline constexpr Dimension kEnergy = kMass * kVelocity.pow(2);
inline constexpr Dimension kAction = kEnergy * kTime;
inline constexpr Dimension kEnergyLength = kEnergy * kLength;
}  // namespace dims

class Quantity {
public:
    constexpr Quantity() = default;
    constexpr Quantity(double value, Dimension dim) : value_(value), dim_(dim) {}

    static constexpr Quantity scalar(double v) { return {v, dims::kNone}; }

    constexpr double value() const { return value_; }
    constexpr const Dimension& dim() const { return dim_; }

    /// Value in SI base scale after checking the dimension.
    double si(const Dimension& expected) const {
        require(expected, "si()");
        return value_;
    }

    void require(const Dimension& expected, std::string_view context) const;

    Quantity operator+(const Quantity& o) const {
        o.require(dim_, "addition");
        return {value_ + o.value_, dim_};
    }
    Quantity operator-(const Quantity& o) const {
        o.require(dim_, "subtraction");
        return {value_ - o.value_, dim_};
    }
    constexpr Quantity operator-() const { return {-value_, dim_}; }
    constexpr Quantity operator*(const Quantity& o) const { return {value_ * o.value_, dim_ * o.dim_}; }
    constexpr Quantity operator/(const Quantity& o) const { return {value_ / o.value_, dim_ / o.dim_}; }
    constexpr Quantity operator*(double k) const { return {value_ * k, dim_}; }
    constexpr Quantity operator/(double k) const { return {value_ / k, dim_}; }
    friend constexpr Quantity operator*(double k, const Quantity& q) { return q * k; }
    friend constexpr Quantity operator/(double k, const Quantity& q) {
        return {k / q.value_, dims::kNone / q.dim_};
    }

    // Only defined for matching dimensions; mismatches throw DimensionError.
    std::partial_ordering operator<=>(const Quantity& o) const {
        o.require(dim_, "comparison");
        return value_ <=> o.value_;
    }
    bool operator==(const Quantity& o) const {
        o.require(dim_, "comparison");
        return value_ == o.value_;
    }

private:
    double value_ = 0.0;
    Dimension dim_{};
};

/// Square root; every exponent of q's dimension must be even.
Quantity sqrt(const Quantity& q);
Quantity pow(const Quantity& q, int k);

namespace constants {
inline constexpr Quantity hbar{1.054571817e-34, dims::kAction};
inline constexpr Quantity c{2.99792458e8, dims::kVelocity};
inline constexpr double kGeVPerC2InKg = 1.78266192e-27;
inline constexpr double kMeVPerC2InKg = 1.78266192e-30;
inline constexpr double kElectronVoltInJ = 1.602176634e-19;
inline constexpr double kMicrometreInM = 1e-6;
}  // namespace constants

struct UnitDef {
    std::string_view token;
    double scale;  // SI value of one unit
    Dimension dim;
};

/// Supported unit tokens, exact spellings.
std::span<const UnitDef> unit_table();
const UnitDef& lookup_unit(std::string_view token);

/// Parses "<number><space?><unit>". A bare number is dimensionless.
Quantity parse_quantity(std::string_view text);

/// Formats q in `unit` with `significant_digits` significant digits,
/// e.g. "5.0000 GeV/c2". Throws DimensionError when q does not match unit.
std::string format_quantity(const Quantity& q, std::string_view unit, int significant_digits = 5);

/// Shortest-unambiguous formatting (17 significant digits) that round-trips
/// through parse_quantity.
std::string format_quantity_exact(const Quantity& q, std::string_view unit);

}  // namespace collapse
