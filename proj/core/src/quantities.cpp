#include "collapse/quantities.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace collapse {

namespace {

constexpr std::array<UnitDef, 17> kUnits{{
    {"kg", 1.0, dims::kMass},
    {"GeV/c2", constants::kGeVPerC2InKg, dims::kMass},
    {"MeV/c2", constants::kMeVPerC2InKg, dims::kMass},
    {"m", 1.0, dims::kLength},
    {"um", constants::kMicrometreInM, dims::kLength},
    {"nm", 1e-9, dims::kLength},
    {"s", 1.0, dims::kTime},
    {"us", 1e-6, dims::kTime},
    {"ns", 1e-9, dims::kTime},
    {"m/s", 1.0, dims::kVelocity},
    {"J", 1.0, dims::kEnergy},
    {"eV", constants::kElectronVoltInJ, dims::kEnergy},
    {"rad", 1.0, dims::kNone},
    {"Hz", 1.0, dims::kFrequency},
    {"rad/s", 1.0, dims::kFrequency},
    {"1/s", 1.0, dims::kFrequency},
    {"dimensionless", 1.0, dims::kNone},
}};

struct NamedDimension {
    Dimension dim;
    const char* name;
};

// Preferred spellings for the dimensions that show up in derivations.
constexpr std::array<NamedDimension, 10> kNamed{{
    {dims::kNone, "1"},
    {dims::kMass, "kg"},
    {dims::kLength, "m"},
    {dims::kTime, "s"},
    {dims::kVelocity, "m/s"},
    {dims::kFrequency, "1/s"},
    {dims::kMomentum, "kg m/s"},
    {dims::kEnergy, "J"},
    {dims::kAction, "J s"},
    {dims::kEnergyLength, "J m"},
}};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::string format_number(double value, int significant_digits, bool keep_trailing_zeros) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), keep_trailing_zeros ? "%#.*g" : "%.*g", significant_digits, value);
    return buf;
}

}  // namespace

std::string Dimension::to_string() const {
    for (const auto& named : kNamed) {
        if (named.dim == *this) return named.name;
    }
    std::ostringstream os;
    bool first = true;
    auto term = [&](const char* sym, int exp) {
        if (exp == 0) return;
        if (!first) os << ' ';
        first = false;
        os << sym;
        if (exp != 1) os << '^' << exp;
    };
    term("kg", mass);
    term("m", length);
    term("s", time);
    return os.str();
}

void Quantity::require(const Dimension& expected, std::string_view context) const {
    if (dim_ != expected) {
        throw DimensionError("dimension mismatch in " + std::string(context) + ": have [" +
                             dim_.to_string() + "], expected [" + expected.to_string() + "]");
    }
}

Quantity sqrt(const Quantity& q) {
    const Dimension& d = q.dim();
    if (d.mass % 2 != 0 || d.length % 2 != 0 || d.time % 2 != 0) {
        throw DimensionError("sqrt of a quantity with odd dimension exponents [" + d.to_string() + "]");
    }
    return {std::sqrt(q.value()), Dimension{d.mass / 2, d.length / 2, d.time / 2}};
}

Quantity pow(const Quantity& q, int k) {
    return {std::pow(q.value(), k), q.dim().pow(k)};
}

std::span<const UnitDef> unit_table() { return kUnits; }

const UnitDef& lookup_unit(std::string_view token) {
    for (const auto& u : kUnits) {
        if (u.token == token) return u;
    }
    throw ParseError("unknown unit '" + std::string(token) + "'");
}

Quantity parse_quantity(std::string_view text) {
    const std::string_view s = trim(text);
    if (s.empty()) throw ParseError("empty quantity");

    double number = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, number);
    if (ec != std::errc{} || ptr == first) {
        throw ParseError("malformed number in '" + std::string(s) + "'");
    }
    if (!std::isfinite(number)) {
        throw ParseError("non-finite number in '" + std::string(s) + "'");
    }

    const std::string_view unit = trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
    if (unit.empty()) return Quantity::scalar(number);

    const UnitDef& def = lookup_unit(unit);
    return {number * def.scale, def.dim};
}

std::string format_quantity(const Quantity& q, std::string_view unit, int significant_digits) {
    const UnitDef& def = lookup_unit(unit);
    q.require(def.dim, "format_quantity(" + std::string(unit) + ")");
    return format_number(q.value() / def.scale, significant_digits, true) + " " + std::string(unit);
}

std::string format_quantity_exact(const Quantity& q, std::string_view unit) {
    const UnitDef& def = lookup_unit(unit);
    q.require(def.dim, "format_quantity(" + std::string(unit) + ")");
    return format_number(q.value() / def.scale, 17, false) + " " + std::string(unit);
}

}  // namespace collapse
