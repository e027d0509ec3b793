#include "collapse/frontier.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace collapse {

namespace {

const Quantity& require_param(const ParameterSet& p, const char* name) {
    auto it = p.find(name);
    if (it == p.end()) throw ValidationError(std::string("missing parameter '") + name + "'");
    return it->second;
}

std::optional<Quantity> optional_param(const ParameterSet& p, const char* name) {
    auto it = p.find(name);
    if (it == p.end()) return std::nullopt;
    return it->second;
}

void check_names(Scenario scenario, const ParameterSet& p) {
    for (const auto& [name, value] : p) value.require(parameter_dimension(scenario, name), "parameter " + name);
}

ParameterSet with_axis(ParameterSet p, const std::string& axis, const Quantity& value) {
    p[axis] = value;
    return p;
}

bool is_integer_axis(Scenario scenario, std::string_view axis) {
    return scenario == Scenario::Oscillator && axis == "n";
}

std::string short_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5g", x);
    return buf;
}

Json tau_json(const DiscriminationVerdict& v) {
    Json tau{{"unit", "s"}, {"infinite", v.is_infinite()}};
    tau["value"] = v.is_infinite() ? Json(nullptr) : Json(v.tau().value());
    return tau;
}

double in_unit(const Quantity& q, std::string_view unit) {
    const UnitDef& def = lookup_unit(unit);
    q.require(def.dim, "display unit " + std::string(unit));
    return q.value() / def.scale;
}

}  // namespace

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::Trapped: return "trapped";
        case Scenario::FreeFlight: return "free-flight";
        case Scenario::Oscillator: return "oscillator";
    }
    return "unknown";
}

Scenario scenario_from_string(std::string_view s) {
    if (s == "trapped") return Scenario::Trapped;
    if (s == "free-flight") return Scenario::FreeFlight;
    if (s == "oscillator") return Scenario::Oscillator;
    throw ValidationError("unknown scenario '" + std::string(s) + "'");
}

Dimension parameter_dimension(Scenario scenario, std::string_view name) {
    if (name == "M") return dims::kMass;
    switch (scenario) {
        case Scenario::Trapped:
            if (name == "v") return dims::kVelocity;
            if (name == "D") return dims::kLength;
            if (name == "E") return dims::kEnergy;
            if (name == "eta") return dims::kNone;
            break;
        case Scenario::FreeFlight:
            if (name == "v") return dims::kVelocity;
            if (name == "D" || name == "L" || name == "d") return dims::kLength;
            if (name == "theta") return dims::kNone;
            break;
        case Scenario::Oscillator:
            if (name == "omega0") return dims::kFrequency;
            if (name == "n") return dims::kNone;
            break;
    }
    throw ValidationError("scenario " + to_string(scenario) + " has no parameter '" + std::string(name) + "'");
}

TrappedPairSpec make_trapped_spec(const ParameterSet& p) {
    check_names(Scenario::Trapped, p);
    TrappedPairSpec spec{require_param(p, "M"), require_param(p, "v"), require_param(p, "D"),
                         optional_param(p, "E"), 1.0};
    if (auto eta = optional_param(p, "eta")) spec.margin = eta->value();
    return spec;
}

FreeFlightSpec make_free_flight_spec(const ParameterSet& p) {
    check_names(Scenario::FreeFlight, p);
    const Quantity& slits = require_param(p, "D");
    const auto distance = optional_param(p, "L");
    const auto theta = optional_param(p, "theta");
    if (distance && theta) throw ValidationError("give either L or theta, not both");
    if (!distance && !theta) throw ValidationError("missing parameter 'L' (or 'theta')");
    const Quantity l = distance ? *distance : slits / theta->value();
    const Quantity d = optional_param(p, "d").value_or(slits / 10.0);
    return FreeFlightSpec{require_param(p, "M"), require_param(p, "v"), slits, l, d};
}

OscillatorSpec make_oscillator_spec(const ParameterSet& p) {
    check_names(Scenario::Oscillator, p);
    std::uint64_t n = 0;
    if (auto q = optional_param(p, "n")) {
        const double x = q->value();
        if (!(x >= 0.0) || x != std::floor(x) || x > 1.8e19) {
            throw ValidationError("quantum number n must be a nonnegative integer");
        }
        n = static_cast<std::uint64_t>(x);
    }
    return OscillatorSpec{require_param(p, "M"), require_param(p, "omega0"), n};
}

DiscriminationVerdict evaluate(Scenario scenario, const ParameterSet& p) {
    switch (scenario) {
        case Scenario::Trapped: return trapped_tau(make_trapped_spec(p));
        case Scenario::FreeFlight: return free_flight_tau(make_free_flight_spec(p));
        case Scenario::Oscillator: return oscillator_verdict(make_oscillator_spec(p));
    }
    throw ValidationError("unknown scenario");
}

std::vector<Quantity> Grid::points() const {
    std::vector<Quantity> out;
    out.reserve(count);
    const double lo = min.value();
    const double hi = max.value();
    for (std::size_t k = 0; k < count; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(count - 1);
        double x = spacing == Spacing::Geometric ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
        if (k == 0) x = lo;
        if (k + 1 == count) x = hi;
        out.emplace_back(x, min.dim());
    }
    return out;
}

void SweepSpec::validate() const {
    const Dimension dim = parameter_dimension(scenario, axis);
    grid.min.require(dim, "grid minimum for axis " + axis);
    grid.max.require(dim, "grid maximum for axis " + axis);
    if (grid.count < 2) throw ValidationError("grid needs at least two points");
    if (!(grid.min < grid.max)) throw ValidationError("grid minimum must be below maximum");
    if (grid.spacing == Spacing::Geometric && !(grid.min.value() > 0.0)) {
        throw ValidationError("geometric grid needs a positive minimum");
    }
    if (fixed.count(axis)) throw ValidationError("axis '" + axis + "' is also given as a fixed parameter");
    check_names(scenario, fixed);
}

std::string derivation_digest(const DiscriminationVerdict& v) {
    std::string out;
    for (const auto& s : v.derivation()) {
        if (!out.empty()) out += "; ";
        out += s.symbol + "=" + short_number(s.value.value());
        const std::string unit = s.value.dim().to_string();
        if (unit != "1") out += " " + unit;
    }
    return out;
}

Quantity bisect_boundary(Scenario scenario, const std::string& axis, const ParameterSet& fixed, Quantity lo,
                         Quantity hi, Spacing spacing) {
    if (hi < lo) std::swap(lo, hi);
    auto infinite_at = [&](double x) {
        return evaluate(scenario, with_axis(fixed, axis, Quantity{x, lo.dim()})).is_infinite();
    };
    double a = lo.value();
    double b = hi.value();
    const bool side_a = infinite_at(a);
    if (side_a == infinite_at(b)) {
        throw ValidationError("bisection bracket does not straddle a regime flip");
    }

    if (is_integer_axis(scenario, axis)) {
        // Smallest integer on the upper side of the flip.
        a = std::floor(a);
        b = std::ceil(b);
        while (b - a > 1.0) {
            const double mid = std::floor(0.5 * (a + b));
            (infinite_at(mid) == side_a ? a : b) = mid;
        }
        return Quantity{b, lo.dim()};
    }

    const bool geometric = spacing == Spacing::Geometric && a > 0.0;
    for (int iter = 0; iter < 400; ++iter) {
        const double width = b - a;
        if (width <= kBisectionRelTol * std::max(std::abs(a), std::abs(b))) break;
        const double mid = geometric ? std::sqrt(a) * std::sqrt(b) : a + 0.5 * width;
        if (mid <= a || mid >= b) break;
        (infinite_at(mid) == side_a ? a : b) = mid;
    }
    const double mid = geometric ? std::sqrt(a) * std::sqrt(b) : a + 0.5 * (b - a);
    return Quantity{mid, lo.dim()};
}

std::optional<std::size_t> single_flip(const std::vector<BoundaryRow>& rows, const std::string& axis) {
    std::optional<std::size_t> flip;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        if (rows[k].verdict.is_infinite() == rows[k + 1].verdict.is_infinite()) continue;
        if (flip) {
            throw SweepError("regime flips more than once along " + axis + "; second flip between " +
                             short_number(rows[k].axis_value.value()) + " and " +
                             short_number(rows[k + 1].axis_value.value()) + " " +
                             rows[k].axis_value.dim().to_string());
        }
        flip = k;
    }
    return flip;
}

BoundaryReport sweep(const SweepSpec& spec) {
    spec.validate();
    BoundaryReport report;
    report.scenario = spec.scenario;
    report.axis = spec.axis;

    for (const Quantity& x : spec.grid.points()) {
        DiscriminationVerdict v = evaluate(spec.scenario, with_axis(spec.fixed, spec.axis, x));
        std::string digest = derivation_digest(v);
        report.rows.push_back({x, std::move(v), std::move(digest)});
    }

    const std::optional<std::size_t> flip = single_flip(report.rows, spec.axis);
    if (flip) {
        report.critical_value = bisect_boundary(spec.scenario, spec.axis, spec.fixed, report.rows[*flip].axis_value,
                                                report.rows[*flip + 1].axis_value, spec.grid.spacing);
    }
    return report;
}

BoundaryReport find_critical_mass(Scenario scenario, const ParameterSet& fixed) {
    if (fixed.count("M")) throw ValidationError("mass must not be fixed when searching for the critical mass");
    BoundaryReport report;
    report.scenario = scenario;
    report.axis = "M";

    auto at = [&](double kg) {
        const Quantity m{kg, dims::kMass};
        return BoundaryRow{m, evaluate(scenario, with_axis(fixed, "M", m)), {}};
    };

    BoundaryRow prev = at(1e-40);
    for (int e = -39; e <= 40; ++e) {
        BoundaryRow next = at(std::pow(10.0, e));
        if (next.verdict.is_infinite() != prev.verdict.is_infinite()) {
            report.critical_value = bisect_boundary(scenario, "M", fixed, prev.axis_value, next.axis_value);
            prev.digest = derivation_digest(prev.verdict);
            next.digest = derivation_digest(next.verdict);
            report.rows.push_back(std::move(prev));
            report.rows.push_back(std::move(next));
            return report;
        }
        prev = std::move(next);
    }
    return report;
}

Json to_json(const BoundaryReport& report, std::string_view display_unit) {
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"axis_value", {{"value", in_unit(r.axis_value, display_unit)}, {"unit", display_unit}}},
                        {"tau", tau_json(r.verdict)},
                        {"regime", to_string(r.verdict.regime())},
                        {"reason", to_string(r.verdict.reason())},
                        {"derivation_digest", r.digest}});
    }
    Json critical = nullptr;
    if (report.critical_value) {
        critical = {{"value", in_unit(*report.critical_value, display_unit)}, {"unit", display_unit}};
    }
    return Json{{"schema", "report/1"},
                {"scenario", to_string(report.scenario)},
                {"axis", {{"name", report.axis}, {"unit", display_unit}}},
                {"rows", std::move(rows)},
                {"critical_value", std::move(critical)}};
}

void write_report_csv(std::ostream& os, const BoundaryReport& report, std::string_view display_unit) {
    write_csv_row(os, {report.axis + "_" + std::string(display_unit), "tau_s", "regime", "reason", "derivation"});
    for (const auto& r : report.rows) {
        write_csv_row(os, {format_real(in_unit(r.axis_value, display_unit)),
                           r.verdict.is_infinite() ? "inf" : format_real(r.verdict.tau().value()),
                           to_string(r.verdict.regime()), to_string(r.verdict.reason()), r.digest});
    }
}

VisibilityCurve visibility_curve(const DiscriminationVerdict& verdict, const CurveConfig& cfg) {
    if (cfg.samples < 2) throw ValidationError("a curve needs at least two samples");
    const Basis basis = Basis::here_there();
    const DensityMatrix rho0 = equal_superposition(basis);
    const Hamiltonian h = Hamiltonian::zero(basis);
    const CollapseRateMatrix rates = build_rate_matrix(basis, {{{0, 1}, verdict}});

    EvolutionConfig ecfg;
    ecfg.dt = cfg.dt;
    ecfg.t_end = cfg.t_end;
    ecfg.method = cfg.method;
    const double dt = resolve_step(h, rates, ecfg).value();
    const double steps = std::max(1.0, std::ceil(cfg.t_end.value() / dt - 1e-9));
    ecfg.record_stride = static_cast<std::size_t>(std::max(1.0, std::floor(steps / static_cast<double>(cfg.samples - 1))));

    VisibilityCurve curve;
    curve.trajectory = evolve(rho0, h, rates, ecfg);
    for (std::size_t k = 0; k < curve.trajectory.size(); ++k) {
        curve.points.emplace_back(curve.trajectory.times[k].value(),
                                  coherence_visibility(curve.trajectory.states[k], 0, 1));
    }
    return curve;
}

void write_curve_csv(std::ostream& os, const VisibilityCurve& curve) {
    write_csv_row(os, {"time_s", "visibility"});
    for (const auto& [t, v] : curve.points) write_csv_row(os, {format_real(t), format_real(v)});
}

std::string default_display_unit(const Dimension& dim) {
    if (dim == dims::kMass) return "GeV/c2";
    if (dim == dims::kLength) return "m";
    if (dim == dims::kTime) return "s";
    if (dim == dims::kVelocity) return "m/s";
    if (dim == dims::kFrequency) return "rad/s";
    if (dim == dims::kEnergy) return "J";
    if (dim == dims::kNone) return "dimensionless";
    throw ValidationError("no display unit for dimension [" + dim.to_string() + "]");
}

}  // namespace collapse
