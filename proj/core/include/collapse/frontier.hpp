#pragma once

// Parameter sweeps, boundary location and visibility curves built on top of
// the discriminator and the evolver.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "collapse/discriminator.hpp"
#include "collapse/evolver.hpp"
#include "collapse/quantities.hpp"
#include "collapse/serialize.hpp"

namespace collapse {

enum class Scenario { Trapped, FreeFlight, Oscillator };
enum class Spacing { Geometric, Linear };

std::string to_string(Scenario s);
Scenario scenario_from_string(std::string_view s);

/// A sweep produced more than one regime flip.
class SweepError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Named scenario parameters: M, v, D, E, eta (trapped); M, v, D, L, d,
/// theta (free flight); M, omega0, n (oscillator). Free flight derives
/// L = D/theta when only theta is given and defaults d to D/10.
using ParameterSet = std::map<std::string, Quantity>;

/// Expected dimension of a named parameter for a scenario; throws
/// ValidationError for names the scenario does not have.
Dimension parameter_dimension(Scenario scenario, std::string_view name);

TrappedPairSpec make_trapped_spec(const ParameterSet& p);
FreeFlightSpec make_free_flight_spec(const ParameterSet& p);
OscillatorSpec make_oscillator_spec(const ParameterSet& p);
DiscriminationVerdict evaluate(Scenario scenario, const ParameterSet& p);

struct Grid {
    Quantity min;
    Quantity max;
    std::size_t count = 2;
    Spacing spacing = Spacing::Geometric;

    std::vector<Quantity> points() const;
};

struct SweepSpec {
    Scenario scenario = Scenario::Trapped;
    std::string axis;
    Grid grid;
    ParameterSet fixed;

    void validate() const;
};

struct BoundaryRow {
    Quantity axis_value;
    DiscriminationVerdict verdict;
    std::string digest;
};

struct BoundaryReport {
    Scenario scenario = Scenario::Trapped;
    std::string axis;
    std::vector<BoundaryRow> rows;
    std::optional<Quantity> critical_value;
};

/// Compact "symbol=value unit; ..." rendering of a derivation.
std::string derivation_digest(const DiscriminationVerdict& v);

/// Relative bracket width at which bisection stops.
inline constexpr double kBisectionRelTol = 1e-6;

/// Bisects the axis between lo and hi (whose verdicts differ in finiteness)
/// and returns the midpoint of the final bracket.
Quantity bisect_boundary(Scenario scenario, const std::string& axis, const ParameterSet& fixed,
                         Quantity lo, Quantity hi, Spacing spacing = Spacing::Geometric);

/// Index k of the only finite/infinite change between rows k and k+1.
/// Throws SweepError on a second change.
std::optional<std::size_t> single_flip(const std::vector<BoundaryRow>& rows, const std::string& axis);

BoundaryReport sweep(const SweepSpec& spec);

/// Locates the critical mass by scanning decades from 1e-40 kg to 1e40 kg
/// and bisecting the first flip. The report carries the bracketing rows.
BoundaryReport find_critical_mass(Scenario scenario, const ParameterSet& fixed);

Json to_json(const BoundaryReport& report, std::string_view display_unit);
void write_report_csv(std::ostream& os, const BoundaryReport& report, std::string_view display_unit);

struct CurveConfig {
    Quantity t_end{1.0, dims::kTime};
    std::size_t samples = 101;
    Method method = Method::RK4;
    std::optional<Quantity> dt;
};

struct VisibilityCurve {
    std::vector<std::pair<double, double>> points;  // (t in s, visibility)
    Trajectory trajectory;
};

/// Evolves the two-level equal superposition with H = 0 and the verdict's rate.
VisibilityCurve visibility_curve(const DiscriminationVerdict& verdict, const CurveConfig& cfg);
void write_curve_csv(std::ostream& os, const VisibilityCurve& curve);

/// Unit token used to print a dimension when the caller gives none.
std::string default_display_unit(const Dimension& dim);

}  // namespace collapse
