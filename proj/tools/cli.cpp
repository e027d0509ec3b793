#include "cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "collapse/discriminator.hpp"
#include "collapse/evolver.hpp"
#include "collapse/frontier.hpp"
#include "collapse/quantities.hpp"
#include "collapse/serialize.hpp"
#include "collapse/statekit.hpp"

namespace collapse::cli {

namespace {

// Bad flag values (unknown units, wrong dimension) are usage errors.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Quantity quantity_flag(const std::string& text, const Dimension& dim, const std::string& flag) {
    try {
        Quantity q = parse_quantity(text);
        q.require(dim, flag);
        return q;
    } catch (const ParseError& e) {
        throw UsageError(flag + ": " + e.what());
    } catch (const DimensionError& e) {
        throw UsageError(flag + ": " + e.what());
    }
}

void check_unit(const std::string& unit, const Dimension& dim, const std::string& flag) {
    try {
        const UnitDef& def = lookup_unit(unit);
        if (def.dim != dim) {
            throw UsageError(flag + ": unit '" + unit + "' has dimension [" + def.dim.to_string() + "], expected [" +
                             dim.to_string() + "]");
        }
    } catch (const ParseError& e) {
        throw UsageError(flag + ": " + e.what());
    }
}

struct Common {
    bool json = false;
    std::string out_path;
    std::string unit;
    double eta = 1.0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_flag("--json", c.json, "Emit JSON instead of text/CSV");
    app->add_option("--out", c.out_path, "Write output to PATH instead of stdout");
    app->add_option("--unit", c.unit, "Output unit for the reported quantity");
    app->add_option("--eta", c.eta, "Margin factor for strong inequalities (trapped scenarios)")
        ->check(CLI::Range(1.0, 1e300));
}

// Raw flag text for the scenario parameters shared by `tau` and `curve`.
struct ScenarioFlags {
    std::string mass, velocity, separation, energy, distance, width, theta, gap, omega0;
    std::uint64_t n = 0;
};

void add_trapped_flags(CLI::App* app, ScenarioFlags& f) {
    app->add_option("--M", f.mass, "Mass")->required();
    app->add_option("--v", f.velocity, "Mean velocity")->required();
    app->add_option("--D", f.separation, "Trap separation")->required();
    app->add_option("--E", f.energy, "Energy gap (default M v^2)");
}

void add_free_flight_flags(CLI::App* app, ScenarioFlags& f) {
    app->add_option("--M", f.mass, "Mass")->required();
    app->add_option("--v", f.velocity, "Speed")->required();
    app->add_option("--D", f.separation, "Slit separation")->required();
    auto* l = app->add_option("--L", f.distance, "Source-to-plate distance");
    auto* t = app->add_option("--theta", f.theta, "Angle D/L (alternative to --L)");
    l->excludes(t);
    app->add_option("--d", f.width, "Slit width (default D/10)");
}

void add_oscillator_flags(CLI::App* app, ScenarioFlags& f) {
    app->add_option("--M", f.mass, "Mass")->required();
    app->add_option("--omega0", f.omega0, "Angular frequency")->required();
    app->add_option("--n", f.n, "Quantum number");
}

ParameterSet trapped_params(const ScenarioFlags& f, const Common& c) {
    ParameterSet p{{"M", quantity_flag(f.mass, dims::kMass, "--M")},
                   {"v", quantity_flag(f.velocity, dims::kVelocity, "--v")},
                   {"D", quantity_flag(f.separation, dims::kLength, "--D")},
                   {"eta", Quantity::scalar(c.eta)}};
    if (!f.energy.empty()) p["E"] = quantity_flag(f.energy, dims::kEnergy, "--E");
    return p;
}

ParameterSet free_flight_params(const ScenarioFlags& f) {
    ParameterSet p{{"M", quantity_flag(f.mass, dims::kMass, "--M")},
                   {"v", quantity_flag(f.velocity, dims::kVelocity, "--v")},
                   {"D", quantity_flag(f.separation, dims::kLength, "--D")}};
    if (!f.distance.empty()) p["L"] = quantity_flag(f.distance, dims::kLength, "--L");
    if (!f.theta.empty()) p["theta"] = quantity_flag(f.theta, dims::kNone, "--theta");
    if (f.distance.empty() && f.theta.empty()) throw UsageError("free-flight needs --L or --theta");
    if (!f.width.empty()) p["d"] = quantity_flag(f.width, dims::kLength, "--d");
    return p;
}

ParameterSet oscillator_params(const ScenarioFlags& f) {
    return {{"M", quantity_flag(f.mass, dims::kMass, "--M")},
            {"omega0", quantity_flag(f.omega0, dims::kFrequency, "--omega0")},
            {"n", Quantity::scalar(static_cast<double>(f.n))}};
}

Method method_from(const std::string& s) { return s == "euler" ? Method::Euler : Method::RK4; }

void print_verdict(std::ostream& os, const DiscriminationVerdict& v, const std::string& tau_unit) {
    os << "scenario: " << v.scenario() << '\n';
    os << "tau: " << (v.is_infinite() ? std::string("infinite") : format_quantity(v.tau(), tau_unit)) << '\n';
    os << "regime: " << to_string(v.regime()) << '\n';
    os << "reason: " << to_string(v.reason()) << '\n';
    if (!v.derivation().empty()) {
        os << "derivation:\n";
        for (const auto& s : v.derivation()) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.6g", s.value.value());
            os << "  " << s.symbol << " = " << buf;
            const std::string unit = s.value.dim().to_string();
            if (unit != "1") os << ' ' << unit;
            os << '\n';
        }
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Collapse timescales and quantum/classical boundaries", "collapse"};
    app.require_subcommand(1);

    std::function<void(std::ostream&)> action;
    Common common;
    ScenarioFlags flags;

    // boundary -------------------------------------------------------------
    auto* boundary = app.add_subcommand("boundary", "Locate the critical mass of a scenario");
    boundary->require_subcommand(1);
    std::string b_velocity, b_separation, b_theta, b_width;
    auto boundary_action = [&](Scenario scenario) {
        return [&, scenario](std::ostream& os) {
            const std::string unit = common.unit.empty() ? "GeV/c2" : common.unit;
            check_unit(unit, dims::kMass, "--unit");
            ParameterSet fixed{{"v", quantity_flag(b_velocity, dims::kVelocity, "--v")},
                               {"D", quantity_flag(b_separation, dims::kLength, "--D")}};
            Quantity closed_form;
            if (scenario == Scenario::Trapped) {
                fixed["eta"] = Quantity::scalar(common.eta);
                closed_form = trapped_critical_mass(fixed.at("v"), fixed.at("D"), common.eta);
            } else {
                const Quantity theta = quantity_flag(b_theta, dims::kNone, "--theta");
                fixed["theta"] = theta;
                if (!b_width.empty()) fixed["d"] = quantity_flag(b_width, dims::kLength, "--d");
                closed_form = free_flight_critical_mass(fixed.at("v"), theta.value(), fixed.at("D"));
            }
            const BoundaryReport report = find_critical_mass(scenario, fixed);
            if (!report.critical_value) throw ValidationError("no quantum/classical boundary between 1e-40 and 1e40 kg");
            if (common.json) {
                Json j = to_json(report, unit);
                j["closed_form"] = {{"value", closed_form.value() / lookup_unit(unit).scale}, {"unit", unit}};
                os << j.dump(2) << '\n';
            } else {
                os << "scenario: " << to_string(scenario) << '\n';
                os << "critical mass: " << format_quantity(*report.critical_value, unit) << '\n';
                os << "closed form:   " << format_quantity(closed_form, unit) << '\n';
            }
        };
    };
    auto* b_trapped = boundary->add_subcommand("trapped", "Trapped pair |here>/|there>");
    b_trapped->add_option("--v", b_velocity, "Mean velocity")->required();
    b_trapped->add_option("--D", b_separation, "Trap separation")->required();
    add_common(b_trapped, common);
    b_trapped->callback([&] { action = boundary_action(Scenario::Trapped); });

    auto* b_free = boundary->add_subcommand("free-flight", "Double-slit flight paths");
    b_free->add_option("--v", b_velocity, "Speed")->required();
    b_free->add_option("--theta", b_theta, "Angle spanned by the paths")->required();
    b_free->add_option("--D", b_separation, "Slit separation")->required();
    b_free->add_option("--d", b_width, "Slit width (default D/10)");
    add_common(b_free, common);
    b_free->callback([&] { action = boundary_action(Scenario::FreeFlight); });

    // tau ------------------------------------------------------------------
    auto* tau = app.add_subcommand("tau", "Discrimination timescale for one scenario");
    tau->require_subcommand(1);
    auto emit_verdict = [&](std::ostream& os, const DiscriminationVerdict& v) {
        const std::string unit = common.unit.empty() ? "s" : common.unit;
        check_unit(unit, dims::kTime, "--unit");
        if (common.json) {
            os << to_json(v).dump(2) << '\n';
        } else {
            print_verdict(os, v, unit);
        }
    };

    auto* t_trapped = tau->add_subcommand("trapped", "Trapped pair");
    add_trapped_flags(t_trapped, flags);
    add_common(t_trapped, common);
    t_trapped->callback([&] {
        action = [&](std::ostream& os) { emit_verdict(os, evaluate(Scenario::Trapped, trapped_params(flags, common))); };
    });

    auto* t_free = tau->add_subcommand("free-flight", "Double-slit flight paths");
    add_free_flight_flags(t_free, flags);
    add_common(t_free, common);
    t_free->callback([&] {
        action = [&](std::ostream& os) { emit_verdict(os, evaluate(Scenario::FreeFlight, free_flight_params(flags))); };
    });

    auto* t_photon = tau->add_subcommand("photon", "Photon paths");
    add_common(t_photon, common);
    t_photon->callback([&] { action = [&](std::ostream& os) { emit_verdict(os, photon_tau()); }; });

    auto* t_rabi = tau->add_subcommand("rabi", "Rabi-driven two-level system");
    t_rabi->add_option("--gap", flags.gap, "Resonant energy gap |E2 - E1|")->required();
    add_common(t_rabi, common);
    t_rabi->callback([&] {
        action = [&](std::ostream& os) { emit_verdict(os, rabi_tau(quantity_flag(flags.gap, dims::kEnergy, "--gap"))); };
    });

    auto* t_osc = tau->add_subcommand("oscillator", "Mechanical oscillator position");
    add_oscillator_flags(t_osc, flags);
    add_common(t_osc, common);
    t_osc->callback([&] {
        action = [&](std::ostream& os) { emit_verdict(os, evaluate(Scenario::Oscillator, oscillator_params(flags))); };
    });

    // evolve ---------------------------------------------------------------
    auto* evolve_cmd = app.add_subcommand("evolve", "Integrate a two-level state and export the trajectory");
    std::string e_rate = "0 1/s", e_t_end = "1 s", e_dt, e_gap, e_rabi, e_method = "rk4", e_initial = "superposition";
    std::size_t e_stride = 1;
    evolve_cmd->add_option("--rate", e_rate, "Collapse rate 1/tau between the two states");
    evolve_cmd->add_option("--t-end", e_t_end, "Integration end time");
    evolve_cmd->add_option("--dt", e_dt, "Step size (default AUTO)");
    evolve_cmd->add_option("--method", e_method, "Integrator")->check(CLI::IsMember({"rk4", "euler"}));
    evolve_cmd->add_option("--stride", e_stride, "Record every N-th step")->check(CLI::PositiveNumber);
    evolve_cmd->add_option("--gap", e_gap, "Energy splitting: H = diag(0, E)");
    evolve_cmd->add_option("--rabi", e_rabi, "Rabi drive frequency: H = (hbar Omega / 2) sigma_x");
    evolve_cmd->add_option("--initial", e_initial, "Initial state")->check(CLI::IsMember({"superposition", "ground"}));
    add_common(evolve_cmd, common);
    evolve_cmd->callback([&] {
        action = [&](std::ostream& os) {
            const Basis basis = Basis::here_there();
            RealMatrix r = RealMatrix::Zero(2, 2);
            r(0, 1) = r(1, 0) = quantity_flag(e_rate, dims::kFrequency, "--rate").value();
            const CollapseRateMatrix rates(basis, r);

            if (!e_gap.empty() && !e_rabi.empty()) throw UsageError("--gap and --rabi are mutually exclusive");
            Hamiltonian h = Hamiltonian::zero(basis);
            if (!e_gap.empty()) {
                const Quantity energies[] = {Quantity{0.0, dims::kEnergy}, quantity_flag(e_gap, dims::kEnergy, "--gap")};
                h = Hamiltonian::diagonal(basis, energies);
            } else if (!e_rabi.empty()) {
                h = Hamiltonian::rabi_drive(basis, quantity_flag(e_rabi, dims::kFrequency, "--rabi"));
            }

            const Complex ground[] = {1.0, 0.0};
            const DensityMatrix rho0 = e_initial == "ground" ? pure_state(ground, basis) : equal_superposition(basis);

            EvolutionConfig cfg;
            cfg.t_end = quantity_flag(e_t_end, dims::kTime, "--t-end");
            if (!e_dt.empty()) cfg.dt = quantity_flag(e_dt, dims::kTime, "--dt");
            cfg.method = method_from(e_method);
            cfg.record_stride = e_stride;
            const Trajectory traj = evolve(rho0, h, rates, cfg);
            if (common.json) {
                os << to_json(traj).dump(2) << '\n';
            } else {
                write_trajectory_csv(os, traj);
            }
        };
    });

    // sweep ----------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a scenario along one parameter axis");
    std::string s_scenario, s_axis, s_min, s_max, s_spacing;
    std::size_t s_count = 0;
    std::vector<std::string> s_set;
    sweep_cmd->add_option("--scenario", s_scenario, "Scenario")
        ->required()
        ->check(CLI::IsMember({"trapped", "free-flight", "oscillator"}));
    sweep_cmd->add_option("--axis", s_axis, "Parameter to vary")->required();
    sweep_cmd->add_option("--min", s_min, "Grid start")->required();
    sweep_cmd->add_option("--max", s_max, "Grid end")->required();
    sweep_cmd->add_option("--count", s_count, "Number of grid points")->required()->check(CLI::Range(2, 1000000));
    sweep_cmd->add_option("--spacing", s_spacing, "geometric (default for dimensional axes) or linear")
        ->check(CLI::IsMember({"geometric", "linear"}));
    sweep_cmd->add_option("--set", s_set, "Fixed parameter NAME=QUANTITY (repeatable)");
    add_common(sweep_cmd, common);
    sweep_cmd->callback([&] {
        action = [&](std::ostream& os) {
            SweepSpec spec;
            spec.scenario = scenario_from_string(s_scenario);
            spec.axis = s_axis;
            Dimension axis_dim;
            try {
                axis_dim = parameter_dimension(spec.scenario, s_axis);
            } catch (const ValidationError& e) {
                throw UsageError(std::string("--axis: ") + e.what());
            }
            spec.grid.min = quantity_flag(s_min, axis_dim, "--min");
            spec.grid.max = quantity_flag(s_max, axis_dim, "--max");
            spec.grid.count = s_count;
            // Angles and pure numbers default to linear grids.
            const bool linear = s_spacing.empty() ? axis_dim.dimensionless() : s_spacing == "linear";
            spec.grid.spacing = linear ? Spacing::Linear : Spacing::Geometric;
            for (const auto& kv : s_set) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw UsageError("--set expects NAME=QUANTITY, got '" + kv + "'");
                const std::string name = kv.substr(0, eq);
                Dimension d;
                try {
                    d = parameter_dimension(spec.scenario, name);
                } catch (const ValidationError& e) {
                    throw UsageError(std::string("--set: ") + e.what());
                }
                spec.fixed[name] = quantity_flag(kv.substr(eq + 1), d, "--set " + name);
            }
            if (spec.scenario == Scenario::Trapped && !spec.fixed.count("eta") && s_axis != "eta") {
                spec.fixed["eta"] = Quantity::scalar(common.eta);
            }
            const std::string unit = common.unit.empty() ? default_display_unit(axis_dim) : common.unit;
            check_unit(unit, axis_dim, "--unit");
            const BoundaryReport report = sweep(spec);
            if (common.json) {
                os << to_json(report, unit).dump(2) << '\n';
            } else {
                write_report_csv(os, report, unit);
            }
        };
    });

    // curve ----------------------------------------------------------------
    auto* curve_cmd = app.add_subcommand("curve", "Visibility decay of the equal superposition for a scenario");
    curve_cmd->require_subcommand(1);
    std::string c_t_end, c_method = "rk4";
    std::size_t c_samples = 101;
    auto add_curve_flags = [&](CLI::App* sub) {
        sub->add_option("--t-end", c_t_end, "End time (default: flight time, 5 tau, or 1 s)");
        sub->add_option("--samples", c_samples, "Number of output samples")->check(CLI::Range(2, 100000000));
        sub->add_option("--method", c_method, "Integrator")->check(CLI::IsMember({"rk4", "euler"}));
        add_common(sub, common);
    };
    auto run_curve = [&](std::ostream& os, const DiscriminationVerdict& v, std::optional<Quantity> default_end) {
        CurveConfig cfg;
        cfg.samples = c_samples;
        cfg.method = method_from(c_method);
        if (!c_t_end.empty()) {
            cfg.t_end = quantity_flag(c_t_end, dims::kTime, "--t-end");
        } else if (default_end) {
            cfg.t_end = *default_end;
        } else {
            cfg.t_end = v.is_infinite() ? Quantity{1.0, dims::kTime} : v.tau() * 5.0;
        }
        const VisibilityCurve curve = visibility_curve(v, cfg);
        if (common.json) {
            Json pts = Json::array();
            for (const auto& [t, vis] : curve.points) {
                pts.push_back({{"time", {{"value", t}, {"unit", "s"}}}, {"visibility", {{"value", vis}, {"unit", "1"}}}});
            }
            os << Json{{"schema", "curve/1"}, {"verdict", to_json(v)}, {"points", std::move(pts)}}.dump(2) << '\n';
        } else {
            write_curve_csv(os, curve);
        }
    };

    auto* c_trapped = curve_cmd->add_subcommand("trapped", "Trapped pair");
    add_trapped_flags(c_trapped, flags);
    add_curve_flags(c_trapped);
    c_trapped->callback([&] {
        action = [&](std::ostream& os) {
            run_curve(os, evaluate(Scenario::Trapped, trapped_params(flags, common)), std::nullopt);
        };
    });
    auto* c_free = curve_cmd->add_subcommand("free-flight", "Double-slit flight paths");
    add_free_flight_flags(c_free, flags);
    add_curve_flags(c_free);
    c_free->callback([&] {
        action = [&](std::ostream& os) {
            const ParameterSet p = free_flight_params(flags);
            run_curve(os, evaluate(Scenario::FreeFlight, p), make_free_flight_spec(p).flight_time());
        };
    });
    auto* c_photon = curve_cmd->add_subcommand("photon", "Photon paths");
    add_curve_flags(c_photon);
    c_photon->callback([&] { action = [&](std::ostream& os) { run_curve(os, photon_tau(), std::nullopt); }; });
    auto* c_rabi = curve_cmd->add_subcommand("rabi", "Rabi-driven two-level system");
    c_rabi->add_option("--gap", flags.gap, "Resonant energy gap")->required();
    add_curve_flags(c_rabi);
    c_rabi->callback([&] {
        action = [&](std::ostream& os) {
            run_curve(os, rabi_tau(quantity_flag(flags.gap, dims::kEnergy, "--gap")), std::nullopt);
        };
    });
    auto* c_osc = curve_cmd->add_subcommand("oscillator", "Mechanical oscillator");
    add_oscillator_flags(c_osc, flags);
    add_curve_flags(c_osc);
    c_osc->callback([&] {
        action = [&](std::ostream& os) {
            run_curve(os, evaluate(Scenario::Oscillator, oscillator_params(flags)), std::nullopt);
        };
    });

    // ----------------------------------------------------------------------
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    }

    if (!action) {
        err << "error: no command given\n";
        return kExitUsage;
    }

    try {
        std::ostringstream buffer;
        action(buffer);
        if (common.out_path.empty()) {
            out << buffer.str();
        } else {
            std::ofstream file(common.out_path, std::ios::binary);
            if (!file) {
                err << "error: cannot open " << common.out_path << " for writing\n";
                return kExitComputation;
            }
            file << buffer.str();
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitComputation;
    }
}

}  // namespace collapse::cli
