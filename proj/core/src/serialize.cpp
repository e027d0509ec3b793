#include "collapse/serialize.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace collapse {

namespace {

Json complex_matrix_to_json(const ComplexMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix complex_matrix_from_json(const Json& rows, std::size_t n) {
    if (!rows.is_array() || rows.size() != n) throw ValidationError("matrix row count does not match basis");
    const auto dim = static_cast<Eigen::Index>(n);
    ComplexMatrix m(dim, dim);
    for (std::size_t i = 0; i < n; ++i) {
        const Json& row = rows[i];
        if (!row.is_array() || row.size() != n) throw ValidationError("matrix column count does not match basis");
        for (std::size_t j = 0; j < n; ++j) {
            const Json& z = row[j];
            if (!z.is_array() || z.size() != 2) throw ValidationError("complex entries must be [re, im] pairs");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = {z[0].get<double>(), z[1].get<double>()};
        }
    }
    return m;
}

void require_schema(const Json& j, std::string_view schema) {
    if (!j.is_object() || !j.contains("schema") || j.at("schema").get<std::string>() != schema) {
        throw ValidationError("expected schema '" + std::string(schema) + "'");
    }
}

Json statekit_header(std::string_view kind, const Basis& basis) {
    return Json{{"schema", "statekit/1"}, {"kind", kind}, {"basis", basis.names()}};
}

Basis basis_from_json(const Json& j, std::string_view kind) {
    require_schema(j, "statekit/1");
    if (j.at("kind").get<std::string>() != kind) {
        throw ValidationError("expected statekit kind '" + std::string(kind) + "'");
    }
    return Basis(j.at("basis").get<std::vector<std::string>>());
}

Regime regime_from_string(const std::string& s) {
    for (Regime r : {Regime::Classical, Regime::Quantum, Regime::Marginal}) {
        if (to_string(r) == s) return r;
    }
    throw ValidationError("unknown regime '" + s + "'");
}

Reason reason_from_string(const std::string& s) {
    for (Reason r : {Reason::WindowClosed, Reason::PhotonFlightTime, Reason::RabiProbeDestroys, Reason::Discriminable}) {
        if (to_string(r) == s) return r;
    }
    throw ValidationError("unknown reason '" + s + "'");
}

}  // namespace

Dimension parse_dimension(std::string_view spelling) {
    static const Dimension kKnown[] = {dims::kNone, dims::kMass, dims::kLength, dims::kTime, dims::kVelocity,
                                       dims::kFrequency, dims::kMomentum, dims::kEnergy, dims::kAction,
                                       dims::kEnergyLength};
    for (const auto& d : kKnown) {
        if (d.to_string() == spelling) return d;
    }
    Dimension d;
    std::istringstream is{std::string(spelling)};
    std::string term;
    while (is >> term) {
        const auto caret = term.find('^');
        const std::string sym = term.substr(0, caret);
        int exp = 1;
        if (caret != std::string::npos) {
            try {
                exp = std::stoi(term.substr(caret + 1));
            } catch (const std::exception&) {
                throw ParseError("bad exponent in dimension '" + std::string(spelling) + "'");
            }
        }
        if (sym == "kg") d.mass += exp;
        else if (sym == "m") d.length += exp;
        else if (sym == "s") d.time += exp;
        else throw ParseError("unknown dimension symbol '" + sym + "'");
    }
    return d;
}

Json to_json(const Quantity& q) { return Json{{"value", q.value()}, {"unit", q.dim().to_string()}}; }

Quantity quantity_from_json(const Json& j) {
    return {j.at("value").get<double>(), parse_dimension(j.at("unit").get<std::string>())};
}

Json to_json(const DensityMatrix& rho) {
    Json j = statekit_header("density_matrix", rho.basis());
    j["unit"] = "1";
    j["elements"] = complex_matrix_to_json(rho.elements());
    return j;
}

Json to_json(const Hamiltonian& h) {
    Json j = statekit_header("hamiltonian", h.basis());
    j["unit"] = "J";
    j["elements"] = complex_matrix_to_json(h.elements());
    return j;
}

Json to_json(const CollapseRateMatrix& rates) {
    Json j = statekit_header("rate_matrix", rates.basis());
    j["unit"] = "1/s";
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < rates.rates().rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < rates.rates().cols(); ++k) row.push_back(rates.rates()(i, k));
        rows.push_back(std::move(row));
    }
    j["elements"] = std::move(rows);
    return j;
}

DensityMatrix density_matrix_from_json(const Json& j) {
    Basis basis = basis_from_json(j, "density_matrix");
    const std::size_t n = basis.size();
    return DensityMatrix(std::move(basis), complex_matrix_from_json(j.at("elements"), n));
}

Hamiltonian hamiltonian_from_json(const Json& j) {
    Basis basis = basis_from_json(j, "hamiltonian");
    const std::size_t n = basis.size();
    return Hamiltonian(std::move(basis), complex_matrix_from_json(j.at("elements"), n));
}

CollapseRateMatrix rate_matrix_from_json(const Json& j) {
    Basis basis = basis_from_json(j, "rate_matrix");
    const auto n = static_cast<Eigen::Index>(basis.size());
    const Json& rows = j.at("elements");
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
        throw ValidationError("rate matrix row count does not match basis");
    }
    RealMatrix r(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw ValidationError("rate matrix column count does not match basis");
        }
        for (Eigen::Index k = 0; k < n; ++k) r(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return CollapseRateMatrix(std::move(basis), std::move(r));
}

Json to_json(const DiscriminationVerdict& v) {
    Json tau{{"unit", "s"}, {"infinite", v.is_infinite()}};
    tau["value"] = v.is_infinite() ? Json(nullptr) : Json(v.tau().value());
    Json derivation = Json::array();
    for (const auto& step : v.derivation()) {
        derivation.push_back({{"symbol", step.symbol}, {"value", step.value.value()}, {"unit", step.value.dim().to_string()}});
    }
    return Json{{"schema", "verdict/1"},
                {"scenario", v.scenario()},
                {"tau", std::move(tau)},
                {"rate", {{"value", v.rate_per_second()}, {"unit", "1/s"}}},
                {"regime", to_string(v.regime())},
                {"reason", to_string(v.reason())},
                {"derivation", std::move(derivation)}};
}

DiscriminationVerdict verdict_from_json(const Json& j) {
    require_schema(j, "verdict/1");
    std::vector<DerivationStep> derivation;
    for (const auto& s : j.at("derivation")) {
        derivation.push_back({s.at("symbol").get<std::string>(), quantity_from_json(s)});
    }
    const auto scenario = j.at("scenario").get<std::string>();
    const Reason reason = reason_from_string(j.at("reason").get<std::string>());
    if (j.at("tau").at("infinite").get<bool>()) {
        return DiscriminationVerdict::infinite(scenario, reason, std::move(derivation));
    }
    const Quantity tau{j.at("tau").at("value").get<double>(), dims::kTime};
    return DiscriminationVerdict::finite(scenario, tau, regime_from_string(j.at("regime").get<std::string>()),
                                         std::move(derivation));
}

Json to_json(const Trajectory& traj, std::size_t i, std::size_t j) {
    Json samples = Json::array();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const SampleFlags& f = traj.flags[k];
        samples.push_back({{"time", to_json(traj.times[k])},
                           {"rho", complex_matrix_to_json(traj.states[k].elements())},
                           {"visibility", {{"value", coherence_visibility(traj.states[k], i, j)}, {"unit", "1"}}},
                           {"min_eigenvalue", {{"value", f.min_eigenvalue}, {"unit", "1"}}},
                           {"trace_drift", {{"value", f.trace_drift}, {"unit", "1"}}},
                           {"flagged", f.any()}});
    }
    const Basis& basis = traj.states.front().basis();
    return Json{{"schema", "trajectory/1"},
                {"basis", basis.names()},
                {"visibility_pair", {basis[i].name, basis[j].name}},
                {"step", to_json(traj.step)},
                {"steps", traj.steps},
                {"samples", std::move(samples)}};
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (k) os << ',';
        os << csv_field(fields[k]);
    }
    os << "\r\n";
}

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t i, std::size_t j) {
    if (traj.size() == 0) throw ValidationError("empty trajectory");
    const Basis& basis = traj.states.front().basis();
    const std::size_t n = basis.size();
    std::vector<std::string> header{"time_s"};
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            const std::string tag = "rho_" + basis[a].name + "_" + basis[b].name;
            header.push_back(tag + "_re");
            header.push_back(tag + "_im");
        }
    }
    header.push_back("visibility_" + basis[i].name + "_" + basis[j].name);
    header.push_back("min_eigenvalue");
    write_csv_row(os, header);

    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& m = traj.states[k].elements();
        std::vector<std::string> row{format_real(traj.times[k].value())};
        for (Eigen::Index a = 0; a < m.rows(); ++a) {
            for (Eigen::Index b = 0; b < m.cols(); ++b) {
                row.push_back(format_real(m(a, b).real()));
                row.push_back(format_real(m(a, b).imag()));
            }
        }
        row.push_back(format_real(coherence_visibility(traj.states[k], i, j)));
        row.push_back(format_real(traj.flags[k].min_eigenvalue));
        write_csv_row(os, row);
    }
}

}  // namespace collapse
