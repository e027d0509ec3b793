#pragma once

// JSON and CSV encodings.
//
// Schemas (see schemas/ at the repository root):
//   statekit/1    density matrices, Hamiltonians, rate matrices
//   verdict/1     a discrimination verdict with its derivation
//   trajectory/1  sampled density matrices over time
// Quantities are always written as {"value": <SI number>, "unit": <SI spelling>}.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "collapse/discriminator.hpp"
#include "collapse/evolver.hpp"
#include "collapse/statekit.hpp"

namespace collapse {

using Json = nlohmann::ordered_json;

/// Inverse of Dimension::to_string.
Dimension parse_dimension(std::string_view spelling);

Json to_json(const Quantity& q);
Quantity quantity_from_json(const Json& j);

Json to_json(const DensityMatrix& rho);
Json to_json(const Hamiltonian& h);
Json to_json(const CollapseRateMatrix& rates);
DensityMatrix density_matrix_from_json(const Json& j);
Hamiltonian hamiltonian_from_json(const Json& j);
CollapseRateMatrix rate_matrix_from_json(const Json& j);

Json to_json(const DiscriminationVerdict& v);
DiscriminationVerdict verdict_from_json(const Json& j);

/// Visibility is reported for the pair (i, j).
Json to_json(const Trajectory& traj, std::size_t i = 0, std::size_t j = 1);

/// One RFC-4180 field, quoted when needed.
std::string csv_field(std::string_view s);
/// Writes one CRLF-terminated record.
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);
/// Header plus one row per sample: time_s, re/im of every element in
/// row-major order, visibility of (i, j), min_eigenvalue.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t i = 0, std::size_t j = 1);

/// %.17g; enough digits to round-trip a double.
std::string format_real(double x);

}  // namespace collapse
