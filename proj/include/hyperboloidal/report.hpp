#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hyperboloidal/config.hpp"
#include "hyperboloidal/verify.hpp"

namespace hyp {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

/// Two-space indented JSON. Floating values are printed with %.17g, non-finite values
/// as null; object keys keep insertion order.
std::string dump_json(const Json& j);

/// Writes to a temporary file in the same directory, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// The fully resolved configuration, including every default.
Json to_json(const RunConfig& c);
Json to_json(const LinearSolveReport& r);
Json to_json(const NewtonReport& r);
Json to_json(const SeedReport& r);
Json to_json(const NormPair& n);
Json to_json(const ConstraintResiduals& r);
Json to_json(const SeedResiduals& r);
Json to_json(const ShearCheck& s);
Json to_json(const CheckEntry& c);
Json to_json(const ConvergenceResult& c);
Json to_json(const PerturbationProbe& p);

/// Radial profile along the axis: r, ρ, φ, λ̄ and σ̄, Σ̄ (radial and tangential components)
/// and the pointwise constraint residuals.
std::string radial_profile_csv(const SeedData& seed, const InitialData& data);

/// problem, quantity, n, h, error and the fitted slope and constant repeated per row.
std::string rate_table_csv(const std::vector<std::pair<std::string, ConvergenceResult>>& results);

/// Legacy VTK structured points over the ball3d lattice with φ, ρ and the Hamiltonian residual
/// (zero outside the interior).
std::string ball_vtk(const InitialData& data);

}  // namespace hyp
