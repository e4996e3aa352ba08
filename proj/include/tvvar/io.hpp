#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tvvar/dmd.hpp"
#include "tvvar/model.hpp"

namespace tvvar {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t file_digest(const std::filesystem::path& path);
std::string hex_digest(std::uint64_t digest);

// Factor export: W.csv, V.csv, X.csv, G.csv under `dir`. Returns the file
// names written (relative to dir).
std::vector<std::string> write_factor_csvs(const std::filesystem::path& dir, const FactorSet<double>& f);

// {N, T, d, R, objective_trace, sweeps_run, converged}
nlohmann::json factor_manifest(const FactorSet<double>& f, const FitReport& report);

// Reads the four CSVs; shapes come from manifest.json in the same directory.
FactorSet<double> read_factors(const std::filesystem::path& dir);

// DMD export: modes.csv (N x 2R), temporal.csv ((T-1) x 2R) with columns
// (Re k, Im k) per mode, and eigenvalues.csv (R rows: Re, Im, growth, frequency).
std::vector<std::string> write_dmd_csvs(const std::filesystem::path& dir, const DmdResult<double>& r,
                                        double dt);
nlohmann::json dmd_manifest(const DmdResult<double>& r, double dt);

// Writes `j` with sorted keys and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

} // namespace tvvar
