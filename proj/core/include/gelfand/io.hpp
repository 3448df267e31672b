#pragma once

// Run artifacts: diagnostic series as CSV, snapshot states as raw binary with
// a JSON header, and atomically written JSON documents.

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gelfand/galerkin.hpp"
#include "gelfand/noise.hpp"

namespace gelfand {

inline constexpr std::array<const char*, 6> kSeriesColumns{"t",        "h_norm",   "v_norm", "v_alpha_integral",
                                                           "envelope", "margin"};

struct SeriesRow {
    double t = 0.0;
    double h_norm = 0.0;
    double v_norm = 0.0;
    double v_alpha_integral = 0.0;
    double envelope = 0.0;
    double margin = 0.0;
};

std::vector<SeriesRow> series_rows(const Trajectory& traj);

/// Header plus one row per snapshot, 17 significant digits, '.' decimal separator.
std::string format_series_csv(const Trajectory& traj);
std::vector<SeriesRow> parse_series_csv(std::string_view text);

/// 17 significant digits, enough to round-trip any double.
std::string format_number(double x);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory and renames it into place.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc);

/// states.bin holds the snapshot coefficients as little-endian float64, row-major
/// [snapshot][coefficient]; states.json describes shape, times and the space.
void write_states(const std::filesystem::path& dir, const SpectralSpace& space, const Trajectory& traj);
std::vector<std::vector<double>> read_states(const std::filesystem::path& dir);

std::string format_convergence_csv(const std::vector<ConvergenceRow>& rows);
std::string format_dependence_csv(const DependenceReport& rep);
/// Per-path series for an ensemble: path, t, h_norm, v_norm.
std::string format_ensemble_csv(const EnsembleResult& ens);

/// A gnuplot script plotting the series CSV files in `dir`.
std::string gnuplot_script(const std::filesystem::path& dir);

}  // namespace gelfand
