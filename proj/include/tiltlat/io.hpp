#pragma once

// Text formats: CSV series, density dumps, scan tables and the JSON
// experiment config. Doubles are written as the shortest decimal that reads
// back to the same value, so output bytes depend only on the numbers.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tiltlat/experiment.hpp"

namespace tiltlat {

[[nodiscard]] std::string format_double(double v);

inline constexpr std::string_view kSeriesHeader = "t,t_over_TJ,x,sigma,sigma2,stderr_sigma2";
inline constexpr std::string_view kDensityHeader = "l,P";

/// Rows of t, t / T_J, x, sigma, sigma^2 and the standard error of sigma^2.
void write_series_csv(std::ostream& out, const ObservableSeries& series);
void write_density_csv(std::ostream& out, SiteRange window, const std::vector<double>& density);
/// density_t<t>.csv with t in shortest round-trip form.
[[nodiscard]] std::string density_filename(double time);
/// Header `omega,sigma,stderr_sigma` or `Fomega_over_F,sigma,stderr_sigma`.
void write_scan_csv(std::ostream& out, const ScanTable& table);

/// Serializes the config, including the code version and scheme name.
[[nodiscard]] std::string config_to_json(const ExperimentConfig& cfg);
/// Parses a config. Unknown keys, wrong types and invalid values raise
/// ConfigError naming the offending key.
[[nodiscard]] ExperimentConfig config_from_json(std::string_view text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes config.json plus, per run, <label>/series.csv and its density
/// files, and per scan <label>/scan.csv. Returns the files written.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir,
                                                 const ExperimentConfig& cfg,
                                                 const ExperimentResult& result);

}  // namespace tiltlat
