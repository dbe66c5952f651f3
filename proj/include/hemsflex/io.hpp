#pragma once

// File formats: CSV for series and trajectory sets, JSON for configuration.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hemsflex/hems.hpp"
#include "hemsflex/scenario.hpp"

namespace hemsflex::io {

namespace fs = std::filesystem;

[[nodiscard]] std::string read_text(const fs::path& path);
/// Writes through a temporary file and renames.
void write_text(const fs::path& path, const std::string& text);

/// CSV with header `t,p,q`; one row per quantile knot.
[[nodiscard]] std::vector<MarginalForecast> read_marginals_csv(const fs::path& path);
void write_marginals_csv(const fs::path& path, const std::vector<MarginalForecast>& marginals);

/// CSV with header `h1..hT`, one scenario per row, kW with 6 decimals.
[[nodiscard]] std::string scenarios_csv(const ScenarioSet& set);
[[nodiscard]] ScenarioSet read_scenarios_csv(const fs::path& path);

/// CSV `h,liters`.
[[nodiscard]] std::vector<double> read_draw_profile_csv(const fs::path& path);
void write_draw_profile_csv(const fs::path& path, const std::vector<double>& litres);

/// `battery` and `ewh` objects; the draw profile lives in its own CSV.
[[nodiscard]] nlohmann::json hems_to_json(const HemsConfig& cfg);
[[nodiscard]] HemsConfig hems_from_json(const nlohmann::json& doc);

struct TrajectoryTable {
    std::vector<FlexTrajectory> trajectories;
    std::vector<int> fitness;  // empty when the file has no fitness column
};

/// Columns `pbat_h1..pbat_hT, pewh_h1..pewh_hT[, fitness]`, full precision.
[[nodiscard]] std::string trajectories_csv(const std::vector<FlexTrajectory>& trajectories,
                                           const std::vector<int>* fitness = nullptr);
[[nodiscard]] TrajectoryTable read_trajectories_csv(const fs::path& path);

}  // namespace hemsflex::io
