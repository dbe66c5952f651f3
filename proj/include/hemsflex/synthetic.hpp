#pragma once

// Synthetic example instance used by the shipped data files, the tests and
// the acceptance suite. The profiles are made up; they only mimic the shape
// of a residential day with a PV surplus in the late morning.

#include <vector>

#include "hemsflex/hems.hpp"
#include "hemsflex/scenario.hpp"

namespace hemsflex::synthetic {

/// Median net-load (kW) at hour-of-day `t`.
[[nodiscard]] double median_net_load(double t);

/// Quantile knots at p = 0.05, 0.10, ..., 0.95 for each 15-min step of a day
/// (or `horizon` steps of `dt` hours starting at midnight).
[[nodiscard]] std::vector<MarginalForecast> marginals(int horizon = 96, double dt = 0.25);

/// Hot-water draws in litres per step: morning and evening peaks.
[[nodiscard]] std::vector<double> draw_profile(int horizon = 96, double dt = 0.25);

/// Battery 3.2 kWh / 1.5 kW / 92.5 %, SoC 60 % initial and 15 % minimum,
/// EWH 0.5 kW between 45 and 80 degC starting at 60 degC, 15-min steps.
[[nodiscard]] HemsConfig reference_config(int horizon = 96);

/// Hourly battery-only case: 3.2 kWh, 0.64 kWh initial, 0.48 kWh minimum,
/// +-1.5 kW, efficiency neglected. The EWH is present but idle and drawless.
[[nodiscard]] HemsConfig worked_example_config(int horizon = 3);

}  // namespace hemsflex::synthetic
