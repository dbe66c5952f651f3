#include "hemsflex/hems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hemsflex/errors.hpp"

namespace hemsflex {

void BatteryConfig::validate() const
{
    if (!(capacity > 0.0)) throw ParameterError("battery capacity must be positive");
    if (!(p_charge_max > 0.0) || !(p_discharge_max > 0.0))
        throw ParameterError("battery power limits must be positive");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ParameterError("battery efficiency must lie in (0,1]");
    if (!(soc_min_frac >= 0.0) || soc_min() > soc_init || soc_init > capacity)
        throw ParameterError("battery SoC must satisfy 0 <= soc_min <= soc_init <= capacity");
    if (!(taper_floor > 0.0 && taper_floor <= 1.0)) throw ParameterError("taper_floor must lie in (0,1]");
    if (!(taper_knee > 0.0 && taper_knee < 1.0)) throw ParameterError("taper_knee must lie in (0,1)");
}

void EwhConfig::validate() const
{
    if (!(p_nom > 0.0)) throw ParameterError("EWH nominal power must be positive");
    if (!(thermal_capacity > 0.0)) throw ParameterError("EWH thermal capacity must be positive");
    if (!(theta_min <= theta_init && theta_init <= theta_max))
        throw ParameterError("EWH initial temperature must lie within [theta_min, theta_max]");
    for (double v : draw_profile)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("hot-water draws must be non-negative");
}

void HemsConfig::validate() const
{
    battery.validate();
    ewh.validate();
    if (!(dt > 0.0)) throw ParameterError("time step must be positive");
}

HemsConfig HemsConfig::window(int first, int length) const
{
    if (first < 0 || length < 1 || static_cast<std::size_t>(first + length) > ewh.draw_profile.size())
        throw InputError("window outside the draw profile");
    HemsConfig out = *this;
    out.ewh.draw_profile.assign(ewh.draw_profile.begin() + first, ewh.draw_profile.begin() + first + length);
    return out;
}

std::vector<double> FlexTrajectory::combined() const
{
    std::vector<double> out(p_bat.size());
    for (std::size_t h = 0; h < p_bat.size(); ++h) out[h] = p_bat[h] + p_ewh[h];
    return out;
}

std::vector<double> FlexTrajectory::flattened() const
{
    std::vector<double> out(p_bat);
    out.insert(out.end(), p_ewh.begin(), p_ewh.end());
    return out;
}

FlexTrajectory FlexTrajectory::from_flattened(std::span<const double> values)
{
    if (values.size() % 2 != 0) throw InputError("flattened trajectory must have even length");
    const auto half = values.size() / 2;
    return {{values.begin(), values.begin() + static_cast<std::ptrdiff_t>(half)},
            {values.begin() + static_cast<std::ptrdiff_t>(half), values.end()}};
}

CapacityTracker CapacityTracker::initial(const BatteryConfig& battery)
{
    const double band = battery.soc_max() - battery.soc_min();
    return {band, band};
}

double max_charge_power(double soc, const BatteryConfig& battery)
{
    if (soc < -kConstraintTol || soc > battery.capacity + kConstraintTol)
        throw ParameterError("SoC " + std::to_string(soc) + " outside [0, capacity]");
    const double knee = battery.taper_knee * battery.capacity;
    if (soc <= knee) return battery.p_charge_max;
    const double floor = battery.taper_floor * battery.p_charge_max;
    const double frac = std::min(1.0, (soc - knee) / (battery.capacity - knee));
    return battery.p_charge_max + frac * (floor - battery.p_charge_max);
}

double battery_step(double soc, double p_bat, double dt, const BatteryConfig& battery)
{
    if (p_bat > 0.0) return soc + battery.efficiency * p_bat * dt;
    if (p_bat < 0.0) return soc + p_bat * dt / battery.efficiency;
    return soc;
}

double ewh_step(double theta, double p_ewh, double draw_litres, double dt, const EwhConfig& ewh)
{
    const double losses = ewh.alpha_mag * (theta - ewh.theta_house);
    const double draw = ewh.c_p * draw_litres * (ewh.theta_des - ewh.theta_inl);
    return theta + (dt / ewh.thermal_capacity) * (-losses - draw + p_ewh);
}

CapacityTracker update_capacity(CapacityTracker tracker, double surplus, double p_ewh, const BatteryConfig& battery,
                                double dt)
{
    if (surplus > 0.0) {
        const double net = std::max(0.0, surplus - p_ewh);
        const double take = std::min({net * dt, battery.p_charge_max * dt, tracker.capacity});
        tracker.capacity -= take;
    } else {
        tracker.capacity = std::min(tracker.ceiling, tracker.capacity + battery.p_discharge_max * dt);
    }
    return tracker;
}

PowerBand battery_power_band(double soc, const BatteryConfig& battery, double dt)
{
    const double room_up = std::max(0.0, battery.soc_max() - soc);
    const double room_down = std::max(0.0, soc - battery.soc_min());
    const double charge = std::min(max_charge_power(std::clamp(soc, 0.0, battery.capacity), battery),
                                   room_up / (battery.efficiency * dt));
    const double discharge = std::min(battery.p_discharge_max, room_down * battery.efficiency / dt);
    return {-discharge, charge};
}

void check_trajectory(const FlexTrajectory& traj, std::size_t horizon, const HemsConfig& cfg)
{
    if (traj.p_bat.size() != horizon || traj.p_ewh.size() != horizon)
        throw InputError("trajectory length does not match horizon " + std::to_string(horizon));
    if (cfg.ewh.draw_profile.size() != horizon)
        throw InputError("draw profile length " + std::to_string(cfg.ewh.draw_profile.size()) +
                         " does not match horizon " + std::to_string(horizon));
    for (std::size_t h = 0; h < horizon; ++h) {
        const double p = traj.p_bat[h];
        if (!(p >= -cfg.battery.p_discharge_max - kConstraintTol && p <= cfg.battery.p_charge_max + kConstraintTol))
            throw InputError("battery set-point outside power bounds at step " + std::to_string(h + 1));
        if (traj.p_ewh[h] != 0.0 && traj.p_ewh[h] != cfg.ewh.p_nom)
            throw InputError("EWH set-point must be 0 or p_nom at step " + std::to_string(h + 1));
    }
}

SimulationResult simulate(const FlexTrajectory& traj, std::span<const double> surplus, const HemsConfig& cfg)
{
    const std::size_t horizon = surplus.size();
    check_trajectory(traj, horizon, cfg);
    const auto& bat = cfg.battery;
    const auto& ewh = cfg.ewh;

    SimulationResult result;
    result.soc.resize(horizon);
    result.theta.resize(horizon);
    result.absorbed.resize(horizon);
    result.violations.resize(horizon);

    double soc = bat.soc_init;
    double theta = ewh.theta_init;
    CapacityTracker tracker = CapacityTracker::initial(bat);
    int units = 0;

    for (std::size_t h = 0; h < horizon; ++h) {
        const double before = tracker.capacity;
        tracker = update_capacity(tracker, surplus[h], traj.p_ewh[h], bat, cfg.dt);
        const double absorbed = surplus[h] > 0.0 ? (before - tracker.capacity) / cfg.dt : 0.0;
        const double p_total = traj.p_bat[h] + absorbed;

        auto& v = result.violations[h];
        v.charge_rate = p_total > max_charge_power(std::clamp(soc, 0.0, bat.capacity), bat) + kConstraintTol;
        v.pv_accommodation = absorbed > 0.0 && traj.p_bat[h] < 0.0;

        soc = battery_step(soc, p_total, cfg.dt, bat);
        v.soc_max = soc > bat.soc_max() + kConstraintTol;
        v.soc_min = soc < bat.soc_min() - kConstraintTol;

        theta = ewh_step(theta, traj.p_ewh[h], ewh.draw_profile[h], cfg.dt, ewh);
        v.temperature = theta < ewh.theta_min - kConstraintTol || theta > ewh.theta_max + kConstraintTol;

        result.soc[h] = soc;
        result.theta[h] = theta;
        result.absorbed[h] = absorbed;
        units += v.penalty_units();
        result.pv_violations += v.pv_accommodation;
    }
    result.penalty = units;
    return result;
}

bool pv_accommodation_ok(const FlexTrajectory& traj, std::span<const double> surplus, const HemsConfig& cfg)
{
    check_trajectory(traj, surplus.size(), cfg);
    CapacityTracker tracker = CapacityTracker::initial(cfg.battery);
    for (std::size_t h = 0; h < surplus.size(); ++h) {
        const double before = tracker.capacity;
        tracker = update_capacity(tracker, surplus[h], traj.p_ewh[h], cfg.battery, cfg.dt);
        if (surplus[h] > 0.0 && before - tracker.capacity > 0.0 && traj.p_bat[h] < 0.0) return false;
    }
    return true;
}

FlexTrajectory repair_trajectory(const FlexTrajectory& traj, std::span<const double> surplus, const HemsConfig& cfg)
{
    const auto sim = simulate(traj, surplus, cfg);
    if (sim.penalty > 0.0)
        throw RepairError("repair is only defined for trajectories whose sole violation is PV accommodation");
    FlexTrajectory out = traj;
    for (std::size_t h = 0; h < out.horizon(); ++h)
        if (sim.violations[h].pv_accommodation) out.p_bat[h] = 0.0;
    return out;
}

}  // namespace hemsflex
