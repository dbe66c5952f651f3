// Reference feasibility check. Written against the configuration structs only,
// so that it can be compared against hems_model::simulate.

#include <algorithm>

#include "hemsflex/analysis.hpp"
#include "hemsflex/errors.hpp"

namespace hemsflex {

bool oracle_compliant(const FlexTrajectory& traj, std::span<const double> net_load, const HemsConfig& cfg)
{
    const std::size_t n = net_load.size();
    if (traj.p_bat.size() != n || traj.p_ewh.size() != n || cfg.ewh.draw_profile.size() != n)
        throw InputError("oracle: dimension mismatch");

    const BatteryConfig& b = cfg.battery;
    const EwhConfig& w = cfg.ewh;
    const double dt = cfg.dt;
    const double lo_soc = b.soc_min_frac * b.capacity;
    const double band = b.capacity - lo_soc;
    const double eps = kConstraintTol;

    double e = b.soc_init;
    double temp = w.theta_init;
    double room = band;  // PV headroom still owed to the customer

    for (std::size_t k = 0; k < n; ++k) {
        const double pv = net_load[k] < 0.0 ? -net_load[k] : 0.0;
        const double heater = traj.p_ewh[k];

        double absorb = 0.0;
        if (pv > 0.0) {
            double energy = pv - heater;
            if (energy < 0.0) energy = 0.0;
            energy *= dt;
            if (energy > b.p_charge_max * dt) energy = b.p_charge_max * dt;
            if (energy > room) energy = room;
            room -= energy;
            absorb = energy / dt;
            if (absorb > 0.0 && traj.p_bat[k] < 0.0) return false;  // discharging into a surplus
        } else {
            room += b.p_discharge_max * dt;
            if (room > band) room = band;
        }

        const double power = traj.p_bat[k] + absorb;

        double limit = b.p_charge_max;
        const double knee = b.taper_knee * b.capacity;
        const double e_clamped = std::min(std::max(e, 0.0), b.capacity);
        if (e_clamped > knee) {
            const double slope = b.p_charge_max * (1.0 - b.taper_floor) / (b.capacity - knee);
            limit = b.p_charge_max - slope * (e_clamped - knee);
        }
        if (power > limit + eps) return false;

        if (power > 0.0)
            e += power * dt * b.efficiency;
        else if (power < 0.0)
            e += power * dt / b.efficiency;
        if (e > b.capacity + eps || e < lo_soc - eps) return false;

        const double gain = heater - w.alpha_mag * (temp - w.theta_house) -
                            w.c_p * w.draw_profile[k] * (w.theta_des - w.theta_inl);
        temp += gain * dt / w.thermal_capacity;
        if (temp > w.theta_max + eps || temp < w.theta_min - eps) return false;
    }
    return true;
}

int oracle_check(const FlexTrajectory& traj, const ScenarioSet& scenarios, const HemsConfig& cfg)
{
    int ok = 0;
    std::vector<double> row(static_cast<std::size_t>(scenarios.horizon()));
    for (int m = 0; m < scenarios.count(); ++m) {
        for (int k = 0; k < scenarios.horizon(); ++k) row[static_cast<std::size_t>(k)] = scenarios.values(m, k);
        if (oracle_compliant(traj, row, cfg)) ++ok;
    }
    return ok;
}

}  // namespace hemsflex
