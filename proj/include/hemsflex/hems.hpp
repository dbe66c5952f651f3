#pragma once

// Physical model of the household's flexible assets: a battery with an
// SoC-dependent charge limit and an on/off electric water heater (EWH).

#include <span>
#include <vector>

namespace hemsflex {

/// Absolute slack used by every constraint comparison.
inline constexpr double kConstraintTol = 1e-9;

struct BatteryConfig {
    double capacity = 3.2;         // kWh, also the maximum SoC
    double p_charge_max = 1.5;     // kW
    double p_discharge_max = 1.5;  // kW, positive magnitude
    double efficiency = 0.925;
    double soc_init = 1.92;        // kWh
    double soc_min_frac = 0.15;
    double taper_knee = 0.8;       // fraction of capacity where the charge limit starts to fall
    double taper_floor = 0.2;      // fraction of p_charge_max left at full SoC

    [[nodiscard]] double soc_max() const { return capacity; }
    [[nodiscard]] double soc_min() const { return soc_min_frac * capacity; }
    void validate() const;
};

struct EwhConfig {
    double p_nom = 0.5;           // kW
    double theta_min = 45.0;      // degC
    double theta_max = 80.0;
    double theta_init = 60.0;
    double thermal_capacity = 0.117;  // kWh/degC
    double alpha_mag = 9.42e-4;   // standing-loss admittance magnitude
    double theta_house = 20.0;
    double c_p = 1.163e-3;        // kWh/(L degC)
    double theta_des = 38.0;
    double theta_inl = 17.0;
    std::vector<double> draw_profile;  // litres of hot water per step

    void validate() const;
};

struct HemsConfig {
    BatteryConfig battery;
    EwhConfig ewh;
    double dt = 0.25;  // h

    void validate() const;
    /// Same assets restricted to steps [first, first + length) of the draw profile.
    /// Initial states are kept as configured.
    [[nodiscard]] HemsConfig window(int first, int length) const;
};

/// Battery and EWH set-points over the horizon. Positive battery power charges.
struct FlexTrajectory {
    std::vector<double> p_bat;
    std::vector<double> p_ewh;

    [[nodiscard]] std::size_t horizon() const { return p_bat.size(); }
    /// Net flexibility per step: p_bat + p_ewh.
    [[nodiscard]] std::vector<double> combined() const;
    /// [p_bat..., p_ewh...]
    [[nodiscard]] std::vector<double> flattened() const;
    static FlexTrajectory from_flattened(std::span<const double> values);

    friend bool operator==(const FlexTrajectory&, const FlexTrajectory&) = default;
};

struct StepViolation {
    bool soc_max = false;
    bool soc_min = false;
    bool temperature = false;
    bool charge_rate = false;
    /// Battery discharges while it is expected to absorb PV surplus. Not part
    /// of the penalty; repaired separately.
    bool pv_accommodation = false;

    [[nodiscard]] int penalty_units() const { return soc_max + soc_min + temperature + charge_rate; }
};

struct SimulationResult {
    std::vector<double> soc;       // after each step, kWh
    std::vector<double> theta;     // after each step, degC
    std::vector<double> absorbed;  // surplus power routed to the battery, kW
    std::vector<StepViolation> violations;
    double penalty = 0.0;
    int pv_violations = 0;

    /// Zero penalty and no PV-accommodation violation.
    [[nodiscard]] bool compliant() const { return penalty == 0.0 && pv_violations == 0; }
};

/// Remaining PV-absorption headroom of the battery.
struct CapacityTracker {
    double capacity = 0.0;
    double ceiling = 0.0;

    /// Starts full at soc_max - soc_min.
    static CapacityTracker initial(const BatteryConfig& battery);
};

/// Charge limit: flat up to taper_knee * capacity, then linear down to
/// taper_floor * p_charge_max at full charge. Throws ParameterError outside [0, capacity].
[[nodiscard]] double max_charge_power(double soc, const BatteryConfig& battery);

/// SoC after applying `p_bat` for `dt` hours with one-way efficiency.
[[nodiscard]] double battery_step(double soc, double p_bat, double dt, const BatteryConfig& battery);

/// One explicit step of the tank temperature balance.
[[nodiscard]] double ewh_step(double theta, double p_ewh, double draw_litres, double dt, const EwhConfig& ewh);

/// Tracks the PV surplus the battery is expected to absorb. On a surplus step
/// the headroom shrinks by the surplus left after the EWH (limited by the
/// charge rate and by what is left); otherwise it recovers at the discharge rate.
[[nodiscard]] CapacityTracker update_capacity(CapacityTracker tracker, double surplus, double p_ewh,
                                              const BatteryConfig& battery, double dt);

struct PowerBand {
    double lo = 0.0;
    double hi = 0.0;
};

/// Battery power range that keeps SoC within limits after one step (no surplus).
[[nodiscard]] PowerBand battery_power_band(double soc, const BatteryConfig& battery, double dt);

/// Throws InputError if the trajectory does not fit the horizon or its
/// set-points leave the power bounds.
void check_trajectory(const FlexTrajectory& traj, std::size_t horizon, const HemsConfig& cfg);

[[nodiscard]] SimulationResult simulate(const FlexTrajectory& traj, std::span<const double> surplus,
                                        const HemsConfig& cfg);

/// True when the battery never discharges on steps where it must absorb surplus.
[[nodiscard]] bool pv_accommodation_ok(const FlexTrajectory& traj, std::span<const double> surplus,
                                       const HemsConfig& cfg);

/// Lifts the battery set-point to zero on every step where it would discharge
/// instead of absorbing surplus. Only defined for trajectories with zero
/// penalty; throws RepairError otherwise.
[[nodiscard]] FlexTrajectory repair_trajectory(const FlexTrajectory& traj, std::span<const double> surplus,
                                               const HemsConfig& cfg);

}  // namespace hemsflex
