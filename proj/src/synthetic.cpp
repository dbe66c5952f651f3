#include "hemsflex/synthetic.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace hemsflex::synthetic {

namespace {

double bump(double t, double centre, double width)
{
    const double u = (t - centre) / width;
    return std::exp(-0.5 * u * u);
}

double pv_profile(double t) { return (t > 6.0 && t < 17.0) ? 1.05 * bump(t, 10.3, 1.7) : 0.0; }

double load_profile(double t)
{
    return 0.30 + 0.45 * bump(t, 7.25, 0.8) + 1.10 * bump(t, 13.6, 0.7) + 0.85 * bump(t, 20.0, 1.6);
}

}  // namespace

double median_net_load(double t) { return load_profile(t) - pv_profile(t); }

std::vector<MarginalForecast> marginals(int horizon, double dt)
{
    const boost::math::normal_distribution<double> standard;
    std::vector<MarginalForecast> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int k = 0; k < horizon; ++k) {
        const double t = (k + 0.5) * dt;
        const double median = median_net_load(t);
        const double spread = 0.06 + 0.18 * pv_profile(t) + 0.05 * load_profile(t);
        MarginalForecast m;
        m.lead_time = k + 1;
        for (int i = 1; i <= 19; ++i) {
            const double p = 0.05 * i;
            m.quantiles.emplace_back(p, median + spread * boost::math::quantile(standard, p));
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<double> draw_profile(int horizon, double dt)
{
    struct Draw {
        double hour;
        double litres;
    };
    constexpr Draw draws[] = {{7.00, 25.0}, {7.25, 20.0}, {8.00, 10.0}, {13.00, 10.0},
                              {19.50, 15.0}, {20.00, 25.0}, {21.25, 15.0}};
    std::vector<double> out(static_cast<std::size_t>(horizon), 0.0);
    for (const auto& d : draws) {
        const auto k = static_cast<long>(std::floor(d.hour / dt + 1e-9));
        if (k >= 0 && k < horizon) out[static_cast<std::size_t>(k)] += d.litres;
    }
    return out;
}

HemsConfig reference_config(int horizon)
{
    HemsConfig cfg;
    cfg.dt = 0.25;
    cfg.battery = BatteryConfig{};
    cfg.battery.capacity = 3.2;
    cfg.battery.soc_init = 0.6 * 3.2;
    cfg.battery.soc_min_frac = 0.15;
    cfg.battery.efficiency = 0.925;
    cfg.ewh = EwhConfig{};
    cfg.ewh.draw_profile = draw_profile(horizon, cfg.dt);
    return cfg;
}

HemsConfig worked_example_config(int horizon)
{
    HemsConfig cfg;
    cfg.dt = 1.0;
    cfg.battery.capacity = 3.2;
    cfg.battery.p_charge_max = 1.5;
    cfg.battery.p_discharge_max = 1.5;
    cfg.battery.efficiency = 1.0;
    cfg.battery.soc_init = 0.64;
    cfg.battery.soc_min_frac = 0.15;
    cfg.ewh = EwhConfig{};
    cfg.ewh.draw_profile.assign(static_cast<std::size_t>(horizon), 0.0);
    return cfg;
}

}  // namespace hemsflex::synthetic
