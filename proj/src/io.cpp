#include "hemsflex/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hemsflex/errors.hpp"

namespace hemsflex::io {

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        cell.erase(0, cell.find_first_not_of(" \t\r"));
        cell.erase(cell.find_last_not_of(" \t\r") + 1);
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell, const fs::path& path, std::size_t line)
{
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc() || ptr != end || cell.empty())
        throw InputError(path.string() + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
    return value;
}

struct CsvRows {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

CsvRows read_csv(const fs::path& path)
{
    std::istringstream in(read_text(path));
    CsvRows csv;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (csv.header.empty()) {
            csv.header = split(line);
            continue;
        }
        auto cells = split(line);
        if (cells.size() != csv.header.size())
            throw InputError(path.string() + ":" + std::to_string(n) + ": expected " +
                             std::to_string(csv.header.size()) + " columns, got " + std::to_string(cells.size()));
        csv.rows.push_back(std::move(cells));
        csv.line_numbers.push_back(n);
    }
    if (csv.header.empty()) throw InputError(path.string() + ": empty file, missing header");
    return csv;
}

void expect_header(const CsvRows& csv, const std::vector<std::string>& expected, const fs::path& path)
{
    if (csv.header != expected) {
        std::string want;
        for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
        throw InputError(path.string() + ": expected header '" + want + "'");
    }
}

std::string fmt(const char* pattern, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

}  // namespace

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + path.string());
        out << text;
        if (!out) throw InputError("write failed for " + path.string());
    }
    fs::rename(tmp, path);
}

std::vector<MarginalForecast> read_marginals_csv(const fs::path& path)
{
    const auto csv = read_csv(path);
    expect_header(csv, {"t", "p", "q"}, path);
    std::map<int, MarginalForecast> by_lead;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto line = csv.line_numbers[r];
        const double t = parse_double(csv.rows[r][0], path, line);
        if (t < 1 || t != static_cast<int>(t))
            throw InputError(path.string() + ":" + std::to_string(line) + ": lead time must be a positive integer");
        auto& m = by_lead[static_cast<int>(t)];
        m.lead_time = static_cast<int>(t);
        m.quantiles.emplace_back(parse_double(csv.rows[r][1], path, line), parse_double(csv.rows[r][2], path, line));
    }
    std::vector<MarginalForecast> out;
    int expected = 1;
    for (auto& [t, m] : by_lead) {
        if (t != expected) throw InputError(path.string() + ": lead times must be contiguous from 1");
        ++expected;
        std::sort(m.quantiles.begin(), m.quantiles.end());
        m.validate();
        out.push_back(std::move(m));
    }
    if (out.empty()) throw InputError(path.string() + ": no marginals");
    return out;
}

void write_marginals_csv(const fs::path& path, const std::vector<MarginalForecast>& marginals)
{
    std::string text = "t,p,q\n";
    for (const auto& m : marginals)
        for (const auto& [p, q] : m.quantiles)
            text += std::to_string(m.lead_time) + "," + fmt("%.2f", p) + "," + fmt("%.6f", q) + "\n";
    write_text(path, text);
}

std::string scenarios_csv(const ScenarioSet& set)
{
    std::string text;
    for (int k = 0; k < set.horizon(); ++k) text += (k ? ",h" : "h") + std::to_string(k + 1);
    text += '\n';
    for (int m = 0; m < set.count(); ++m) {
        for (int k = 0; k < set.horizon(); ++k) {
            if (k) text += ',';
            // Avoid "-0.000000" for tiny negatives.
            const double v = set.values(m, k);
            text += fmt("%.6f", std::abs(v) < 5e-7 ? 0.0 : v);
        }
        text += '\n';
    }
    return text;
}

ScenarioSet read_scenarios_csv(const fs::path& path)
{
    const auto csv = read_csv(path);
    for (std::size_t k = 0; k < csv.header.size(); ++k)
        if (csv.header[k] != "h" + std::to_string(k + 1))
            throw InputError(path.string() + ": expected header h1..hT");
    ScenarioSet set{Eigen::MatrixXd(static_cast<Eigen::Index>(csv.rows.size()),
                                    static_cast<Eigen::Index>(csv.header.size()))};
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
        for (std::size_t k = 0; k < csv.header.size(); ++k)
            set.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
                parse_double(csv.rows[r][k], path, csv.line_numbers[r]);
    if (set.count() < 1) throw InputError(path.string() + ": no scenarios");
    return set;
}

std::vector<double> read_draw_profile_csv(const fs::path& path)
{
    const auto csv = read_csv(path);
    expect_header(csv, {"h", "liters"}, path);
    std::vector<double> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto line = csv.line_numbers[r];
        if (parse_double(csv.rows[r][0], path, line) != static_cast<double>(r + 1))
            throw InputError(path.string() + ":" + std::to_string(line) + ": steps must run 1..T in order");
        out.push_back(parse_double(csv.rows[r][1], path, line));
    }
    return out;
}

void write_draw_profile_csv(const fs::path& path, const std::vector<double>& litres)
{
    std::string text = "h,liters\n";
    for (std::size_t h = 0; h < litres.size(); ++h) text += std::to_string(h + 1) + "," + fmt("%g", litres[h]) + "\n";
    write_text(path, text);
}

nlohmann::json hems_to_json(const HemsConfig& cfg)
{
    const auto& b = cfg.battery;
    const auto& e = cfg.ewh;
    return {
        {"dt", cfg.dt},
        {"battery",
         {{"capacity", b.capacity},
          {"p_charge_max", b.p_charge_max},
          {"p_discharge_max", b.p_discharge_max},
          {"efficiency", b.efficiency},
          {"soc_init", b.soc_init},
          {"soc_min_frac", b.soc_min_frac},
          {"taper_knee", b.taper_knee},
          {"taper_floor", b.taper_floor}}},
        {"ewh",
         {{"p_nom", e.p_nom},
          {"theta_min", e.theta_min},
          {"theta_max", e.theta_max},
          {"theta_init", e.theta_init},
          {"C", e.thermal_capacity},
          {"alpha_mag", e.alpha_mag},
          {"theta_house", e.theta_house},
          {"c_p", e.c_p},
          {"theta_des", e.theta_des},
          {"theta_inl", e.theta_inl}}},
    };
}

HemsConfig hems_from_json(const nlohmann::json& doc)
{
    HemsConfig cfg;
    try {
        cfg.dt = doc.value("dt", cfg.dt);
        const auto& b = doc.at("battery");
        auto& bat = cfg.battery;
        bat.capacity = b.at("capacity").get<double>();
        bat.p_charge_max = b.at("p_charge_max").get<double>();
        bat.p_discharge_max = std::abs(b.at("p_discharge_max").get<double>());
        bat.efficiency = b.at("efficiency").get<double>();
        bat.soc_init = b.at("soc_init").get<double>();
        bat.soc_min_frac = b.at("soc_min_frac").get<double>();
        bat.taper_knee = b.value("taper_knee", bat.taper_knee);
        bat.taper_floor = b.value("taper_floor", bat.taper_floor);

        const auto& e = doc.at("ewh");
        auto& ewh = cfg.ewh;
        ewh.p_nom = e.at("p_nom").get<double>();
        ewh.theta_min = e.at("theta_min").get<double>();
        ewh.theta_max = e.at("theta_max").get<double>();
        ewh.theta_init = e.at("theta_init").get<double>();
        ewh.thermal_capacity = e.value("C", ewh.thermal_capacity);
        // Signed admittance is accepted; the loss always pulls toward ambient.
        ewh.alpha_mag = std::abs(e.contains("alpha") ? e.at("alpha").get<double>()
                                                     : e.value("alpha_mag", ewh.alpha_mag));
        ewh.theta_house = e.value("theta_house", ewh.theta_house);
        ewh.c_p = e.value("c_p", ewh.c_p);
        ewh.theta_des = e.value("theta_des", ewh.theta_des);
        ewh.theta_inl = e.value("theta_inl", ewh.theta_inl);
    } catch (const nlohmann::json::exception& ex) {
        throw InputError(std::string("HEMS config: ") + ex.what());
    }
    return cfg;
}

std::string trajectories_csv(const std::vector<FlexTrajectory>& trajectories, const std::vector<int>* fitness)
{
    const std::size_t horizon = trajectories.empty() ? 0 : trajectories.front().horizon();
    std::string text;
    for (std::size_t h = 0; h < horizon; ++h) text += (h ? ",pbat_h" : "pbat_h") + std::to_string(h + 1);
    for (std::size_t h = 0; h < horizon; ++h) text += ",pewh_h" + std::to_string(h + 1);
    if (fitness) text += horizon ? ",fitness" : "fitness";
    text += '\n';
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto flat = trajectories[i].flattened();
        for (std::size_t c = 0; c < flat.size(); ++c) {
            if (c) text += ',';
            text += fmt("%.17g", flat[c]);
        }
        if (fitness) text += "," + std::to_string((*fitness)[i]);
        text += '\n';
    }
    return text;
}

TrajectoryTable read_trajectories_csv(const fs::path& path)
{
    const auto csv = read_csv(path);
    const bool has_fitness = !csv.header.empty() && csv.header.back() == "fitness";
    const std::size_t width = csv.header.size() - (has_fitness ? 1 : 0);
    if (width % 2 != 0) throw InputError(path.string() + ": expected pbat_h* and pewh_h* column pairs");
    const std::size_t horizon = width / 2;
    for (std::size_t h = 0; h < horizon; ++h)
        if (csv.header[h] != "pbat_h" + std::to_string(h + 1) ||
            csv.header[horizon + h] != "pewh_h" + std::to_string(h + 1))
            throw InputError(path.string() + ": expected header pbat_h1..pbat_hT,pewh_h1..pewh_hT[,fitness]");

    TrajectoryTable table;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto line = csv.line_numbers[r];
        std::vector<double> flat(width);
        for (std::size_t c = 0; c < width; ++c) flat[c] = parse_double(csv.rows[r][c], path, line);
        table.trajectories.push_back(FlexTrajectory::from_flattened(flat));
        if (has_fitness) table.fitness.push_back(static_cast<int>(parse_double(csv.rows[r][width], path, line)));
    }
    return table;
}

}  // namespace hemsflex::io
