#include "hemsflex/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#include "hemsflex/analysis.hpp"
#include "hemsflex/io.hpp"
#include "hemsflex/synthetic.hpp"

namespace hemsflex {

using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string fmt_g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Assets and scenarios for the configured horizon (or window of it).
struct Instance {
    HemsConfig hems;
    ScenarioSet scenarios;
};

HemsConfig load_hems(const RunConfig& cfg)
{
    const json doc = json::parse(io::read_text(cfg.hems), nullptr, false);
    if (doc.is_discarded()) throw ParseError(cfg.hems.string() + ": not valid JSON");
    HemsConfig hems = io::hems_from_json(doc);
    hems.ewh.draw_profile = io::read_draw_profile_csv(cfg.draw_profile);
    return hems;
}

Instance load_instance(const RunConfig& cfg)
{
    Instance inst{load_hems(cfg), io::read_scenarios_csv(cfg.out_dir / artifact::scenarios)};
    const int horizon = inst.scenarios.horizon();
    if (static_cast<int>(inst.hems.ewh.draw_profile.size()) != horizon)
        throw InputError("draw profile has " + std::to_string(inst.hems.ewh.draw_profile.size()) +
                         " steps, scenarios have " + std::to_string(horizon));
    if (cfg.window) {
        const auto [first, length] = *cfg.window;
        if (first < 0 || length < 1 || first + length > horizon)
            throw InputError("window [" + std::to_string(first) + ", " + std::to_string(first + length) +
                             ") does not fit a horizon of " + std::to_string(horizon));
        inst.hems = inst.hems.window(first, length);
        inst.scenarios = inst.scenarios.window(first, length);
    }
    inst.hems.validate();
    return inst;
}

std::vector<double> median_net_load(const RunConfig& cfg)
{
    const auto marginals = io::read_marginals_csv(cfg.marginals);
    std::vector<double> median;
    for (const auto& m : marginals) median.push_back(m.inverse_cdf(0.5));
    if (cfg.window) median = {median.begin() + cfg.window->first,
                              median.begin() + cfg.window->first + cfg.window->length};
    return median;
}

void write_json(const fs::path& path, const json& doc) { io::write_text(path, doc.dump(2) + "\n"); }

json diversity_json(const DiversityReport& r)
{
    return {{"components_50", r.n_components_50},
            {"components_80", r.n_components_80},
            {"degenerate", r.degenerate},
            {"explained", r.explained}};
}

}  // namespace

void RunConfig::propagate()
{
    copula.seed = seed;
    epso.seed = seed;
    copula.threads = threads;
    epso.threads = threads;
}

RunConfig run_config_from_json(const json& doc, const fs::path& base_dir)
{
    RunConfig cfg;
    try {
        const auto& in = doc.at("inputs");
        cfg.marginals = resolve(base_dir, in.at("marginals").get<std::string>());
        cfg.hems = resolve(base_dir, in.at("hems").get<std::string>());
        cfg.draw_profile = resolve(base_dir, in.at("draw_profile").get<std::string>());
        cfg.out_dir = resolve(base_dir, doc.value("out", std::string("out")));
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.threads = doc.value("threads", cfg.threads);

        if (doc.contains("copula")) {
            const auto& c = doc["copula"];
            cfg.copula.count = c.value("count", cfg.copula.count);
            cfg.copula.range = c.value("range", cfg.copula.range);
        }
        if (doc.contains("epso")) {
            const auto& e = doc["epso"];
            auto& p = cfg.epso;
            p.pop_size = e.value("pop_size", p.pop_size);
            p.max_iters = e.value("max_iters", p.max_iters);
            p.target_feasible = e.value("target_feasible", p.target_feasible);
            p.comm_factor = e.value("comm_factor", p.comm_factor);
            p.mutation_max = e.value("mutation_max", p.mutation_max);
            p.mutation_min = e.value("mutation_min", p.mutation_min);
            p.tau_learn = e.value("tau_learn", p.tau_learn);
            p.tau_global = e.value("tau_global", p.tau_global);
            p.tau_scen = e.value("tau_scen", p.tau_scen);
            p.tournament_win = e.value("tournament_win", p.tournament_win);
            p.seed_zero_fraction = e.value("seed_zero_fraction", p.seed_zero_fraction);
            p.seed_ewh_on_max = e.value("seed_ewh_on_max", p.seed_ewh_on_max);
            p.dedup_tol = e.value("dedup_tol", p.dedup_tol);
        }
        if (doc.contains("svdd")) {
            const auto& s = doc["svdd"];
            cfg.kernel.kind = kernel_kind_from_string(s.value("kernel", to_string(cfg.kernel.kind)));
            cfg.kernel.gamma = s.value("gamma", cfg.kernel.gamma);
            cfg.kernel.degree = s.value("degree", cfg.kernel.degree);
            cfg.kernel.coef0 = s.value("coef0", cfg.kernel.coef0);
            cfg.training.nu = s.value("nu", cfg.training.nu);
            cfg.training.tolerance = s.value("tolerance", cfg.training.tolerance);
            cfg.training.max_passes = s.value("max_passes", cfg.training.max_passes);
        }
        if (doc.contains("validate")) {
            const auto& v = doc["validate"];
            auto& p = cfg.validate;
            p.infeasible_count = v.value("infeasible_count", p.infeasible_count);
            p.baseline_count = v.value("baseline_count", p.baseline_count);
            p.max_draws = v.value("max_draws", p.max_draws);
            if (v.contains("sweep_kernels")) {
                p.sweep_kernels.clear();
                for (const auto& k : v["sweep_kernels"]) p.sweep_kernels.push_back(kernel_kind_from_string(k));
            }
            if (v.contains("sweep_nu")) p.sweep_nu = v["sweep_nu"].get<std::vector<double>>();
        }
        if (doc.contains("window") && !doc["window"].is_null())
            cfg.window = StepWindow{doc["window"].at("first").get<int>(), doc["window"].at("length").get<int>()};
    } catch (const json::exception& e) {
        throw InputError(std::string("run config: ") + e.what());
    }
    cfg.propagate();
    return cfg;
}

RunConfig load_run_config(const fs::path& path)
{
    const json doc = json::parse(io::read_text(path), nullptr, false);
    if (doc.is_discarded()) throw ParseError(path.string() + ": not valid JSON");
    return run_config_from_json(doc, path.parent_path());
}

json run_config_to_json(const RunConfig& cfg)
{
    json doc = {
        {"inputs",
         {{"marginals", cfg.marginals.string()},
          {"hems", cfg.hems.string()},
          {"draw_profile", cfg.draw_profile.string()}}},
        {"out", cfg.out_dir.string()},
        {"seed", cfg.seed},
        {"threads", cfg.threads},
        {"copula", {{"count", cfg.copula.count}, {"range", cfg.copula.range}}},
        {"epso",
         {{"pop_size", cfg.epso.pop_size},
          {"max_iters", cfg.epso.max_iters},
          {"target_feasible", cfg.epso.target_feasible},
          {"tau_scen", cfg.epso.tau_scen}}},
        {"svdd",
         {{"kernel", to_string(cfg.kernel.kind)},
          {"gamma", cfg.kernel.gamma},
          {"degree", cfg.kernel.degree},
          {"coef0", cfg.kernel.coef0},
          {"nu", cfg.training.nu}}},
    };
    json kernels = json::array();
    for (auto k : cfg.validate.sweep_kernels) kernels.push_back(to_string(k));
    doc["validate"] = {{"infeasible_count", cfg.validate.infeasible_count},
                       {"baseline_count", cfg.validate.baseline_count},
                       {"sweep_kernels", kernels},
                       {"sweep_nu", cfg.validate.sweep_nu}};
    doc["window"] = cfg.window ? json{{"first", cfg.window->first}, {"length", cfg.window->length}} : json(nullptr);
    return doc;
}

void cmd_gen_scenarios(const RunConfig& cfg, std::ostream& log)
{
    const auto marginals = io::read_marginals_csv(cfg.marginals);
    CopulaConfig copula = cfg.copula;
    copula.horizon = static_cast<int>(marginals.size());
    const ScenarioSet set = generate_scenarios(copula, marginals);

    io::write_text(cfg.out_dir / artifact::scenarios, io::scenarios_csv(set));
    write_json(cfg.out_dir / artifact::scenarios_meta,
               {{"range", copula.range}, {"count", copula.count}, {"horizon", copula.horizon}, {"seed", copula.seed}});
    log << "wrote " << set.count() << " x " << set.horizon() << " scenarios to "
        << (cfg.out_dir / artifact::scenarios).string() << '\n';
}

void cmd_search(const RunConfig& cfg, std::ostream& log)
{
    const Instance inst = load_instance(cfg);
    const auto start = std::chrono::steady_clock::now();
    const SearchResult result = run_search(cfg.epso, inst.scenarios, inst.hems);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    io::write_text(cfg.out_dir / artifact::feasible,
                   io::trajectories_csv(result.feasible.trajectories(), &result.feasible.fitness()));

    std::string lines;
    for (const auto& it : result.log) {
        lines += json{{"iteration", it.iteration},
                      {"feasible", it.feasible},
                      {"best_distance", it.best_distance},
                      {"mutation_rate", it.mutation_rate},
                      {"best_fitness", it.best_fitness}}
                     .dump() +
                 "\n";
    }
    json summary = {{"summary", true},
                    {"iterations", result.iterations},
                    {"feasible", result.feasible.size()},
                    {"target_reached", result.target_reached},
                    {"horizon", inst.scenarios.horizon()},
                    {"scenarios", inst.scenarios.count()},
                    {"threads", cfg.epso.threads},
                    {"wall_clock_s", seconds}};
    if (result.warning) summary["warning"] = *result.warning;
    lines += summary.dump() + "\n";
    io::write_text(cfg.out_dir / artifact::search_log, lines);

    log << "found " << result.feasible.size() << " robust trajectories in " << result.iterations
        << " iterations (" << fmt_g(seconds) << " s)\n";
    if (result.warning) log << "warning: " << *result.warning << '\n';
}

void cmd_train(const RunConfig& cfg, std::ostream& log)
{
    const auto table = io::read_trajectories_csv(cfg.out_dir / artifact::feasible);
    if (table.trajectories.empty()) throw InputError("feasible set is empty, nothing to train on");
    const TrainingReport report = train_svdd(table.trajectories, cfg.kernel, cfg.training);
    io::write_text(cfg.out_dir / artifact::model, serialize(report.model));
    log << "support_vectors " << report.support_count() << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", report.model.radius2_threshold);
    log << "threshold " << buf << '\n';
}

void cmd_validate(const RunConfig& cfg, std::ostream& log)
{
    const SvddModel model = deserialize(io::read_text(cfg.out_dir / artifact::model));
    const auto feasible = io::read_trajectories_csv(cfg.out_dir / artifact::feasible).trajectories;
    const Instance inst = load_instance(cfg);
    const auto horizon = static_cast<std::size_t>(inst.scenarios.horizon());

    if (feasible.empty()) throw InputError("feasible set is empty");
    if (feasible.front().horizon() != horizon)
        throw InputError("feasible set has " + std::to_string(feasible.front().horizon()) +
                         " steps, validation instance has " + std::to_string(horizon));
    if (model.dimension() != 2 * horizon)
        throw InputError("model expects " + std::to_string(model.dimension()) + " coordinates, instance has " +
                         std::to_string(2 * horizon));
    if (cfg.validate.infeasible_count == 0) throw InputError("infeasible set is empty");

    const InfeasibleSample infeasible = generate_infeasible_set(
        cfg.validate.infeasible_count, inst.hems, inst.scenarios, cfg.epso.tau_scen, cfg.seed, cfg.validate.max_draws);
    io::write_text(cfg.out_dir / artifact::infeasible, io::trajectories_csv(infeasible.trajectories));

    std::vector<ConfusionRow> rows;
    if (cfg.validate.sweep_kernels.empty() || cfg.validate.sweep_nu.empty()) {
        rows.push_back(confusion_table(model, feasible, infeasible.trajectories));
    } else {
        for (KernelKind kind : cfg.validate.sweep_kernels) {
            for (double nu : cfg.validate.sweep_nu) {
                KernelSpec kernel = cfg.kernel;
                kernel.kind = kind;
                TrainingConfig training = cfg.training;
                training.nu = nu;
                const auto report = train_svdd(feasible, kernel, training);
                rows.push_back(confusion_table(report.model, feasible, infeasible.trajectories));
            }
        }
    }
    io::write_text(cfg.out_dir / artifact::confusion, confusion_csv(rows));

    const auto baseline =
        semi_random_baseline(cfg.validate.baseline_count, inst.hems, median_net_load(cfg), cfg.seed);
    const DiversityReport epso_div = pca_diversity(feasible);
    const DiversityReport base_div = pca_diversity(baseline);
    const ConfusionRow model_row = confusion_table(model, feasible, infeasible.trajectories);
    write_json(cfg.out_dir / artifact::diversity,
               {{"horizon", horizon},
                {"feasible_count", feasible.size()},
                {"infeasible_count", infeasible.trajectories.size()},
                {"infeasible_draws", infeasible.draws},
                {"infeasible_acceptance_rate", infeasible.acceptance_rate()},
                {"model",
                 {{"kernel", model_row.kernel},
                  {"nu", model_row.nu},
                  {"feasible_error_pct", model_row.feasible_error_pct()},
                  {"infeasible_error_pct", model_row.infeasible_error_pct()}}},
                {"epso", diversity_json(epso_div)},
                {"baseline", diversity_json(base_div)}});

    log << "confusion rows " << rows.size() << ", infeasible acceptance rate "
        << fmt_g(infeasible.acceptance_rate()) << '\n';
    log << "PCA components (50%/80%): search " << epso_div.n_components_50 << "/" << epso_div.n_components_80
        << ", baseline " << base_div.n_components_50 << "/" << base_div.n_components_80 << '\n';
}

void cmd_classify(const fs::path& model_path, const fs::path& traj_csv, const fs::path& verdict_csv,
                  std::ostream& log)
{
    const SvddModel model = deserialize(io::read_text(model_path));
    const std::string text = io::read_text(traj_csv);
    std::string out = "index,r2,verdict\n";
    std::size_t n_feasible = 0;
    std::size_t n = 0;
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
        const auto table = io::read_trajectories_csv(traj_csv);
        for (const auto& traj : table.trajectories) {
            if (2 * traj.horizon() != model.dimension())
                throw InputError("trajectory " + std::to_string(n) + " has " + std::to_string(2 * traj.horizon()) +
                                 " coordinates, model expects " + std::to_string(model.dimension()));
            const auto x = normalize(traj, model.norm_bounds);
            const double r2 = radius_squared(model, x);
            const bool ok = classify_normalized(model, x) == Verdict::feasible;
            n_feasible += ok;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", r2);
            out += std::to_string(n++) + "," + buf + "," + (ok ? "feasible" : "infeasible") + "\n";
        }
    }
    io::write_text(verdict_csv, out);
    log << n_feasible << " of " << n << " trajectories classified feasible\n";
}

void write_example_inputs(const fs::path& dir)
{
    const HemsConfig hems = synthetic::reference_config();
    io::write_marginals_csv(dir / "marginals.csv", synthetic::marginals());
    io::write_draw_profile_csv(dir / "draw_profile.csv", hems.ewh.draw_profile);
    io::write_text(dir / "hems_config.json", io::hems_to_json(hems).dump(2) + "\n");

    RunConfig run;
    run.marginals = "marginals.csv";
    run.hems = "hems_config.json";
    run.draw_profile = "draw_profile.csv";
    run.out_dir = "../out";
    io::write_text(dir / "run_config.json", run_config_to_json(run).dump(2) + "\n");

    run.window = StepWindow{36, 16};
    run.out_dir = "../out_window";
    io::write_text(dir / "run_config_window.json", run_config_to_json(run).dump(2) + "\n");
}

}  // namespace hemsflex
