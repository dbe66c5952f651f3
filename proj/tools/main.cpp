// hemsflex: scenarios -> search -> train -> classify / validate

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hemsflex/pipeline.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    std::optional<std::string> window;  // "first:length" or "none"
};

hemsflex::RunConfig resolve_config(const Overrides& o)
{
    auto cfg = hemsflex::load_run_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.threads) cfg.threads = *o.threads;
    if (o.out) cfg.out_dir = *o.out;
    if (o.window) {
        if (*o.window == "none") {
            cfg.window.reset();
        } else {
            const auto colon = o.window->find(':');
            if (colon == std::string::npos) throw hemsflex::InputError("--window expects FIRST:LENGTH");
            try {
                cfg.window = hemsflex::StepWindow{std::stoi(o.window->substr(0, colon)),
                                                  std::stoi(o.window->substr(colon + 1))};
            } catch (const std::exception&) {
                throw hemsflex::InputError("--window expects FIRST:LENGTH");
            }
        }
    }
    cfg.propagate();
    return cfg;
}

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config, "run configuration (JSON)")->required();
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--threads", o.threads, "worker threads, 0 = all cores");
    cmd->add_option("--out", o.out, "output directory");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-period HEMS flexibility: scenario search and SVDD boundary"};
    app.require_subcommand(1);

    Overrides o;
    std::string model_path;
    std::string input_path;
    std::string verdict_path;

    auto* gen = app.add_subcommand("gen-scenarios", "sample net-load scenarios from the marginal forecasts");
    auto* search = app.add_subcommand("search", "search robust flexibility trajectories");
    auto* train = app.add_subcommand("train", "fit the SVDD boundary on the feasible set");
    auto* classify = app.add_subcommand("classify", "classify trajectories with a trained model");
    auto* validate = app.add_subcommand("validate", "confusion table and PCA diversity report");
    for (auto* cmd : {gen, search, train, classify, validate}) add_common(cmd, o);
    for (auto* cmd : {search, validate})
        cmd->add_option("--window", o.window, "restrict to steps FIRST:LENGTH (0-based), or 'none'");
    classify->add_option("--model", model_path, "model file (default: <out>/model.json)");
    classify->add_option("--input", input_path, "trajectory CSV")->required();
    classify->add_option("--verdicts", verdict_path, "output CSV (default: <out>/verdicts.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    return hemsflex::run_command(
        [&] {
            const auto cfg = resolve_config(o);
            if (*gen) hemsflex::cmd_gen_scenarios(cfg, std::cout);
            else if (*search) hemsflex::cmd_search(cfg, std::cout);
            else if (*train) hemsflex::cmd_train(cfg, std::cout);
            else if (*validate) hemsflex::cmd_validate(cfg, std::cout);
            else {
                const auto model = model_path.empty() ? cfg.out_dir / hemsflex::artifact::model
                                                      : std::filesystem::path(model_path);
                const auto verdicts = verdict_path.empty() ? cfg.out_dir / hemsflex::artifact::verdicts
                                                           : std::filesystem::path(verdict_path);
                hemsflex::cmd_classify(model, input_path, verdicts, std::cout);
            }
        },
        std::cerr);
}
