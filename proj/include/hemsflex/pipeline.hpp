#pragma once

// Batch commands behind the command-line tool. Each reads its inputs from the
// run configuration and the output directory and writes its artifacts there.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hemsflex/epso.hpp"
#include "hemsflex/scenario.hpp"
#include "hemsflex/svdd.hpp"

namespace hemsflex {

namespace fs = std::filesystem;

struct StepWindow {
    int first = 0;   // 0-based step
    int length = 0;
};

struct ValidateConfig {
    std::size_t infeasible_count = 1000;
    std::size_t baseline_count = 1000;
    long max_draws = 10'000'000;
    std::vector<KernelKind> sweep_kernels{KernelKind::rbf, KernelKind::poly, KernelKind::sigmoid};
    std::vector<double> sweep_nu{0.01, 0.1, 0.15, 0.2};
};

struct RunConfig {
    fs::path marginals;
    fs::path hems;
    fs::path draw_profile;
    CopulaConfig copula;
    EpsoConfig epso;
    KernelSpec kernel;
    TrainingConfig training;
    ValidateConfig validate;
    std::optional<StepWindow> window;  // restricts search and validation to a sub-horizon
    fs::path out_dir = "out";
    std::uint64_t seed = 1;
    unsigned threads = 1;

    /// Pushes seed and thread count into every stage.
    void propagate();
};

/// Relative paths are resolved against `base_dir`.
[[nodiscard]] RunConfig run_config_from_json(const nlohmann::json& doc, const fs::path& base_dir);
[[nodiscard]] RunConfig load_run_config(const fs::path& path);
[[nodiscard]] nlohmann::json run_config_to_json(const RunConfig& cfg);

namespace artifact {
inline constexpr const char* scenarios = "scenarios.csv";
inline constexpr const char* scenarios_meta = "scenarios_meta.json";
inline constexpr const char* feasible = "feasible.csv";
inline constexpr const char* search_log = "search_log.jsonl";
inline constexpr const char* model = "model.json";
inline constexpr const char* infeasible = "infeasible.csv";
inline constexpr const char* confusion = "confusion.csv";
inline constexpr const char* diversity = "diversity.json";
inline constexpr const char* verdicts = "verdicts.csv";
}  // namespace artifact

// Progress and summaries go to `log`. Errors propagate as exceptions.
void cmd_gen_scenarios(const RunConfig& cfg, std::ostream& log);
void cmd_search(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_validate(const RunConfig& cfg, std::ostream& log);
void cmd_classify(const fs::path& model_path, const fs::path& traj_csv, const fs::path& verdict_csv,
                  std::ostream& log);

/// Synthetic inputs plus run_config.json (full day) and run_config_window.json
/// (steps 36..51, 09:00-13:00) writing to ../out and ../out_window.
void write_example_inputs(const fs::path& dir);

/// Runs `fn` and maps exceptions onto exit codes: 2 for bad input or
/// parameters, 3 for numerical failure, 1 for anything else.
template <class Fn>
int run_command(Fn&& fn, std::ostream& err);

}  // namespace hemsflex

#include "hemsflex/errors.hpp"

#include <ostream>

namespace hemsflex {

template <class Fn>
int run_command(Fn&& fn, std::ostream& err)
{
    try {
        fn();
        return 0;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace hemsflex
