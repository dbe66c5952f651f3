#pragma once

// One-class support vector boundary over normalized trajectories, scored
// with the sphere radius function
//   R^2(x) = 1 - 2 sum_i b_i k(x_i, x) + sum_ij b_i b_j k(x_i, x_j).

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hemsflex/hems.hpp"

namespace hemsflex {

enum class KernelKind { rbf, poly, sigmoid };

[[nodiscard]] std::string to_string(KernelKind kind);
[[nodiscard]] KernelKind kernel_kind_from_string(const std::string& name);

struct KernelSpec {
    KernelKind kind = KernelKind::sigmoid;
    double gamma = 0.05;
    int degree = 3;
    double coef0 = 0.0;

    void validate() const;
    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

[[nodiscard]] double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b);

/// Per-coordinate (min, max) of the training trajectories.
using NormBounds = std::vector<std::pair<double, double>>;

[[nodiscard]] NormBounds fit_bounds(const std::vector<FlexTrajectory>& trajectories);

/// Min-max scaling of the flattened trajectory, clipped to [0,1]. Degenerate
/// coordinates (min == max) map to 0.5.
[[nodiscard]] std::vector<double> normalize(const FlexTrajectory& traj, const NormBounds& bounds);
[[nodiscard]] std::vector<double> normalize(std::span<const double> flat, const NormBounds& bounds);

struct TrainingConfig {
    double nu = 0.15;
    double tolerance = 1e-6;
    long max_passes = 100000;

    void validate() const;
};

struct SvddModel {
    KernelSpec kernel;
    double nu = 0.15;
    NormBounds norm_bounds;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coefficients;
    double radius2_threshold = 0.0;
    double const_term = 0.0;  // sum_ij b_i b_j k(x_i, x_j)

    [[nodiscard]] std::size_t dimension() const { return norm_bounds.size(); }
    friend bool operator==(const SvddModel&, const SvddModel&) = default;
};

/// Everything the solver knows about the training set. Only the model is
/// meant to leave the household.
struct TrainingReport {
    SvddModel model;
    std::vector<double> alpha;        // one per training point
    std::vector<double> radius2;      // R^2 of each training point
    double upper_bound = 0.0;         // 1 / (nu N)
    long iterations = 0;
    double final_gap = 0.0;

    [[nodiscard]] std::size_t outliers() const;
    [[nodiscard]] std::size_t support_count() const { return model.support_vectors.size(); }
};

/// Solves min 1/2 a'Ka s.t. 0 <= a_i <= 1/(nu N), sum a_i = 1 by
/// sequential minimal optimization with second-order pair selection.
/// Points must already be normalized; `bounds` is stored in the model.
/// Throws NumericalError if the gap stays above tolerance after max_passes.
[[nodiscard]] TrainingReport train_svdd(const std::vector<std::vector<double>>& points, const NormBounds& bounds,
                                        const KernelSpec& kernel, const TrainingConfig& cfg);

/// Convenience: fits bounds on `trajectories`, normalizes and trains.
[[nodiscard]] TrainingReport train_svdd(const std::vector<FlexTrajectory>& trajectories, const KernelSpec& kernel,
                                        const TrainingConfig& cfg);

[[nodiscard]] double radius_squared(const SvddModel& model, std::span<const double> x);

enum class Verdict { feasible, infeasible };

/// Round-off allowance when comparing R^2 against the threshold.
inline constexpr double kRadiusSlack = 1e-9;

[[nodiscard]] Verdict classify(const SvddModel& model, const FlexTrajectory& traj);
[[nodiscard]] Verdict classify_normalized(const SvddModel& model, std::span<const double> x);

/// JSON with 17 significant digits; nothing but the model fields.
[[nodiscard]] std::string serialize(const SvddModel& model);
/// Throws ParseError naming the offending field.
[[nodiscard]] SvddModel deserialize(const std::string& text);

}  // namespace hemsflex
