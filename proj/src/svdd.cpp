#include "hemsflex/svdd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hemsflex/errors.hpp"

namespace hemsflex {

std::string to_string(KernelKind kind)
{
    switch (kind) {
    case KernelKind::rbf: return "rbf";
    case KernelKind::poly: return "poly";
    case KernelKind::sigmoid: return "sigmoid";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name)
{
    if (name == "rbf") return KernelKind::rbf;
    if (name == "poly") return KernelKind::poly;
    if (name == "sigmoid" || name == "sigm") return KernelKind::sigmoid;
    throw ParameterError("unknown kernel kind '" + name + "'");
}

void KernelSpec::validate() const
{
    if (!std::isfinite(gamma)) throw ParameterError("kernel gamma must be finite");
    if (kind == KernelKind::rbf && !(gamma > 0.0)) throw ParameterError("rbf gamma must be positive");
    if (degree < 1) throw ParameterError("polynomial degree must be >= 1");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw InputError("kernel arguments differ in dimension: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    switch (spec.kind) {
    case KernelKind::rbf: {
        double sq = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            sq += d * d;
        }
        return std::exp(-spec.gamma * sq);
    }
    case KernelKind::poly:
    case KernelKind::sigmoid: {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
        const double arg = spec.gamma * dot + spec.coef0;
        return spec.kind == KernelKind::poly ? std::pow(arg, spec.degree) : std::tanh(arg);
    }
    }
    return 0.0;
}

NormBounds fit_bounds(const std::vector<FlexTrajectory>& trajectories)
{
    if (trajectories.empty()) throw InputError("cannot fit normalization bounds on an empty set");
    const auto first = trajectories.front().flattened();
    NormBounds bounds(first.size());
    for (std::size_t i = 0; i < first.size(); ++i) bounds[i] = {first[i], first[i]};
    for (const auto& traj : trajectories) {
        const auto flat = traj.flattened();
        if (flat.size() != bounds.size()) throw InputError("trajectories differ in horizon");
        for (std::size_t i = 0; i < flat.size(); ++i) {
            bounds[i].first = std::min(bounds[i].first, flat[i]);
            bounds[i].second = std::max(bounds[i].second, flat[i]);
        }
    }
    return bounds;
}

std::vector<double> normalize(std::span<const double> flat, const NormBounds& bounds)
{
    if (flat.size() != bounds.size())
        throw InputError("trajectory dimension " + std::to_string(flat.size()) + " does not match model dimension " +
                         std::to_string(bounds.size()));
    std::vector<double> out(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const auto [lo, hi] = bounds[i];
        out[i] = hi > lo ? std::clamp((flat[i] - lo) / (hi - lo), 0.0, 1.0) : 0.5;
    }
    return out;
}

std::vector<double> normalize(const FlexTrajectory& traj, const NormBounds& bounds)
{
    return normalize(traj.flattened(), bounds);
}

void TrainingConfig::validate() const
{
    if (!(nu > 0.0 && nu < 1.0)) throw ParameterError("nu must lie in (0,1)");
    if (!(tolerance > 0.0)) throw ParameterError("solver tolerance must be positive");
    if (max_passes < 1) throw ParameterError("max_passes must be >= 1");
}

std::size_t TrainingReport::outliers() const
{
    return static_cast<std::size_t>(std::count_if(radius2.begin(), radius2.end(),
                                                   [&](double r) { return r > model.radius2_threshold + kRadiusSlack; }));
}

namespace {

constexpr double kTau = 1e-12;

struct Solution {
    std::vector<double> alpha;
    long iterations = 0;
    double gap = 0.0;
};

// Dense dual solver; every label is +1 so the pair update keeps a_i + a_j fixed.
Solution solve_dual(const std::vector<double>& q, std::size_t n, double upper, const TrainingConfig& cfg)
{
    auto kq = [&](std::size_t i, std::size_t j) { return q[i * n + j]; };

    Solution sol;
    auto& alpha = sol.alpha;
    alpha.assign(n, 0.0);
    // Fill whole units of the bound first, then the remainder.
    const auto full = std::min(n, static_cast<std::size_t>(std::floor(1.0 / upper + 1e-9)));
    for (std::size_t i = 0; i < full; ++i) alpha[i] = upper;
    if (full < n) alpha[full] = std::max(0.0, 1.0 - static_cast<double>(full) * upper);

    std::vector<double> grad(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        if (alpha[j] > 0.0)
            for (std::size_t i = 0; i < n; ++i) grad[i] += kq(i, j) * alpha[j];

    for (sol.iterations = 0; sol.iterations < cfg.max_passes; ++sol.iterations) {
        // i: steepest ascent candidate among points that can still grow.
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t)
            if (alpha[t] < upper && -grad[t] >= gmax) {
                gmax = -grad[t];
                i = t;
            }
        double gmax2 = -std::numeric_limits<double>::infinity();
        double obj_min = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (!(alpha[t] > 0.0)) continue;
            gmax2 = std::max(gmax2, grad[t]);
            if (i == n) continue;
            const double b = gmax + grad[t];
            if (b > 0.0) {
                double a = kq(i, i) + kq(t, t) - 2.0 * kq(i, t);
                if (a <= 0.0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj <= obj_min) {
                    obj_min = obj;
                    j = t;
                }
            }
        }
        sol.gap = gmax + gmax2;
        if (sol.gap < cfg.tolerance || i == n || j == n) return sol;

        double quad = kq(i, i) + kq(j, j) - 2.0 * kq(i, j);
        if (quad <= 0.0) quad = kTau;
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        const double delta = (grad[i] - grad[j]) / quad;
        const double sum = old_i + old_j;
        double ai = old_i - delta;
        double aj = old_j + delta;
        if (sum > upper) {
            if (ai > upper) {
                ai = upper;
                aj = sum - upper;
            }
        } else if (aj < 0.0) {
            aj = 0.0;
            ai = sum;
        }
        if (sum > upper) {
            if (aj > upper) {
                aj = upper;
                ai = sum - upper;
            }
        } else if (ai < 0.0) {
            ai = 0.0;
            aj = sum;
        }
        alpha[i] = ai;
        alpha[j] = aj;
        const double di = ai - old_i;
        const double dj = aj - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += kq(t, i) * di + kq(t, j) * dj;
    }
    throw NumericalError("dual solver did not converge within " + std::to_string(cfg.max_passes) +
                         " iterations (gap " + std::to_string(sol.gap) + ", tolerance " +
                         std::to_string(cfg.tolerance) + ")");
}

}  // namespace

TrainingReport train_svdd(const std::vector<std::vector<double>>& points, const NormBounds& bounds,
                          const KernelSpec& kernel, const TrainingConfig& cfg)
{
    kernel.validate();
    cfg.validate();
    const std::size_t n = points.size();
    if (n < 2) throw InputError("training needs at least two points");
    for (const auto& x : points)
        if (x.size() != bounds.size()) throw InputError("training point dimension does not match bounds");

    std::vector<double> q(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) q[i * n + j] = q[j * n + i] = kernel_eval(kernel, points[i], points[j]);

    TrainingReport report;
    report.upper_bound = 1.0 / (cfg.nu * static_cast<double>(n));
    auto sol = solve_dual(q, n, report.upper_bound, cfg);
    report.alpha = std::move(sol.alpha);
    report.iterations = sol.iterations;
    report.final_gap = sol.gap;

    SvddModel& model = report.model;
    model.kernel = kernel;
    model.nu = cfg.nu;
    model.norm_bounds = bounds;
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i)
        if (report.alpha[i] > 0.0) sv.push_back(i);
    for (auto i : sv) {
        model.support_vectors.push_back(points[i]);
        model.coefficients.push_back(report.alpha[i]);
    }
    double cst = 0.0;
    for (std::size_t a = 0; a < sv.size(); ++a)
        for (std::size_t b = 0; b < sv.size(); ++b)
            cst += model.coefficients[a] * model.coefficients[b] * q[sv[a] * n + sv[b]];
    model.const_term = cst;

    // The boundary is the largest radius among points not pinned at the upper
    // bound; only pinned points may fall outside it.
    report.radius2.resize(n);
    double threshold = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        report.radius2[i] = radius_squared(model, points[i]);
        if (report.alpha[i] < report.upper_bound) threshold = std::max(threshold, report.radius2[i]);
    }
    if (!std::isfinite(threshold)) {
        threshold = std::numeric_limits<double>::infinity();
        for (auto i : sv) threshold = std::min(threshold, report.radius2[i]);
    }
    model.radius2_threshold = threshold;
    return report;
}

TrainingReport train_svdd(const std::vector<FlexTrajectory>& trajectories, const KernelSpec& kernel,
                          const TrainingConfig& cfg)
{
    const auto bounds = fit_bounds(trajectories);
    std::vector<std::vector<double>> points;
    points.reserve(trajectories.size());
    for (const auto& traj : trajectories) points.push_back(normalize(traj, bounds));
    return train_svdd(points, bounds, kernel, cfg);
}

double radius_squared(const SvddModel& model, std::span<const double> x)
{
    if (x.size() != model.dimension())
        throw InputError("input dimension " + std::to_string(x.size()) + " does not match model dimension " +
                         std::to_string(model.dimension()));
    // Summed in sorted order so the result does not depend on SV order.
    std::vector<double> terms(model.support_vectors.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
        terms[i] = model.coefficients[i] * kernel_eval(model.kernel, model.support_vectors[i], x);
    std::sort(terms.begin(), terms.end());
    double cross = 0.0;
    for (double t : terms) cross += t;
    return 1.0 - 2.0 * cross + model.const_term;
}

Verdict classify_normalized(const SvddModel& model, std::span<const double> x)
{
    return radius_squared(model, x) <= model.radius2_threshold + kRadiusSlack ? Verdict::feasible : Verdict::infeasible;
}

Verdict classify(const SvddModel& model, const FlexTrajectory& traj)
{
    return classify_normalized(model, normalize(traj, model.norm_bounds));
}

namespace {

void put_number(std::ostringstream& out, double value)
{
    if (!std::isfinite(value)) throw InputError("model contains a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << buf;
}

void put_array(std::ostringstream& out, const std::vector<double>& values)
{
    out << '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ',';
        put_number(out, values[i]);
    }
    out << ']';
}

template <typename T>
T field(const char* path, const nlohmann::json& node)
{
    try {
        return node.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model field '") + path + "': " + e.what());
    }
}

const nlohmann::json& require(const nlohmann::json& node, const char* key, const std::string& where)
{
    if (!node.is_object() || !node.contains(key)) throw ParseError("model is missing field '" + where + key + "'");
    return node.at(key);
}

}  // namespace

std::string serialize(const SvddModel& model)
{
    std::ostringstream out;
    out << "{\n  \"kernel\": {\"kind\": \"" << to_string(model.kernel.kind) << "\", \"gamma\": ";
    put_number(out, model.kernel.gamma);
    out << ", \"degree\": " << model.kernel.degree << ", \"coef0\": ";
    put_number(out, model.kernel.coef0);
    out << "},\n  \"nu\": ";
    put_number(out, model.nu);
    out << ",\n  \"norm_bounds\": [";
    for (std::size_t i = 0; i < model.norm_bounds.size(); ++i) {
        if (i) out << ',';
        out << '[';
        put_number(out, model.norm_bounds[i].first);
        out << ',';
        put_number(out, model.norm_bounds[i].second);
        out << ']';
    }
    out << "],\n  \"support_vectors\": [";
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        out << (i ? ",\n    " : "\n    ");
        put_array(out, model.support_vectors[i]);
    }
    out << "\n  ],\n  \"coefficients\": ";
    put_array(out, model.coefficients);
    out << ",\n  \"radius2_threshold\": ";
    put_number(out, model.radius2_threshold);
    out << ",\n  \"const_term\": ";
    put_number(out, model.const_term);
    out << "\n}\n";
    return out.str();
}

SvddModel deserialize(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("model is not valid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }

    SvddModel model;
    const auto& kernel = require(doc, "kernel", "");
    model.kernel.kind = kernel_kind_from_string(field<std::string>("kernel.kind", require(kernel, "kind", "kernel.")));
    model.kernel.gamma = field<double>("kernel.gamma", require(kernel, "gamma", "kernel."));
    model.kernel.degree = field<int>("kernel.degree", require(kernel, "degree", "kernel."));
    model.kernel.coef0 = field<double>("kernel.coef0", require(kernel, "coef0", "kernel."));
    model.nu = field<double>("nu", require(doc, "nu", ""));
    for (const auto& pair : field<std::vector<std::vector<double>>>("norm_bounds", require(doc, "norm_bounds", ""))) {
        if (pair.size() != 2) throw ParseError("model field 'norm_bounds' entries must be [min, max]");
        model.norm_bounds.emplace_back(pair[0], pair[1]);
    }
    model.support_vectors =
        field<std::vector<std::vector<double>>>("support_vectors", require(doc, "support_vectors", ""));
    model.coefficients = field<std::vector<double>>("coefficients", require(doc, "coefficients", ""));
    model.radius2_threshold = field<double>("radius2_threshold", require(doc, "radius2_threshold", ""));
    model.const_term = field<double>("const_term", require(doc, "const_term", ""));

    if (model.coefficients.size() != model.support_vectors.size())
        throw ParseError("model has " + std::to_string(model.support_vectors.size()) + " support vectors but " +
                         std::to_string(model.coefficients.size()) + " coefficients");
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        if (model.support_vectors[i].size() != model.norm_bounds.size())
            throw ParseError("support_vectors[" + std::to_string(i) + "] has the wrong dimension");
    try {
        model.kernel.validate();
    } catch (const ParameterError& e) {
        throw ParseError(std::string("model field 'kernel': ") + e.what());
    }
    return model;
}

}  // namespace hemsflex
