#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "citecast/error.hpp"
#include "citecast/features.hpp"

namespace citecast {

// ---------------------------------------------------------------------------
// Yeo-Johnson power transform

[[nodiscard]] inline double yeo_johnson(double x, double lambda) {
    constexpr double eps = 1e-12;
    if (x >= 0.0) {
        if (std::abs(lambda) < eps) return std::log1p(x);
        return std::expm1(lambda * std::log1p(x)) / lambda;
    }
    const double mu = 2.0 - lambda;
    if (std::abs(mu) < eps) return -std::log1p(-x);
    return -std::expm1(mu * std::log1p(-x)) / mu;
}

/// Inverse of yeo_johnson(). Inputs outside the transform's image (possible
/// for extrapolated model outputs when lambda < 0 or lambda > 2) are pulled
/// back just inside it so the result stays finite.
[[nodiscard]] inline double yeo_johnson_inverse(double y, double lambda) {
    constexpr double eps = 1e-12;
    constexpr double margin = 1e-9;
    if (y >= 0.0) {
        if (std::abs(lambda) < eps) return std::expm1(y);
        if (lambda < 0.0) y = std::min(y, (-1.0 / lambda) * (1.0 - margin));
        return std::expm1(std::log1p(lambda * y) / lambda);
    }
    const double mu = 2.0 - lambda;
    if (std::abs(mu) < eps) return -std::expm1(-y);
    if (mu < 0.0) y = std::max(y, (1.0 / mu) * (1.0 - margin));
    return -std::expm1(std::log1p(-mu * y) / mu);
}

/// Gaussian profile log-likelihood of the transformed data (up to a constant).
[[nodiscard]] inline double yeo_johnson_log_likelihood(std::span<const double> x, double lambda) {
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        t[i] = yeo_johnson(x[i], lambda);
        mean += t[i];
    }
    mean /= n;
    double var = 0.0;
    double jacobian = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        var += (t[i] - mean) * (t[i] - mean);
        jacobian += std::copysign(std::log1p(std::abs(x[i])), x[i]);
    }
    var /= n;
    if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
    return -0.5 * n * std::log(var) + (lambda - 1.0) * jacobian;
}

inline constexpr double kLambdaMin = -5.0;
inline constexpr double kLambdaMax = 5.0;
inline constexpr double kLambdaTol = 1e-4;

/// Maximum-likelihood lambda by golden-section search on [kLambdaMin, kLambdaMax].
[[nodiscard]] inline double fit_yeo_johnson_lambda(std::span<const double> x) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = kLambdaMin, b = kLambdaMax;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = yeo_johnson_log_likelihood(x, c);
    double fd = yeo_johnson_log_likelihood(x, d);
    while (b - a > kLambdaTol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = yeo_johnson_log_likelihood(x, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = yeo_johnson_log_likelihood(x, d);
        }
    }
    return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Per-column transforms

/// Either a standardized power transform or a [0,1] min-max scaling.
struct ColumnTransform {
    enum class Kind { Power, MinMax };

    Kind kind = Kind::Power;
    double lambda = 1.0;  // power
    double mean = 0.0;    // power: standardization
    double scale = 1.0;   // power: standardization
    double lo = 0.0;      // min-max
    double hi = 1.0;      // min-max

    [[nodiscard]] double apply(double v) const {
        if (kind == Kind::MinMax) return hi > lo ? (v - lo) / (hi - lo) : 0.5;
        return (yeo_johnson(v, lambda) - mean) / scale;
    }

    /// Inverse of apply(). A degenerate min-max column inverts to its constant.
    [[nodiscard]] double invert(double v) const {
        if (kind == Kind::MinMax) return hi > lo ? lo + v * (hi - lo) : lo;
        return yeo_johnson_inverse(v * scale + mean, lambda);
    }

    [[nodiscard]] static ColumnTransform fit_min_max(std::span<const double> values) {
        ColumnTransform t;
        t.kind = Kind::MinMax;
        auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        t.lo = *lo;
        t.hi = *hi;
        return t;
    }

    [[nodiscard]] static ColumnTransform fit_power(std::span<const double> values) {
        ColumnTransform t;
        t.kind = Kind::Power;
        const bool constant = std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
        t.lambda = constant ? 1.0 : fit_yeo_johnson_lambda(values);
        double mean = 0.0;
        for (double v : values) mean += yeo_johnson(v, t.lambda);
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) {
            const double d = yeo_johnson(v, t.lambda) - mean;
            var += d * d;
        }
        var /= static_cast<double>(values.size());
        t.mean = mean;
        t.scale = var > 1e-24 ? std::sqrt(var) : 1.0;
        return t;
    }

    friend bool operator==(const ColumnTransform&, const ColumnTransform&) = default;
};

/// Fitted per-feature transforms for one feature configuration. Every time
/// step of a feature shares that feature's transform.
class Preprocessor {
public:
    Preprocessor() = default;
    Preprocessor(std::vector<FeatureId> inputs, FeatureId target, std::vector<ColumnTransform> input_transforms,
                 ColumnTransform target_transform)
        : inputs_(std::move(inputs)),
          target_(target),
          input_transforms_(std::move(input_transforms)),
          target_transform_(target_transform) {
        if (inputs_.size() != input_transforms_.size()) throw ShapeError("preprocessor: one transform per input required");
    }

    [[nodiscard]] std::span<const FeatureId> inputs() const noexcept { return inputs_; }
    [[nodiscard]] FeatureId target() const noexcept { return target_; }
    [[nodiscard]] std::span<const ColumnTransform> input_transforms() const noexcept { return input_transforms_; }
    [[nodiscard]] const ColumnTransform& target_transform() const noexcept { return target_transform_; }

    [[nodiscard]] double apply_target(double v) const { return target_transform_.apply(v); }
    [[nodiscard]] double invert_target(double v) const { return target_transform_.invert(v); }

    /// Transforms inputs (and the target, when finite) of one sample.
    [[nodiscard]] Sample apply(const Sample& s) const {
        if (s.n_features != inputs_.size())
            throw ShapeError("preprocessor expects " + std::to_string(inputs_.size()) + " features, sample has " +
                             std::to_string(s.n_features));
        Sample out = s;
        for (std::size_t i = 0; i < out.inputs.size(); ++i)
            out.inputs[i] = input_transforms_[i % s.n_features].apply(s.inputs[i]);
        if (std::isfinite(s.target)) out.target = apply_target(s.target);
        return out;
    }

    [[nodiscard]] std::vector<Sample> apply(std::span<const Sample> samples) const {
        std::vector<Sample> out;
        out.reserve(samples.size());
        for (const auto& s : samples) out.push_back(apply(s));
        return out;
    }

    friend bool operator==(const Preprocessor&, const Preprocessor&) = default;

private:
    std::vector<FeatureId> inputs_;
    FeatureId target_ = FeatureId::TargetCitations;
    std::vector<ColumnTransform> input_transforms_;
    ColumnTransform target_transform_;
};

/// Fits one transform per input feature (pooled over all window steps) and one
/// for the target, using training samples only.
[[nodiscard]] inline Preprocessor fit_preprocessor(std::span<const Sample> train, const FeatureConfig& config) {
    if (train.empty()) throw ConfigError("fit_preprocessor: no training samples");
    const std::size_t nf = config.inputs.size();
    std::vector<std::vector<double>> columns(nf);
    std::vector<double> targets;
    targets.reserve(train.size());
    for (const auto& s : train) {
        if (s.n_features != nf) throw ShapeError("fit_preprocessor: sample feature count mismatch");
        for (std::size_t i = 0; i < s.inputs.size(); ++i) columns[i % nf].push_back(s.inputs[i]);
        targets.push_back(s.target);
    }
    std::vector<ColumnTransform> transforms;
    transforms.reserve(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        transforms.push_back(uses_min_max(config.inputs[f]) ? ColumnTransform::fit_min_max(columns[f])
                                                            : ColumnTransform::fit_power(columns[f]));
    }
    return {config.inputs, config.target, std::move(transforms), ColumnTransform::fit_power(targets)};
}

[[nodiscard]] inline std::vector<Sample> apply_preprocessor(const Preprocessor& pre, std::span<const Sample> samples) {
    return pre.apply(samples);
}

}  // namespace citecast
