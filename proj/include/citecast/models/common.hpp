#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "citecast/error.hpp"
#include "citecast/features.hpp"
#include "citecast/models/config.hpp"

namespace citecast {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense design matrix: one row per sample, columns are the window's feature
/// vectors concatenated oldest-first (row-major window_len x n_features).
struct TrainingData {
    std::size_t window_len = 0;
    std::size_t n_features = 0;
    RowMatrix x;
    VectorXd y;

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(x.rows()); }
    [[nodiscard]] std::size_t width() const noexcept { return window_len * n_features; }

    [[nodiscard]] static TrainingData from_samples(std::span<const Sample> samples) {
        if (samples.empty()) throw ConfigError("no training samples");
        TrainingData d;
        d.window_len = samples.front().window_len();
        d.n_features = samples.front().n_features;
        d.x.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(d.width()));
        d.y.resize(static_cast<Eigen::Index>(samples.size()));
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            if (s.window_len() != d.window_len || s.n_features != d.n_features || s.inputs.size() != d.width())
                throw ShapeError("training samples do not share one window/feature layout");
            for (std::size_t j = 0; j < d.width(); ++j) {
                if (!std::isfinite(s.inputs[j])) throw DataError("non-finite input in sample for " + s.journal_id);
                d.x(i, j) = s.inputs[j];
            }
            if (!std::isfinite(s.target)) throw DataError("non-finite target in sample for " + s.journal_id);
            d.y(i) = s.target;
        }
        return d;
    }

    /// Rows selected by `idx`, in that order.
    [[nodiscard]] TrainingData subset(std::span<const std::size_t> idx) const {
        TrainingData d;
        d.window_len = window_len;
        d.n_features = n_features;
        d.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
        d.y.resize(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            d.x.row(i) = x.row(idx[i]);
            d.y(i) = y(idx[i]);
        }
        return d;
    }
};

// ---------------------------------------------------------------------------
// Loss

[[nodiscard]] inline double mse_loss(std::span<const double> preds, std::span<const double> targets) {
    if (preds.empty()) throw ConfigError("mse_loss: empty input");
    if (preds.size() != targets.size()) throw ShapeError("mse_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double e = preds[i] - targets[i];
        acc += e * e;
    }
    return acc / static_cast<double>(preds.size());
}

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update, in place.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                      const AdamHyper& hyper) {
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw ShapeError("adam_step: parameter/gradient/state sizes differ");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(hyper.beta1, t);
    const double c2 = 1.0 - std::pow(hyper.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * grads[i];
        state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) fill for a weight block.
template <class Rng>
inline void init_uniform(std::span<double> block, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : block) w = dist(rng);
}

}  // namespace citecast
