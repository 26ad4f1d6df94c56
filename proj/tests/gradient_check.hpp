#pragma once

// Finite-difference checks of the hand-derived network gradients, shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "citecast/models/network.hpp"

namespace citecast::testing {

inline constexpr double kGradStep = 1e-5;
inline constexpr double kGradRelTol = 1e-4;
/// Denominator floor so that gradients that are zero up to rounding compare by
/// absolute error instead of blowing up the ratio.
inline constexpr double kGradFloor = 1e-6;

[[nodiscard]] inline double gradient_rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
}

/// Worst relative error over every parameter of `net` on random data.
template <class Net>
[[nodiscard]] double max_gradient_error(const Net& net, std::size_t width, std::mt19937_64& rng, int rows = 4) {
    std::normal_distribution<double> n(0.0, 1.0);
    RowMatrix x(rows, static_cast<Eigen::Index>(width));
    VectorXd y(rows);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = n(rng);
    std::vector<double> p(net.parameter_count());
    for (double& v : p) v = 0.5 * n(rng);

    std::vector<double> analytic(p.size());
    (void)net.loss_and_gradient(p, x, y, analytic);
    const auto numeric = numerical_gradient(
        [&](const std::vector<double>& q) { return net.loss_and_gradient(q, x, y, {}); }, p, kGradStep);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, gradient_rel_error(analytic[i], numeric[i]));
    return worst;
}

enum class GradNet { Mlp, Rnn, Lstm };

/// One random small instance (at most 8 units, at most 3 timesteps).
[[nodiscard]] inline double random_gradient_check(GradNet which, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> units(1, 8), layers(1, 2), steps(1, 3), feats(1, 4);
    const int f = feats(rng);
    if (which == GradNet::Mlp) {
        const MlpNet net(static_cast<std::size_t>(f * steps(rng)), MlpConfig{layers(rng), units(rng)});
        return max_gradient_error(net, net.input_dim(), rng);
    }
    const int t = steps(rng);
    const RecurrentNet net(which == GradNet::Rnn ? CellKind::Rnn : CellKind::Lstm, static_cast<std::size_t>(f),
                           layers(rng), units(rng));
    return max_gradient_error(net, static_cast<std::size_t>(f * t), rng);
}

}  // namespace citecast::testing
