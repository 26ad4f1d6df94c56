#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "citecast/models/common.hpp"

namespace citecast {

/// Uniform-weight k-nearest-neighbour regression under Euclidean distance.
/// Equidistant neighbours are ranked by training index; k is clamped to the
/// training set size.
class KnnModel {
public:
    KnnModel() = default;
    KnnModel(int k, RowMatrix x, VectorXd y) : k_(k), x_(std::move(x)), y_(std::move(y)) {}

    [[nodiscard]] static KnnModel fit(const TrainingData& data, const KnnConfig& config) {
        if (config.k < 1) throw ConfigError("knn: k must be >= 1");
        return {config.k, data.x, data.y};
    }

    [[nodiscard]] int k() const noexcept { return k_; }
    [[nodiscard]] std::size_t effective_k() const noexcept {
        return std::min<std::size_t>(static_cast<std::size_t>(k_), static_cast<std::size_t>(x_.rows()));
    }

    /// Training indices of the effective_k() nearest neighbours, nearest first.
    [[nodiscard]] std::vector<std::size_t> neighbours(std::span<const double> q) const {
        if (q.size() != static_cast<std::size_t>(x_.cols())) throw ShapeError("knn: input width mismatch");
        const Eigen::Map<const Eigen::RowVectorXd> qv(q.data(), static_cast<Eigen::Index>(q.size()));
        std::vector<std::pair<double, std::size_t>> d(static_cast<std::size_t>(x_.rows()));
        for (Eigen::Index i = 0; i < x_.rows(); ++i)
            d[static_cast<std::size_t>(i)] = {(x_.row(i) - qv).squaredNorm(), static_cast<std::size_t>(i)};
        const std::size_t k = effective_k();
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
        std::vector<std::size_t> out(k);
        for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
        return out;
    }

    [[nodiscard]] double predict(std::span<const double> q) const {
        double acc = 0.0;
        const auto nb = neighbours(q);
        for (std::size_t i : nb) acc += y_(static_cast<Eigen::Index>(i));
        return acc / static_cast<double>(nb.size());
    }

    [[nodiscard]] const RowMatrix& points() const noexcept { return x_; }
    [[nodiscard]] const VectorXd& targets() const noexcept { return y_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return static_cast<std::size_t>(x_.size() + y_.size()); }

    friend bool operator==(const KnnModel& a, const KnnModel& b) {
        return a.k_ == b.k_ && a.x_.rows() == b.x_.rows() && a.x_.cols() == b.x_.cols() && a.x_ == b.x_ &&
               a.y_ == b.y_;
    }

private:
    int k_ = 1;
    RowMatrix x_;
    VectorXd y_;
};

}  // namespace citecast
