#pragma once

#include <span>
#include <vector>

#include "citecast/models/common.hpp"

namespace citecast {

/// Ordinary least squares with an intercept, solved by column-pivoting QR.
class LinearModel {
public:
    LinearModel() = default;
    LinearModel(std::vector<double> coefficients, double intercept)
        : coefficients_(std::move(coefficients)), intercept_(intercept) {}

    [[nodiscard]] static LinearModel fit(const TrainingData& data) {
        const Eigen::Index n = data.x.rows();
        const Eigen::Index p = data.x.cols();
        MatrixXd design(n, p + 1);
        design.leftCols(p) = data.x;
        design.col(p).setOnes();
        const VectorXd beta = design.colPivHouseholderQr().solve(data.y);
        std::vector<double> coef(beta.data(), beta.data() + p);
        return {std::move(coef), beta(p)};
    }

    [[nodiscard]] double predict(std::span<const double> x) const {
        if (x.size() != coefficients_.size()) throw ShapeError("linear model: input width mismatch");
        double acc = intercept_;
        for (std::size_t i = 0; i < x.size(); ++i) acc += coefficients_[i] * x[i];
        return acc;
    }

    [[nodiscard]] std::span<const double> coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] double intercept() const noexcept { return intercept_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return coefficients_.size() + 1; }

    friend bool operator==(const LinearModel&, const LinearModel&) = default;

private:
    std::vector<double> coefficients_;
    double intercept_ = 0.0;
};

}  // namespace citecast
