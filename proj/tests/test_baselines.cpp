#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "citecast/baselines.hpp"

using namespace citecast;

namespace {

using Vec = std::vector<double>;

double predict(BaselineKind k, const Vec& s) { return baseline_predict(k, s); }

constexpr BaselineKind kAll[] = {BaselineKind::Persistence, BaselineKind::Delta, BaselineKind::WeightedDelta};

}  // namespace

TEST(Persistence, Examples) {
    EXPECT_EQ(persistence_predict(Vec{105}), 105);
    EXPECT_EQ(persistence_predict(Vec{1, 2, 3}), 3);
    EXPECT_THROW((void)persistence_predict(Vec{}), InsufficientHistoryError);
}

TEST(Persistence, PredictionIsAFixedPoint) {
    Vec s{3, 9, 4};
    const double p = persistence_predict(s);
    s.push_back(p);
    EXPECT_EQ(persistence_predict(s), p);
}

TEST(Delta, Examples) {
    EXPECT_EQ(delta_predict(Vec{100, 110}), 120);
    EXPECT_EQ(delta_predict(Vec{50, 50}), 50);
    EXPECT_EQ(delta_predict(Vec{110, 100}), 90);
    EXPECT_THROW((void)delta_predict(Vec{1}), InsufficientHistoryError);
}

TEST(WeightedDelta, Examples) {
    EXPECT_EQ(weighted_delta_predict(Vec{100, 100, 100, 100, 100}), 100);
    EXPECT_DOUBLE_EQ(weighted_delta_predict(Vec{0, 10, 20, 30, 40}), 50);
    EXPECT_DOUBLE_EQ(weighted_delta_predict(Vec{0, 0, 0, 0, 100}), 140);
    EXPECT_THROW((void)weighted_delta_predict(Vec{1, 2, 3, 4}), InsufficientHistoryError);
}

TEST(PrintedSumVariant, DiffersFromDifferences) {
    EXPECT_EQ(delta_predict(Vec{100, 110}, DeltaVariant::PrintedSum), 110 + 105);
    EXPECT_DOUBLE_EQ(weighted_delta_predict(Vec{0, 0, 0, 0, 100}, DeltaVariant::PrintedSum), 100 + 0.4 * 100);
    EXPECT_DOUBLE_EQ(weighted_delta_predict(Vec{1, 1, 1, 1, 1}, DeltaVariant::PrintedSum), 1 + 2.0);
}

TEST(Baselines, OnlyTheTailMatters) {
    EXPECT_EQ(delta_predict(Vec{-1e6, 3, 5}), 7);
    EXPECT_DOUBLE_EQ(weighted_delta_predict(Vec{1e9, 0, 10, 20, 30, 40}), 50);
}

TEST(Baselines, NamesRoundTrip) {
    for (auto k : kAll) EXPECT_EQ(baseline_from_name(baseline_name(k)), k);
    EXPECT_THROW((void)baseline_from_name("arima"), ConfigError);
    EXPECT_EQ(baseline_lookback(BaselineKind::WeightedDelta), 5u);
}

TEST(BaselineProperties, ConstantSeriesReturnsConstant) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    for (int t = 0; t < 500; ++t) {
        const Vec s(5 + t % 7, u(rng));
        for (auto k : kAll) EXPECT_EQ(predict(k, s), s.front());
    }
}

TEST(BaselineProperties, LinearSeriesExtrapolatesExactly) {
    // Integer slopes and intercepts keep every intermediate exactly representable.
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> u(-1000, 1000);
    for (int t = 0; t < 500; ++t) {
        const double a = u(rng), b = u(rng);
        Vec s;
        for (int i = 0; i < 8; ++i) s.push_back(a + b * i);
        EXPECT_EQ(predict(BaselineKind::Delta, s), a + b * 8);
        EXPECT_EQ(predict(BaselineKind::WeightedDelta, s), a + b * 8);
    }
}

TEST(BaselineProperties, TranslationAndScaleEquivariant) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1000), c(-500, 500), k(0.1, 10);
    for (int t = 0; t < 1000; ++t) {
        Vec s(6);
        for (auto& v : s) v = u(rng);
        const double shift = c(rng), scale = k(rng);
        Vec shifted = s, scaled = s;
        for (auto& v : shifted) v += shift;
        for (auto& v : scaled) v *= scale;
        for (auto kind : kAll) {
            const double p = predict(kind, s);
            EXPECT_NEAR(predict(kind, shifted), p + shift, 1e-9 * (1 + std::abs(p) + std::abs(shift)));
            EXPECT_NEAR(predict(kind, scaled), scale * p, 1e-9 * (1 + std::abs(scale * p)));
        }
    }
}

TEST(BaselineProperties, DecliningSeriesIsNotClamped) {
    EXPECT_EQ(delta_predict(Vec{10, 2}), -6);
    EXPECT_LT(weighted_delta_predict(Vec{40, 30, 20, 10, 0}), 0);
}
