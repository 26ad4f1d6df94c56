#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "citecast/evaluation.hpp"
#include "citecast/grid_search.hpp"
#include "citecast/synthetic.hpp"

using namespace citecast;

namespace {

using Vec = std::vector<double>;

std::size_t task_grid_count(const std::vector<FeatureConfig>& configs, ModelFamily family) {
    GridSpec spec;
    spec.feature_configs = configs;
    spec.windows.assign(std::begin(kWindowLengths), std::end(kWindowLengths));
    spec.models = model_grid(family);
    return enumerate_grid(spec).size();
}

}  // namespace

TEST(Metrics, HandComputedCase) {
    const auto m = compute_metrics(Vec{110, 180}, Vec{100, 200});
    EXPECT_EQ(m.mae, 15.0);
    EXPECT_EQ(m.medae, 15.0);
    EXPECT_EQ(*m.mape, 10.0);
    EXPECT_EQ(*m.medape, 10.0);
    EXPECT_EQ(*m.r2, 0.9);
    EXPECT_EQ(m.n_samples, 2u);
}

TEST(Metrics, PerfectPredictions) {
    const Vec t{3, 1, 4, 1, 5, 9, 2, 6};
    const auto m = compute_metrics(t, t);
    EXPECT_EQ(m.mae, 0.0);
    EXPECT_EQ(*m.mape, 0.0);
    EXPECT_EQ(*m.r2, 1.0);
}

TEST(Metrics, MeanPredictorHasZeroR2) {
    const Vec t{2, 4, 6, 8};
    const auto m = compute_metrics(Vec(4, 5.0), t);
    EXPECT_EQ(*m.r2, 0.0);
}

TEST(Metrics, MedianOfEvenLength) {
    const auto m = compute_metrics(Vec{1, 2, 3, 4}, Vec{2, 4, 6, 8});
    EXPECT_EQ(m.medae, 2.5);
    EXPECT_EQ(*m.medape, 50.0);
}

TEST(Metrics, ZeroTargetsExcludedFromPercentErrors) {
    const auto m = compute_metrics(Vec{1, 110}, Vec{0, 100});
    EXPECT_EQ(m.n_excluded_from_mape, 1u);
    EXPECT_EQ(*m.mape, 10.0);
    EXPECT_EQ(m.mae, 5.5);
}

TEST(Metrics, UndefinedCases) {
    const auto zero = compute_metrics(Vec{1, 2}, Vec{0, 0});
    EXPECT_FALSE(zero.mape.has_value());
    EXPECT_THROW((void)zero.require_mape(), UndefinedMetricError);
    const auto constant = compute_metrics(Vec{1, 2}, Vec{3, 3});
    EXPECT_FALSE(constant.r2.has_value());
    EXPECT_THROW((void)constant.require_r2(), UndefinedMetricError);
    EXPECT_THROW((void)compute_metrics(Vec{}, Vec{}), ConfigError);
    EXPECT_THROW((void)compute_metrics(Vec{1}, Vec{1, 2}), ShapeError);
}

TEST(Metrics, R2InvariantUnderCommonShift) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(100, 20);
    Vec p(200), t(200);
    for (auto& v : p) v = g(rng);
    for (auto& v : t) v = g(rng);
    const double r2 = *compute_metrics(p, t).r2;
    for (auto& v : p) v += 1234.5;
    for (auto& v : t) v += 1234.5;
    EXPECT_NEAR(*compute_metrics(p, t).r2, r2, 1e-9);
}

TEST(Metrics, AverageOverRuns) {
    const MetricSet a = compute_metrics(Vec{110, 180}, Vec{100, 200});
    const MetricSet b = compute_metrics(Vec{100, 200}, Vec{100, 200});
    const std::vector<MetricSet> runs{a, b};
    const auto avg = average_metrics(runs);
    EXPECT_EQ(avg.mae, 7.5);
    EXPECT_EQ(*avg.mape, 5.0);
    EXPECT_DOUBLE_EQ(*avg.r2, 0.95);
}

TEST(Buckets, TenBucketsOfWidthHundred) {
    const auto e = uniform_edges(0, 1000, 10);
    ASSERT_EQ(e.size(), 11u);
    for (std::size_t i = 0; i < e.size(); ++i) EXPECT_EQ(e[i], 100.0 * static_cast<double>(i));
}

TEST(Buckets, InteriorEdgeGoesRight) {
    const Vec edges{0, 100, 200};
    const auto r = bucketize_errors(Vec{90}, Vec{100}, edges);
    EXPECT_EQ(r.buckets[0].n, 0u);
    EXPECT_EQ(r.buckets[1].n, 1u);
    EXPECT_FALSE(r.buckets[0].metrics.has_value());
    const auto out = bucketize_errors(Vec{1, 2}, Vec{200, -1}, edges);
    EXPECT_EQ(out.n_out_of_range, 2u);
}

TEST(Buckets, UniformTargetsFillEvenly) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1000);
    Vec t(10000), p(10000);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = u(rng);
        p[i] = t[i] + 1.0;
    }
    const auto edges = uniform_edges(0, 1000, 10);
    const auto r = bucketize_errors(p, t, edges);
    for (const auto& b : r.buckets) {
        EXPECT_NEAR(static_cast<double>(b.n), 1000.0, 50.0);
        EXPECT_FALSE(b.low_confidence);
    }
}

TEST(Buckets, PooledMaeIsCountWeightedMean) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 500);
    std::normal_distribution<double> g(0, 30);
    Vec t(3000), p(3000);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = u(rng);
        p[i] = t[i] + g(rng);
    }
    const auto r = bucketize_errors(p, t, uniform_edges(0, 500, 7));
    double weighted = 0;
    std::size_t n = 0;
    for (const auto& b : r.buckets) {
        weighted += b.metrics->mae * static_cast<double>(b.n);
        n += b.n;
    }
    EXPECT_EQ(n, t.size());
    EXPECT_NEAR(weighted / static_cast<double>(n), compute_metrics(p, t).mae, 1e-9);
}

TEST(Buckets, SmallBucketsFlaggedLowConfidence) {
    const auto r = bucketize_errors(Vec{1, 2, 3}, Vec{1, 2, 3}, Vec{0, 10});
    EXPECT_TRUE(r.buckets[0].low_confidence);
    EXPECT_THROW((void)bucketize_errors(Vec{}, Vec{}, Vec{1, 1}), ConfigError);
}

TEST(KFold, SizesAndPartition) {
    for (std::size_t n : {100u, 101u, 37u, 10u}) {
        const auto f = kfold_split(n, 10, 5);
        std::set<std::size_t> all;
        std::size_t lo = n, hi = 0;
        for (const auto& fold : f) {
            lo = std::min(lo, fold.size());
            hi = std::max(hi, fold.size());
            for (auto i : fold) EXPECT_TRUE(all.insert(i).second);
        }
        EXPECT_EQ(all.size(), n);
        EXPECT_LE(hi - lo, 1u);
    }
    const auto f101 = kfold_split(101, 10, 5);
    std::size_t elevens = 0;
    for (const auto& fold : f101) elevens += fold.size() == 11;
    EXPECT_EQ(elevens, 1u);
}

TEST(KFold, DeterministicAndSeedSensitive) {
    EXPECT_EQ(kfold_split(500, 10, 9), kfold_split(500, 10, 9));
    EXPECT_NE(kfold_split(500, 10, 9), kfold_split(500, 10, 10));
    EXPECT_THROW((void)kfold_split(5, 10, 1), ConfigError);
    EXPECT_THROW((void)kfold_split(50, 1, 1), ConfigError);
}

TEST(KFold, GroupedFoldsKeepGroupsTogether) {
    std::vector<std::string> groups;
    for (int g = 0; g < 40; ++g)
        for (int i = 0; i < 1 + g % 5; ++i) groups.push_back("j" + std::to_string(g));
    const auto f = kfold_split_grouped(groups, 5, 3);
    std::map<std::string, std::size_t> fold_of;
    std::size_t total = 0;
    for (std::size_t k = 0; k < f.size(); ++k)
        for (auto i : f[k]) {
            ++total;
            auto [it, fresh] = fold_of.emplace(groups[i], k);
            if (!fresh) EXPECT_EQ(it->second, k);
        }
    EXPECT_EQ(total, groups.size());
}

TEST(GridCounts, CitationsTask) {
    const auto& c = citations_task_configs();
    EXPECT_EQ(task_grid_count(c, ModelFamily::LinearRegression), 12u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::DecisionTree), 180u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::RandomForest), 540u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::Knn), 48u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::Mlp), 108u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::Rnn), 72u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::Lstm), 72u);
}

TEST(GridCounts, CiteScoreTask) {
    const auto& c = citescore_task_configs();
    EXPECT_EQ(task_grid_count(c, ModelFamily::LinearRegression), 54u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::DecisionTree), 810u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::RandomForest), 2430u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::Knn), 216u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::Mlp), 486u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::Rnn), 324u);
    EXPECT_EQ(task_grid_count(c, ModelFamily::Lstm), 324u);
    EXPECT_EQ(grid_size(c.size(), std::size(kWindowLengths), ModelFamily::RandomForest), 2430u);
}

TEST(GridSearch, SingleTupleGrid) {
    GeneratorConfig gc;
    gc.n_journals = 60;
    const auto d = generate_synthetic(gc, 4);
    GridSpec spec;
    spec.feature_configs = {feature_config("Citations Basic")};
    spec.windows = {3};
    spec.models = {LinearRegressionConfig{}};
    spec.folds = 4;
    spec.seed = 8;
    const auto r = grid_search(d, spec);
    ASSERT_EQ(r.entries.size(), 1u);
    ASSERT_EQ(r.ranking, std::vector<std::size_t>{0});
    const auto& e = r.best();
    ASSERT_EQ(e.fold_mapes.size(), 4u);
    EXPECT_DOUBLE_EQ(*e.cv_mape, std::accumulate(e.fold_mapes.begin(), e.fold_mapes.end(), 0.0) / 4.0);
    EXPECT_FALSE(e.mean_epochs.has_value());
    EXPECT_EQ(e.name(), "Citations Basic/w3/linear_regression");
}

TEST(GridSearch, RankedByScoreAndDeterministic) {
    GeneratorConfig gc;
    gc.n_journals = 60;
    const auto d = generate_synthetic(gc, 5);
    GridSpec spec;
    spec.feature_configs = {feature_config("Citations Basic")};
    spec.windows = {2, 4};
    spec.models = {LinearRegressionConfig{}, DecisionTreeConfig{3, 2}, KnnConfig{10}, MlpConfig{1, 8}};
    spec.folds = 3;
    spec.max_epochs = 30;
    spec.jobs = 2;
    const auto a = grid_search(d, spec);
    EXPECT_EQ(a.entries.size(), 8u);
    for (std::size_t i = 1; i < a.ranking.size(); ++i)
        EXPECT_LE(*a.entries[a.ranking[i - 1]].cv_mape, *a.entries[a.ranking[i]].cv_mape);
    for (const auto& e : a.entries)
        EXPECT_EQ(e.mean_epochs.has_value(), family_of(e.model) == ModelFamily::Mlp) << e.name();
    spec.jobs = 1;
    const auto b = grid_search(d, spec);
    EXPECT_EQ(a.ranking, b.ranking);
    for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].fold_mapes, b.entries[i].fold_mapes);
}

TEST(ErrorReduction, ReportedFigures) {
    EXPECT_NEAR(reduction_pct(246.787, 426.141), 42.1, 0.05);
    EXPECT_NEAR(reduction_pct(9.51, 12.53), 24.1, 0.05);
    EXPECT_NEAR(reduction_pct(0.215, 0.279), 22.9, 0.05);
    EXPECT_NEAR(reduction_pct(9.04, 11.07), 18.3, 0.05);
    EXPECT_EQ(reduction_pct(3.0, 3.0), 0.0);
    EXPECT_THROW((void)reduction_pct(1.0, 0.0), UndefinedMetricError);
}

TEST(ErrorReduction, FromMetricSets) {
    const auto model = compute_metrics(Vec{105, 190}, Vec{100, 200});
    const auto base = compute_metrics(Vec{110, 180}, Vec{100, 200});
    const auto r = error_reduction(model, base);
    EXPECT_DOUBLE_EQ(*r.mae_reduction_pct, 100.0 * (15.0 - 7.5) / 15.0);
    EXPECT_DOUBLE_EQ(*r.mape_reduction_pct, 100.0 * (10.0 - 5.0) / 10.0);
    const auto perfect = compute_metrics(Vec{100, 200}, Vec{100, 200});
    EXPECT_FALSE(error_reduction(model, perfect).mae_reduction_pct.has_value());
}
