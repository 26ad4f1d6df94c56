#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "citecast/data_model.hpp"
#include "citecast/evaluation.hpp"
#include "citecast/features.hpp"
#include "citecast/models/model.hpp"
#include "citecast/preprocess.hpp"

namespace citecast {

/// Runs fn(0..n-1) on up to `jobs` threads. Each index is processed exactly
/// once; callers write results into per-index slots, so output order never
/// depends on scheduling. The first exception is rethrown after all workers stop.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, n); ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

[[nodiscard]] inline int default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---------------------------------------------------------------------------
// Grid definition

struct GridSpec {
    std::vector<FeatureConfig> feature_configs;
    std::vector<int> windows;
    std::vector<ModelConfig> models;
    int folds = 10;
    std::uint64_t seed = 0;
    /// Keep each journal's samples inside one fold.
    bool journal_folds = false;
    /// Cap on epochs for early-stopped training inside the search.
    std::optional<int> max_epochs = 2000;
    int jobs = 1;
};

struct GridTuple {
    std::size_t feature_index = 0;
    int window_len = 0;
    std::size_t model_index = 0;
};

/// Feature configuration outermost, then window, then model.
[[nodiscard]] inline std::vector<GridTuple> enumerate_grid(const GridSpec& spec) {
    std::vector<GridTuple> out;
    out.reserve(spec.feature_configs.size() * spec.windows.size() * spec.models.size());
    for (std::size_t f = 0; f < spec.feature_configs.size(); ++f)
        for (int w : spec.windows)
            for (std::size_t m = 0; m < spec.models.size(); ++m) out.push_back({f, w, m});
    return out;
}

/// Number of configurations searched for one family on one task.
[[nodiscard]] inline std::size_t grid_size(std::size_t n_feature_configs, std::size_t n_windows, ModelFamily family) {
    return n_feature_configs * n_windows * model_grid(family).size();
}

// ---------------------------------------------------------------------------
// Results

struct GridEntry {
    std::size_t tuple_index = 0;
    std::string feature_config;
    int window_len = 0;
    ModelConfig model;
    std::optional<double> cv_mape;
    std::vector<double> fold_mapes;
    /// Mean epochs kept by early stopping across folds (iterative models only).
    std::optional<double> mean_epochs;
    double parameter_count = 0.0;
    bool failed = false;
    std::string failure;

    [[nodiscard]] std::string name() const {
        return feature_config + "/w" + std::to_string(window_len) + "/" + describe(model);
    }
};

struct GridSearchResult {
    std::vector<GridEntry> entries;  // tuple order
    std::vector<std::size_t> ranking;  // successful entries, best first

    [[nodiscard]] const GridEntry& best() const {
        if (ranking.empty()) throw ConfigError("grid search produced no successful configuration");
        return entries[ranking.front()];
    }
};

/// Ascending cv MAPE, then fewer parameters, then name.
inline void rank_entries(GridSearchResult& r) {
    r.ranking.clear();
    for (std::size_t i = 0; i < r.entries.size(); ++i)
        if (!r.entries[i].failed) r.ranking.push_back(i);
    std::stable_sort(r.ranking.begin(), r.ranking.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = r.entries[a];
        const auto& y = r.entries[b];
        if (*x.cv_mape != *y.cv_mape) return *x.cv_mape < *y.cv_mape;
        if (x.parameter_count != y.parameter_count) return x.parameter_count < y.parameter_count;
        return x.name() < y.name();
    });
}

using GridLogger = std::function<void(const std::string&)>;

/// K-fold cross-validated grid search on the training journals. Each fold
/// fits its own preprocessor on the fold's training part; MAPE is scored on
/// inverse-transformed predictions and averaged over folds. A tuple whose
/// training diverges or whose MAPE is undefined in any fold is marked failed.
[[nodiscard]] inline GridSearchResult grid_search(const Dataset& train, const GridSpec& spec,
                                                  const GridLogger& log = {}) {
    if (spec.feature_configs.empty() || spec.windows.empty() || spec.models.empty())
        throw ConfigError("grid search needs at least one feature config, window and model");
    const auto tuples = enumerate_grid(spec);
    GridSearchResult result;
    result.entries.resize(tuples.size());
    for (std::size_t t = 0; t < tuples.size(); ++t) {
        auto& e = result.entries[t];
        e.tuple_index = t;
        e.feature_config = spec.feature_configs[tuples[t].feature_index].name;
        e.window_len = tuples[t].window_len;
        e.model = spec.models[tuples[t].model_index];
    }
    const std::size_t n_models = spec.models.size();
    const auto k = static_cast<std::size_t>(spec.folds);

    // One (feature config, window) group at a time keeps only that group's
    // transformed fold data in memory.
    for (std::size_t f = 0; f < spec.feature_configs.size(); ++f) {
        for (std::size_t w = 0; w < spec.windows.size(); ++w) {
            const auto& fc = spec.feature_configs[f];
            const int window = spec.windows[w];
            const std::size_t first_tuple = (f * spec.windows.size() + w) * n_models;
            const auto samples = enumerate_samples(train, fc, window);
            std::vector<std::vector<std::size_t>> folds;
            try {
                if (spec.journal_folds) {
                    std::vector<std::string> groups;
                    groups.reserve(samples.size());
                    for (const auto& s : samples) groups.push_back(s.journal_id);
                    folds = kfold_split_grouped(groups, spec.folds, spec.seed);
                } else {
                    folds = kfold_split(samples.size(), spec.folds, spec.seed);
                }
            } catch (const ConfigError& err) {
                for (std::size_t m = 0; m < n_models; ++m) {
                    auto& e = result.entries[first_tuple + m];
                    e.failed = true;
                    e.failure = err.what();
                }
                if (log) log(fc.name + "/w" + std::to_string(window) + ": " + err.what());
                continue;
            }

            struct FoldData {
                Preprocessor pre;
                TrainingData train;
                RowMatrix test_x;
                std::vector<double> test_y;  // raw scale
            };
            std::vector<FoldData> fold_data(k);
            parallel_for(k, spec.jobs, [&](std::size_t fi) {
                auto& fd = fold_data[fi];
                std::vector<Sample> tr, te;
                for (std::size_t i : fold_complement(folds, fi)) tr.push_back(samples[i]);
                for (std::size_t i : folds[fi]) te.push_back(samples[i]);
                fd.pre = fit_preprocessor(tr, fc);
                fd.train = TrainingData::from_samples(fd.pre.apply(tr));
                const auto te_t = TrainingData::from_samples(fd.pre.apply(te));
                fd.test_x = te_t.x;
                for (const auto& s : te) fd.test_y.push_back(s.target);
            });

            struct Outcome {
                std::optional<double> mape;
                int epochs = 0;
                std::size_t params = 0;
                std::string failure;
            };
            std::vector<Outcome> outcomes(n_models * k);
            parallel_for(outcomes.size(), spec.jobs, [&](std::size_t job) {
                const std::size_t m = job / k, fi = job % k;
                auto& out = outcomes[job];
                const auto& fd = fold_data[fi];
                const auto& mc = spec.models[m];
                auto opts = TrainOptions::selection(family_of(mc), derive_seed(spec.seed, fi));
                opts.max_epochs = spec.max_epochs;
                try {
                    const auto model = train_model(mc, fd.train, opts);
                    const VectorXd pt = model.predict_matrix(fd.test_x);
                    std::vector<double> preds(static_cast<std::size_t>(pt.size()));
                    for (std::size_t i = 0; i < preds.size(); ++i)
                        preds[i] = fd.pre.invert_target(pt(static_cast<Eigen::Index>(i)));
                    out.mape = compute_metrics(preds, fd.test_y).mape;
                    if (!out.mape) out.failure = "MAPE undefined in fold " + std::to_string(fi);
                    out.epochs = model.summary().epochs_used;
                    out.params = model.parameter_count();
                } catch (const DivergenceError& err) {
                    out.failure = "fold " + std::to_string(fi) + ": " + err.what();
                }
            });

            for (std::size_t m = 0; m < n_models; ++m) {
                auto& e = result.entries[first_tuple + m];
                double sum = 0.0, epochs = 0.0, params = 0.0;
                for (std::size_t fi = 0; fi < k; ++fi) {
                    const auto& o = outcomes[m * k + fi];
                    if (!o.mape) {
                        e.failed = true;
                        if (e.failure.empty()) e.failure = o.failure;
                        continue;
                    }
                    e.fold_mapes.push_back(*o.mape);
                    sum += *o.mape;
                    epochs += o.epochs;
                    params += static_cast<double>(o.params);
                }
                if (e.failed) {
                    e.fold_mapes.clear();
                    if (log) log(e.name() + " failed: " + e.failure);
                    continue;
                }
                e.cv_mape = sum / static_cast<double>(k);
                e.parameter_count = params / static_cast<double>(k);
                if (is_iterative(family_of(e.model))) e.mean_epochs = epochs / static_cast<double>(k);
                if (log) log(e.name() + " cv_mape=" + std::to_string(*e.cv_mape));
            }
        }
    }
    rank_entries(result);
    return result;
}

}  // namespace citecast
