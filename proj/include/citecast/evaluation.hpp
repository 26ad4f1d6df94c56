#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "citecast/error.hpp"
#include "citecast/random.hpp"

namespace citecast {

// ---------------------------------------------------------------------------
// Metrics

/// Regression metrics on raw (inverse-transformed) values. Percent errors use
/// only nonzero targets; a metric that cannot be computed is left empty.
struct MetricSet {
    double mae = 0.0;
    double medae = 0.0;
    std::optional<double> mape;    // percent
    std::optional<double> medape;  // percent
    std::optional<double> r2;
    std::size_t n_samples = 0;
    std::size_t n_excluded_from_mape = 0;

    [[nodiscard]] double require_mape() const {
        if (!mape) throw UndefinedMetricError("MAPE undefined: every target is zero");
        return *mape;
    }
    [[nodiscard]] double require_r2() const {
        if (!r2) throw UndefinedMetricError("R^2 undefined: targets are constant");
        return *r2;
    }
};

/// Median of a copy; the mean of the two middle values for even lengths.
[[nodiscard]] inline double median(std::vector<double> v) {
    if (v.empty()) throw ConfigError("median of empty sequence");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

[[nodiscard]] inline MetricSet compute_metrics(std::span<const double> preds, std::span<const double> targets) {
    if (preds.empty()) throw ConfigError("compute_metrics: no samples");
    if (preds.size() != targets.size()) throw ShapeError("compute_metrics: length mismatch");
    const std::size_t n = preds.size();
    MetricSet m;
    m.n_samples = n;

    std::vector<double> abs_err(n), pct_err;
    pct_err.reserve(n);
    double sse = 0.0, target_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = preds[i] - targets[i];
        abs_err[i] = std::abs(e);
        sse += e * e;
        target_mean += targets[i];
        if (targets[i] != 0.0) pct_err.push_back(100.0 * abs_err[i] / std::abs(targets[i]));
    }
    target_mean /= static_cast<double>(n);
    m.mae = std::accumulate(abs_err.begin(), abs_err.end(), 0.0) / static_cast<double>(n);
    m.medae = median(abs_err);
    m.n_excluded_from_mape = n - pct_err.size();
    if (!pct_err.empty()) {
        m.mape = std::accumulate(pct_err.begin(), pct_err.end(), 0.0) / static_cast<double>(pct_err.size());
        m.medape = median(std::move(pct_err));
    }
    double sst = 0.0;
    for (double t : targets) sst += (t - target_mean) * (t - target_mean);
    if (sst > 0.0) m.r2 = 1.0 - sse / sst;
    return m;
}

/// Element-wise mean of metric sets (e.g. over repeated training runs). A
/// metric is present only if present in every input.
[[nodiscard]] inline MetricSet average_metrics(std::span<const MetricSet> runs) {
    if (runs.empty()) throw ConfigError("average_metrics: no runs");
    MetricSet out = runs.front();
    const auto k = static_cast<double>(runs.size());
    auto avg_opt = [&](auto member) -> std::optional<double> {
        double acc = 0.0;
        for (const auto& r : runs) {
            if (!(r.*member)) return std::nullopt;
            acc += *(r.*member);
        }
        return acc / k;
    };
    double mae = 0.0, medae = 0.0;
    for (const auto& r : runs) {
        mae += r.mae;
        medae += r.medae;
    }
    out.mae = mae / k;
    out.medae = medae / k;
    out.mape = avg_opt(&MetricSet::mape);
    out.medape = avg_opt(&MetricSet::medape);
    out.r2 = avg_opt(&MetricSet::r2);
    return out;
}

// ---------------------------------------------------------------------------
// Bucketized errors

inline constexpr std::size_t kLowConfidenceCount = 20;

struct Bucket {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
    std::optional<MetricSet> metrics;  // empty when the bucket has no samples
    bool low_confidence = true;
};

struct BucketReport {
    std::vector<double> edges;
    std::vector<Bucket> buckets;
    std::size_t n_out_of_range = 0;
};

/// Evenly spaced edges lo, lo+width, ..., hi.
[[nodiscard]] inline std::vector<double> uniform_edges(double lo, double hi, int n_buckets) {
    if (n_buckets < 1 || !(hi > lo)) throw ConfigError("uniform_edges: need hi > lo and at least one bucket");
    std::vector<double> e(static_cast<std::size_t>(n_buckets) + 1);
    for (int i = 0; i <= n_buckets; ++i) e[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / n_buckets;
    return e;
}

/// Groups samples by ground truth into half-open buckets [e_i, e_{i+1}).
[[nodiscard]] inline BucketReport bucketize_errors(std::span<const double> preds, std::span<const double> targets,
                                                   std::span<const double> edges) {
    if (edges.size() < 2) throw ConfigError("bucketize_errors: need at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw ConfigError("bucketize_errors: edges must be strictly ascending");
    if (preds.size() != targets.size()) throw ShapeError("bucketize_errors: length mismatch");

    const std::size_t nb = edges.size() - 1;
    std::vector<std::vector<double>> bp(nb), bt(nb);
    BucketReport r;
    r.edges.assign(edges.begin(), edges.end());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double t = targets[i];
        if (!(t >= edges.front() && t < edges.back())) {
            ++r.n_out_of_range;
            continue;
        }
        const auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), t) - edges.begin()) - 1;
        bp[b].push_back(preds[i]);
        bt[b].push_back(t);
    }
    for (std::size_t b = 0; b < nb; ++b) {
        Bucket k;
        k.lo = edges[b];
        k.hi = edges[b + 1];
        k.n = bt[b].size();
        if (k.n > 0) k.metrics = compute_metrics(bp[b], bt[b]);
        k.low_confidence = k.n < kLowConfidenceCount;
        r.buckets.push_back(std::move(k));
    }
    return r;
}

// ---------------------------------------------------------------------------
// K-fold partitioning

/// Shuffled sample-level folds. The first n % k folds hold one extra sample;
/// indices within a fold are ascending.
[[nodiscard]] inline std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold_split: k must be >= 2");
    const auto kk = static_cast<std::size_t>(k);
    if (n < kk) throw ConfigError("kfold_split: " + std::to_string(n) + " samples cannot fill " + std::to_string(k) + " folds");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = make_rng(seed, 0xf01dULL);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> folds(kk);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < kk; ++f) {
        const std::size_t size = n / kk + (f < n % kk ? 1 : 0);
        folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

/// Folds that never split a group (e.g. a journal) across folds. Groups are
/// shuffled and dealt to the currently smallest fold, so fold sizes are only
/// approximately equal.
[[nodiscard]] inline std::vector<std::vector<std::size_t>> kfold_split_grouped(std::span<const std::string> groups, int k,
                                                                               std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold_split_grouped: k must be >= 2");
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < groups.size(); ++i) members[groups[i]].push_back(i);
    if (members.size() < static_cast<std::size_t>(k))
        throw ConfigError("kfold_split_grouped: fewer groups than folds");
    std::vector<const std::vector<std::size_t>*> order;
    for (const auto& [_, m] : members) order.push_back(&m);
    auto rng = make_rng(seed, 0xf01dULL);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (const auto* m : order) {
        auto smallest = std::min_element(folds.begin(), folds.end(),
                                         [](const auto& a, const auto& b) { return a.size() < b.size(); });
        smallest->insert(smallest->end(), m->begin(), m->end());
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

/// Complement of fold `f`, ascending.
[[nodiscard]] inline std::vector<std::size_t> fold_complement(const std::vector<std::vector<std::size_t>>& folds,
                                                              std::size_t f) {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Error reduction

/// 100 * (baseline - model) / baseline.
[[nodiscard]] inline double reduction_pct(double model, double baseline) {
    if (baseline == 0.0) throw UndefinedMetricError("error reduction undefined for a zero baseline");
    return 100.0 * (baseline - model) / baseline;
}

struct ErrorReduction {
    std::optional<double> mae_reduction_pct;
    std::optional<double> mape_reduction_pct;
};

[[nodiscard]] inline ErrorReduction error_reduction(const MetricSet& model, const MetricSet& baseline) {
    ErrorReduction r;
    if (baseline.mae != 0.0) r.mae_reduction_pct = reduction_pct(model.mae, baseline.mae);
    if (model.mape && baseline.mape && *baseline.mape != 0.0)
        r.mape_reduction_pct = reduction_pct(*model.mape, *baseline.mape);
    return r;
}

}  // namespace citecast
