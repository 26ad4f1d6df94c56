#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "citecast/models/common.hpp"
#include "citecast/random.hpp"

namespace citecast {

namespace detail {

/// Row indices sorted by each column (ties by row index).
using ColumnOrder = std::vector<std::vector<std::uint32_t>>;

[[nodiscard]] inline ColumnOrder column_order(const TrainingData& data) {
    const auto n = static_cast<std::uint32_t>(data.rows());
    ColumnOrder order(data.width());
    for (std::size_t f = 0; f < order.size(); ++f) {
        auto& o = order[f];
        o.resize(n);
        std::iota(o.begin(), o.end(), 0u);
        std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return data.x(a, f) < data.x(b, f); });
    }
    return order;
}

}  // namespace detail

/// CART regression tree. Splits minimise the summed squared error of the two
/// children; candidate thresholds are midpoints between adjacent distinct
/// values. Ties go to the lowest feature index, then the lowest threshold.
class DecisionTreeModel {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
        int n_samples = 0;
        double impurity = 0.0;  // mean squared deviation of the node's targets

        [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
        friend bool operator==(const Node&, const Node&) = default;
    };

    DecisionTreeModel() = default;
    DecisionTreeModel(std::vector<Node> nodes, std::size_t width) : nodes_(std::move(nodes)), width_(width) {}

    [[nodiscard]] static DecisionTreeModel fit(const TrainingData& data, const DecisionTreeConfig& config) {
        std::vector<std::uint32_t> counts(data.rows(), 1);
        return fit_weighted(data, config, detail::column_order(data), counts);
    }

    /// Fits on a multiset of rows: row r appears counts[r] times.
    [[nodiscard]] static DecisionTreeModel fit_weighted(const TrainingData& data, const DecisionTreeConfig& config,
                                                        const detail::ColumnOrder& order,
                                                        std::span<const std::uint32_t> counts) {
        if (config.max_depth < 0) throw ConfigError("decision tree: max_depth must be >= 0");
        if (config.min_samples_split < 2) throw ConfigError("decision tree: min_samples_split must be >= 2");
        Builder b(data, config, order, counts);
        return {std::move(b.nodes), data.width()};
    }

    [[nodiscard]] double predict(std::span<const double> x) const {
        if (x.size() != width_) throw ShapeError("decision tree: input width mismatch");
        int i = 0;
        while (!nodes_[i].is_leaf()) i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
        return nodes_[i].value;
    }

    [[nodiscard]] std::span<const Node> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return nodes_.size(); }

    [[nodiscard]] int depth() const {
        std::vector<int> d(nodes_.size(), 0);
        int best = 0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            best = std::max(best, d[i]);
            if (!nodes_[i].is_leaf()) d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
        }
        return best;
    }

    friend bool operator==(const DecisionTreeModel&, const DecisionTreeModel&) = default;

private:
    struct Builder {
        const TrainingData& data;
        const DecisionTreeConfig& config;
        std::vector<std::uint32_t> row_of;             // position -> data row
        std::vector<std::vector<std::uint32_t>> sorted;  // per feature, positions sorted by value
        std::vector<char> goes_left;
        std::vector<std::uint32_t> scratch;
        std::vector<Node> nodes;

        Builder(const TrainingData& d, const DecisionTreeConfig& c, const detail::ColumnOrder& order,
                std::span<const std::uint32_t> counts)
            : data(d), config(c) {
            if (counts.size() != d.rows()) throw ShapeError("decision tree: counts/rows mismatch");
            std::vector<std::uint32_t> first(counts.size() + 1, 0);
            for (std::size_t r = 0; r < counts.size(); ++r) first[r + 1] = first[r] + counts[r];
            const std::uint32_t m = first.back();
            if (m == 0) throw ConfigError("decision tree: no training rows");
            row_of.resize(m);
            for (std::size_t r = 0; r < counts.size(); ++r)
                for (std::uint32_t p = first[r]; p < first[r + 1]; ++p) row_of[p] = static_cast<std::uint32_t>(r);
            sorted.resize(d.width());
            for (std::size_t f = 0; f < sorted.size(); ++f) {
                sorted[f].reserve(m);
                for (std::uint32_t r : order[f])
                    for (std::uint32_t p = first[r]; p < first[r + 1]; ++p) sorted[f].push_back(p);
            }
            goes_left.resize(m);
            scratch.resize(m);
            build(0, m, 0);
        }

        double x(std::uint32_t pos, std::size_t f) const { return data.x(row_of[pos], f); }
        double y(std::uint32_t pos) const { return data.y(row_of[pos]); }

        int build(std::uint32_t lo, std::uint32_t hi, int depth) {
            const int id = static_cast<int>(nodes.size());
            nodes.emplace_back();
            const std::uint32_t n = hi - lo;
            double sum = 0.0;
            for (std::uint32_t i = lo; i < hi; ++i) sum += y(sorted[0][i]);
            const double mean = sum / n;
            double sse = 0.0;
            for (std::uint32_t i = lo; i < hi; ++i) {
                const double e = y(sorted[0][i]) - mean;
                sse += e * e;
            }
            nodes[id].value = mean;
            nodes[id].n_samples = static_cast<int>(n);
            nodes[id].impurity = sse / n;
            if (depth >= config.max_depth || n < static_cast<std::uint32_t>(config.min_samples_split) || !(sse > 0.0))
                return id;

            // Maximising sum_l^2/n_l + sum_r^2/n_r minimises the children's SSE.
            const double base = sum * sum / n;
            double best_score = base;
            int best_f = -1;
            double best_thr = 0.0;
            std::uint32_t best_nl = 0;
            for (std::size_t f = 0; f < sorted.size(); ++f) {
                const auto& s = sorted[f];
                double left = 0.0;
                for (std::uint32_t i = lo; i + 1 < hi; ++i) {
                    left += y(s[i]);
                    const double a = x(s[i], f);
                    const double b = x(s[i + 1], f);
                    if (!(a < b)) continue;
                    const double nl = i + 1 - lo;
                    const double nr = n - nl;
                    const double right = sum - left;
                    const double score = left * left / nl + right * right / nr;
                    if (score > best_score) {
                        best_score = score;
                        best_f = static_cast<int>(f);
                        double thr = a + (b - a) / 2.0;
                        if (!(thr < b)) thr = a;
                        best_thr = thr;
                        best_nl = static_cast<std::uint32_t>(nl);
                    }
                }
            }
            // Require a real reduction, not rounding noise.
            if (best_f < 0 || !(best_score - base > 1e-12 * sse)) return id;

            const auto& chosen = sorted[best_f];
            for (std::uint32_t i = lo; i < hi; ++i) goes_left[chosen[i]] = i < lo + best_nl;
            for (auto& s : sorted) {
                std::uint32_t l = lo, r = 0;
                for (std::uint32_t i = lo; i < hi; ++i) {
                    if (goes_left[s[i]]) s[l++] = s[i];
                    else scratch[r++] = s[i];
                }
                std::copy(scratch.begin(), scratch.begin() + r, s.begin() + l);
            }
            nodes[id].feature = best_f;
            nodes[id].threshold = best_thr;
            const int left_id = build(lo, lo + best_nl, depth + 1);
            const int right_id = build(lo + best_nl, hi, depth + 1);
            nodes[id].left = left_id;
            nodes[id].right = right_id;
            return id;
        }
    };

    std::vector<Node> nodes_;
    std::size_t width_ = 0;
};

/// Bagged regression trees; every split considers all features. Tree t draws
/// its bootstrap sample from a stream derived from the run seed and t.
class RandomForestModel {
public:
    RandomForestModel() = default;
    explicit RandomForestModel(std::vector<DecisionTreeModel> trees) : trees_(std::move(trees)) {}

    [[nodiscard]] static RandomForestModel fit(const TrainingData& data, const RandomForestConfig& config,
                                               std::uint64_t seed) {
        if (config.n_trees < 1) throw ConfigError("random forest: n_trees must be >= 1");
        const DecisionTreeConfig tree_cfg{config.max_depth, config.min_samples_split};
        const auto order = detail::column_order(data);
        const std::size_t n = data.rows();
        std::vector<DecisionTreeModel> trees;
        trees.reserve(static_cast<std::size_t>(config.n_trees));
        std::vector<std::uint32_t> counts(n);
        for (int t = 0; t < config.n_trees; ++t) {
            if (config.bootstrap) {
                std::fill(counts.begin(), counts.end(), 0u);
                auto rng = make_rng(seed, static_cast<std::uint64_t>(t));
                std::uniform_int_distribution<std::size_t> pick(0, n - 1);
                for (std::size_t i = 0; i < n; ++i) ++counts[pick(rng)];
            } else {
                std::fill(counts.begin(), counts.end(), 1u);
            }
            trees.push_back(DecisionTreeModel::fit_weighted(data, tree_cfg, order, counts));
        }
        return RandomForestModel(std::move(trees));
    }

    [[nodiscard]] double predict(std::span<const double> x) const {
        double acc = 0.0;
        for (const auto& t : trees_) acc += t.predict(x);
        return acc / static_cast<double>(trees_.size());
    }

    [[nodiscard]] std::span<const DecisionTreeModel> trees() const noexcept { return trees_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept {
        std::size_t n = 0;
        for (const auto& t : trees_) n += t.parameter_count();
        return n;
    }

    friend bool operator==(const RandomForestModel&, const RandomForestModel&) = default;

private:
    std::vector<DecisionTreeModel> trees_;
};

}  // namespace citecast
