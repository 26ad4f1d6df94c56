#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "citecast/error.hpp"

namespace citecast {

// Hyperparameters of the seven model families. Run seeds are carried by
// TrainOptions so that one grid configuration can be trained under many seeds.

struct LinearRegressionConfig {
    friend bool operator==(const LinearRegressionConfig&, const LinearRegressionConfig&) = default;
};

struct DecisionTreeConfig {
    int max_depth = 9;
    int min_samples_split = 2;
    friend bool operator==(const DecisionTreeConfig&, const DecisionTreeConfig&) = default;
};

struct RandomForestConfig {
    int max_depth = 15;
    int min_samples_split = 2;
    int n_trees = 100;
    bool bootstrap = true;
    friend bool operator==(const RandomForestConfig&, const RandomForestConfig&) = default;
};

struct KnnConfig {
    int k = 20;
    friend bool operator==(const KnnConfig&, const KnnConfig&) = default;
};

/// Fully connected ReLU network.
struct MlpConfig {
    int n_layers = 1;
    int layer_size = 100;
    friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

/// Stacked tanh recurrent layers, linear head on the final hidden state.
struct RnnConfig {
    int n_layers = 1;
    int layer_size = 25;
    friend bool operator==(const RnnConfig&, const RnnConfig&) = default;
};

/// Stacked LSTM layers, linear head on the final hidden state.
struct LstmConfig {
    int n_layers = 1;
    int layer_size = 25;
    friend bool operator==(const LstmConfig&, const LstmConfig&) = default;
};

using ModelConfig = std::variant<LinearRegressionConfig, DecisionTreeConfig, RandomForestConfig, KnnConfig, MlpConfig,
                                 RnnConfig, LstmConfig>;

enum class ModelFamily { LinearRegression, DecisionTree, RandomForest, Knn, Mlp, Rnn, Lstm };

inline constexpr ModelFamily kAllFamilies[] = {ModelFamily::LinearRegression, ModelFamily::DecisionTree,
                                               ModelFamily::RandomForest,     ModelFamily::Knn,
                                               ModelFamily::Mlp,              ModelFamily::Rnn,
                                               ModelFamily::Lstm};

[[nodiscard]] inline ModelFamily family_of(const ModelConfig& c) { return static_cast<ModelFamily>(c.index()); }

[[nodiscard]] inline std::string_view family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::LinearRegression: return "linear_regression";
        case ModelFamily::DecisionTree: return "decision_tree";
        case ModelFamily::RandomForest: return "random_forest";
        case ModelFamily::Knn: return "knn";
        case ModelFamily::Mlp: return "mlp";
        case ModelFamily::Rnn: return "rnn";
        case ModelFamily::Lstm: return "lstm";
    }
    return "?";
}

[[nodiscard]] inline ModelFamily family_from_name(std::string_view name) {
    for (auto f : kAllFamilies)
        if (family_name(f) == name) return f;
    throw ConfigError("unknown model family '" + std::string(name) + "'");
}

[[nodiscard]] inline bool is_iterative(ModelFamily f) {
    return f == ModelFamily::Mlp || f == ModelFamily::Rnn || f == ModelFamily::Lstm;
}

[[nodiscard]] inline bool is_sequence_model(ModelFamily f) { return f == ModelFamily::Rnn || f == ModelFamily::Lstm; }

/// Stable human-readable label, e.g. "lstm[layers=1,size=25]".
[[nodiscard]] inline std::string describe(const ModelConfig& config) {
    struct Visitor {
        std::string operator()(const LinearRegressionConfig&) const { return "linear_regression"; }
        std::string operator()(const DecisionTreeConfig& c) const {
            return "decision_tree[depth=" + std::to_string(c.max_depth) +
                   ",min_split=" + std::to_string(c.min_samples_split) + "]";
        }
        std::string operator()(const RandomForestConfig& c) const {
            return "random_forest[depth=" + std::to_string(c.max_depth) + ",min_split=" +
                   std::to_string(c.min_samples_split) + ",trees=" + std::to_string(c.n_trees) +
                   (c.bootstrap ? "" : ",no_bootstrap") + "]";
        }
        std::string operator()(const KnnConfig& c) const { return "knn[k=" + std::to_string(c.k) + "]"; }
        std::string operator()(const MlpConfig& c) const {
            return "mlp[layers=" + std::to_string(c.n_layers) + ",size=" + std::to_string(c.layer_size) + "]";
        }
        std::string operator()(const RnnConfig& c) const {
            return "rnn[layers=" + std::to_string(c.n_layers) + ",size=" + std::to_string(c.layer_size) + "]";
        }
        std::string operator()(const LstmConfig& c) const {
            return "lstm[layers=" + std::to_string(c.n_layers) + ",size=" + std::to_string(c.layer_size) + "]";
        }
    };
    return std::visit(Visitor{}, config);
}

// ---------------------------------------------------------------------------
// Hyperparameter grids

inline constexpr int kTreeDepths[] = {3, 6, 9, 12, 15};
inline constexpr int kTreeMinSplits[] = {2, 5, 10};
inline constexpr int kForestSizes[] = {20, 50, 100};
inline constexpr int kKnnKs[] = {10, 20, 50, 100};
inline constexpr int kMlpLayers[] = {1, 2, 4};
inline constexpr int kMlpSizes[] = {50, 100, 200};
inline constexpr int kRecurrentLayers[] = {1, 2};
inline constexpr int kRecurrentSizes[] = {25, 50, 100};

/// Every hyperparameter setting searched for one family.
[[nodiscard]] inline std::vector<ModelConfig> model_grid(ModelFamily family) {
    std::vector<ModelConfig> out;
    switch (family) {
        case ModelFamily::LinearRegression: out.emplace_back(LinearRegressionConfig{}); break;
        case ModelFamily::DecisionTree:
            for (int d : kTreeDepths)
                for (int m : kTreeMinSplits) out.emplace_back(DecisionTreeConfig{d, m});
            break;
        case ModelFamily::RandomForest:
            for (int d : kTreeDepths)
                for (int m : kTreeMinSplits)
                    for (int t : kForestSizes) out.emplace_back(RandomForestConfig{d, m, t, true});
            break;
        case ModelFamily::Knn:
            for (int k : kKnnKs) out.emplace_back(KnnConfig{k});
            break;
        case ModelFamily::Mlp:
            for (int l : kMlpLayers)
                for (int s : kMlpSizes) out.emplace_back(MlpConfig{l, s});
            break;
        case ModelFamily::Rnn:
            for (int l : kRecurrentLayers)
                for (int s : kRecurrentSizes) out.emplace_back(RnnConfig{l, s});
            break;
        case ModelFamily::Lstm:
            for (int l : kRecurrentLayers)
                for (int s : kRecurrentSizes) out.emplace_back(LstmConfig{l, s});
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training options

struct AdamHyper {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

enum class StoppingMode { ValidationPatience, FixedEpochs };

struct TrainOptions {
    AdamHyper adam;
    int batch_size = 200;
    /// Upper bound on epochs in patience mode; nullopt trains until patience triggers.
    std::optional<int> max_epochs = 2000;
    StoppingMode stopping = StoppingMode::ValidationPatience;
    int patience = 10;
    /// Minimum decrease of the validation loss that counts as an improvement.
    double min_delta = 1e-4;
    int fixed_epochs = 0;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;

    /// Selection-mode defaults: MLP uses patience 10 with tolerance 1e-4; RNN
    /// and LSTM use patience 15 with any improvement counted.
    [[nodiscard]] static TrainOptions selection(ModelFamily family, std::uint64_t seed = 0) {
        TrainOptions o;
        o.seed = seed;
        if (is_sequence_model(family)) {
            o.patience = 15;
            o.min_delta = 0.0;
        }
        return o;
    }

    [[nodiscard]] static TrainOptions fixed(int epochs, std::uint64_t seed = 0) {
        TrainOptions o;
        o.stopping = StoppingMode::FixedEpochs;
        o.fixed_epochs = epochs;
        o.seed = seed;
        return o;
    }
};

}  // namespace citecast
