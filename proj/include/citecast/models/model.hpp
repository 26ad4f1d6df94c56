#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "citecast/models/common.hpp"
#include "citecast/models/knn.hpp"
#include "citecast/models/linear.hpp"
#include "citecast/models/network.hpp"
#include "citecast/models/tree.hpp"

namespace citecast {

/// Trained feed-forward network: architecture plus flat parameters.
struct MlpModel {
    MlpNet net;
    std::vector<double> params;
    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Trained RNN or LSTM.
struct RecurrentModel {
    RecurrentNet net;
    std::vector<double> params;
    friend bool operator==(const RecurrentModel&, const RecurrentModel&) = default;
};

/// A fitted model of any family, bound to the (window length, feature count)
/// layout it was trained on. Predictions are in the transformed target space.
class TrainedModel {
public:
    using State = std::variant<LinearModel, DecisionTreeModel, RandomForestModel, KnnModel, MlpModel, RecurrentModel>;

    TrainedModel() = default;
    TrainedModel(ModelConfig config, std::size_t window_len, std::size_t n_features, State state,
                 TrainingSummary summary = {})
        : config_(std::move(config)),
          window_len_(window_len),
          n_features_(n_features),
          state_(std::move(state)),
          summary_(summary) {}

    [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }
    [[nodiscard]] ModelFamily family() const noexcept { return family_of(config_); }
    [[nodiscard]] std::size_t window_len() const noexcept { return window_len_; }
    [[nodiscard]] std::size_t n_features() const noexcept { return n_features_; }
    [[nodiscard]] const State& state() const noexcept { return state_; }
    [[nodiscard]] const TrainingSummary& summary() const noexcept { return summary_; }

    [[nodiscard]] std::size_t parameter_count() const {
        return std::visit(
            [](const auto& m) -> std::size_t {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, MlpModel> || std::is_same_v<T, RecurrentModel>)
                    return m.params.size();
                else
                    return m.parameter_count();
            },
            state_);
    }

    /// Predictions for each row of a design matrix laid out like the training data.
    [[nodiscard]] VectorXd predict_matrix(const RowMatrix& x) const {
        if (static_cast<std::size_t>(x.cols()) != window_len_ * n_features_)
            throw ShapeError("model expects " + std::to_string(window_len_) + "x" + std::to_string(n_features_) +
                             " inputs, got width " + std::to_string(x.cols()));
        return std::visit(
            [&](const auto& m) -> VectorXd {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, MlpModel> || std::is_same_v<T, RecurrentModel>) {
                    if (x.rows() == 0) return VectorXd();
                    return m.net.forward(m.params, x);
                } else {
                    VectorXd out(x.rows());
                    for (Eigen::Index i = 0; i < x.rows(); ++i)
                        out(i) = m.predict(std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())));
                    return out;
                }
            },
            state_);
    }

    [[nodiscard]] double predict(const Sample& s) const {
        check_layout(s);
        RowMatrix x(1, static_cast<Eigen::Index>(s.inputs.size()));
        for (std::size_t j = 0; j < s.inputs.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = s.inputs[j];
        return predict_matrix(x)(0);
    }

    [[nodiscard]] std::vector<double> predict(std::span<const Sample> samples) const {
        RowMatrix x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(window_len_ * n_features_));
        for (std::size_t i = 0; i < samples.size(); ++i) {
            check_layout(samples[i]);
            for (std::size_t j = 0; j < samples[i].inputs.size(); ++j)
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = samples[i].inputs[j];
        }
        const VectorXd p = predict_matrix(x);
        return {p.data(), p.data() + p.size()};
    }

    friend bool operator==(const TrainedModel& a, const TrainedModel& b) {
        return a.config_ == b.config_ && a.window_len_ == b.window_len_ && a.n_features_ == b.n_features_ &&
               a.state_ == b.state_;
    }

private:
    void check_layout(const Sample& s) const {
        if (s.window_len() != window_len_ || s.n_features != n_features_ ||
            s.inputs.size() != window_len_ * n_features_)
            throw ShapeError("sample layout " + std::to_string(s.window_len()) + "x" + std::to_string(s.n_features) +
                             " does not match model layout " + std::to_string(window_len_) + "x" +
                             std::to_string(n_features_));
    }

    ModelConfig config_;
    std::size_t window_len_ = 0;
    std::size_t n_features_ = 0;
    State state_;
    TrainingSummary summary_;
};

/// Fits `config` on already-preprocessed training data.
[[nodiscard]] inline TrainedModel train_model(const ModelConfig& config, const TrainingData& data,
                                              const TrainOptions& opts) {
    if (data.rows() == 0) throw ConfigError("no training samples");
    TrainingSummary summary;
    TrainedModel::State state = std::visit(
        [&](const auto& c) -> TrainedModel::State {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, LinearRegressionConfig>) {
                return LinearModel::fit(data);
            } else if constexpr (std::is_same_v<C, DecisionTreeConfig>) {
                return DecisionTreeModel::fit(data, c);
            } else if constexpr (std::is_same_v<C, RandomForestConfig>) {
                return RandomForestModel::fit(data, c, opts.seed);
            } else if constexpr (std::is_same_v<C, KnnConfig>) {
                return KnnModel::fit(data, c);
            } else if constexpr (std::is_same_v<C, MlpConfig>) {
                MlpNet net(data.width(), c);
                auto params = train_network(net, data, opts, summary);
                return MlpModel{std::move(net), std::move(params)};
            } else {
                constexpr auto kind = std::is_same_v<C, RnnConfig> ? CellKind::Rnn : CellKind::Lstm;
                RecurrentNet net(kind, data.n_features, c.n_layers, c.layer_size);
                auto params = train_network(net, data, opts, summary);
                return RecurrentModel{std::move(net), std::move(params)};
            }
        },
        config);
    return {config, data.window_len, data.n_features, std::move(state), summary};
}

[[nodiscard]] inline TrainedModel train_model(const ModelConfig& config, std::span<const Sample> samples,
                                              const TrainOptions& opts) {
    return train_model(config, TrainingData::from_samples(samples), opts);
}

}  // namespace citecast
