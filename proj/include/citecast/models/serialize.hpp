#pragma once

#include <string>
#include <vector>

#include "citecast/io.hpp"
#include "citecast/models/model.hpp"

namespace citecast {

inline constexpr int kModelFormatVersion = 1;

// ---------------------------------------------------------------------------
// ModelConfig

[[nodiscard]] inline json model_config_to_json(const ModelConfig& config) {
    json j;
    j["family"] = std::string(family_name(family_of(config)));
    std::visit(
        [&](const auto& c) {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, DecisionTreeConfig>) {
                j["max_depth"] = c.max_depth;
                j["min_samples_split"] = c.min_samples_split;
            } else if constexpr (std::is_same_v<C, RandomForestConfig>) {
                j["max_depth"] = c.max_depth;
                j["min_samples_split"] = c.min_samples_split;
                j["n_trees"] = c.n_trees;
                j["bootstrap"] = c.bootstrap;
            } else if constexpr (std::is_same_v<C, KnnConfig>) {
                j["k"] = c.k;
            } else if constexpr (!std::is_same_v<C, LinearRegressionConfig>) {
                j["n_layers"] = c.n_layers;
                j["layer_size"] = c.layer_size;
            }
        },
        config);
    return j;
}

/// Missing hyperparameters keep the family defaults.
[[nodiscard]] inline ModelConfig model_config_from_json(const json& j) {
    if (!j.is_object() || !j.contains("family")) throw ConfigError("model config needs a 'family'");
    const auto family = family_from_name(j.at("family").get<std::string>());
    try {
        switch (family) {
            case ModelFamily::LinearRegression: return LinearRegressionConfig{};
            case ModelFamily::DecisionTree: {
                DecisionTreeConfig c;
                c.max_depth = j.value("max_depth", c.max_depth);
                c.min_samples_split = j.value("min_samples_split", c.min_samples_split);
                return c;
            }
            case ModelFamily::RandomForest: {
                RandomForestConfig c;
                c.max_depth = j.value("max_depth", c.max_depth);
                c.min_samples_split = j.value("min_samples_split", c.min_samples_split);
                c.n_trees = j.value("n_trees", c.n_trees);
                c.bootstrap = j.value("bootstrap", c.bootstrap);
                return c;
            }
            case ModelFamily::Knn: {
                KnnConfig c;
                c.k = j.value("k", c.k);
                return c;
            }
            case ModelFamily::Mlp: {
                MlpConfig c;
                c.n_layers = j.value("n_layers", c.n_layers);
                c.layer_size = j.value("layer_size", c.layer_size);
                return c;
            }
            case ModelFamily::Rnn: {
                RnnConfig c;
                c.n_layers = j.value("n_layers", c.n_layers);
                c.layer_size = j.value("layer_size", c.layer_size);
                return c;
            }
            case ModelFamily::Lstm: {
                LstmConfig c;
                c.n_layers = j.value("n_layers", c.n_layers);
                c.layer_size = j.value("layer_size", c.layer_size);
                return c;
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad model config: ") + e.what());
    }
    throw ConfigError("unreachable model family");
}

// ---------------------------------------------------------------------------
// TrainedModel

namespace detail {

inline json tree_to_json(const DecisionTreeModel& t) {
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         value = json::array(), n = json::array(), impurity = json::array();
    for (const auto& node : t.nodes()) {
        feature.push_back(node.feature);
        threshold.push_back(node.threshold);
        left.push_back(node.left);
        right.push_back(node.right);
        value.push_back(node.value);
        n.push_back(node.n_samples);
        impurity.push_back(node.impurity);
    }
    return {{"width", t.width()}, {"feature", feature}, {"threshold", threshold}, {"left", left},   {"right", right},
            {"value", value},     {"n_samples", n},     {"impurity", impurity}};
}

inline DecisionTreeModel tree_from_json(const json& j) {
    const auto feature = j.at("feature").get<std::vector<int>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<int>>();
    const auto right = j.at("right").get<std::vector<int>>();
    const auto value = j.at("value").get<std::vector<double>>();
    const auto n = j.at("n_samples").get<std::vector<int>>();
    const auto impurity = j.at("impurity").get<std::vector<double>>();
    const std::size_t count = feature.size();
    if (count == 0 || threshold.size() != count || left.size() != count || right.size() != count ||
        value.size() != count || n.size() != count || impurity.size() != count)
        throw DataError("tree arrays have inconsistent lengths");
    std::vector<DecisionTreeModel::Node> nodes(count);
    const auto width = j.at("width").get<std::size_t>();
    for (std::size_t i = 0; i < count; ++i) {
        nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i], n[i], impurity[i]};
        if (feature[i] >= 0) {
            const auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(count); };
            if (static_cast<std::size_t>(feature[i]) >= width || !in_range(left[i]) || !in_range(right[i]))
                throw DataError("tree node " + std::to_string(i) + " is malformed");
        }
    }
    return {std::move(nodes), width};
}

inline json matrix_to_json(const RowMatrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

inline RowMatrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size())
        throw DataError("matrix payload size mismatch");
    RowMatrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

}  // namespace detail

[[nodiscard]] inline json to_json(const TrainedModel& model) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["config"] = model_config_to_json(model.config());
    j["window_len"] = model.window_len();
    j["n_features"] = model.n_features();
    const auto& s = model.summary();
    j["training"] = {{"epochs_run", s.epochs_run}, {"epochs_used", s.epochs_used}};
    json state;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                state["coefficients"] = std::vector<double>(m.coefficients().begin(), m.coefficients().end());
                state["intercept"] = m.intercept();
            } else if constexpr (std::is_same_v<T, DecisionTreeModel>) {
                state["tree"] = detail::tree_to_json(m);
            } else if constexpr (std::is_same_v<T, RandomForestModel>) {
                json trees = json::array();
                for (const auto& t : m.trees()) trees.push_back(detail::tree_to_json(t));
                state["trees"] = std::move(trees);
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                state["points"] = detail::matrix_to_json(m.points());
                state["targets"] = std::vector<double>(m.targets().data(), m.targets().data() + m.targets().size());
            } else {
                state["params"] = m.params;
            }
        },
        model.state());
    j["state"] = std::move(state);
    return j;
}

[[nodiscard]] inline TrainedModel trained_model_from_json(const json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw DataError("unsupported model format version " + std::to_string(version));
        const ModelConfig config = model_config_from_json(j.at("config"));
        const auto window_len = j.at("window_len").get<std::size_t>();
        const auto n_features = j.at("n_features").get<std::size_t>();
        const std::size_t width = window_len * n_features;
        TrainingSummary summary;
        if (j.contains("training")) {
            summary.epochs_run = j["training"].value("epochs_run", 0);
            summary.epochs_used = j["training"].value("epochs_used", 0);
        }
        const json& st = j.at("state");
        auto check_params = [](std::size_t got, std::size_t want) {
            if (got != want)
                throw DataError("network expects " + std::to_string(want) + " parameters, file has " +
                                std::to_string(got));
        };
        TrainedModel::State state = std::visit(
            [&](const auto& c) -> TrainedModel::State {
                using C = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<C, LinearRegressionConfig>) {
                    auto coef = st.at("coefficients").get<std::vector<double>>();
                    if (coef.size() != width) throw DataError("linear model width mismatch");
                    return LinearModel(std::move(coef), st.at("intercept").get<double>());
                } else if constexpr (std::is_same_v<C, DecisionTreeConfig>) {
                    return detail::tree_from_json(st.at("tree"));
                } else if constexpr (std::is_same_v<C, RandomForestConfig>) {
                    std::vector<DecisionTreeModel> trees;
                    for (const auto& t : st.at("trees")) trees.push_back(detail::tree_from_json(t));
                    if (trees.empty()) throw DataError("forest has no trees");
                    return RandomForestModel(std::move(trees));
                } else if constexpr (std::is_same_v<C, KnnConfig>) {
                    RowMatrix pts = detail::matrix_from_json(st.at("points"));
                    auto y = st.at("targets").get<std::vector<double>>();
                    if (static_cast<std::size_t>(pts.cols()) != width || static_cast<std::size_t>(pts.rows()) != y.size() ||
                        y.empty())
                        throw DataError("knn payload shape mismatch");
                    return KnnModel(c.k, std::move(pts), Eigen::Map<VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
                } else if constexpr (std::is_same_v<C, MlpConfig>) {
                    MlpNet net(width, c);
                    auto params = st.at("params").get<std::vector<double>>();
                    check_params(params.size(), net.parameter_count());
                    return MlpModel{std::move(net), std::move(params)};
                } else {
                    constexpr auto kind = std::is_same_v<C, RnnConfig> ? CellKind::Rnn : CellKind::Lstm;
                    RecurrentNet net(kind, n_features, c.n_layers, c.layer_size);
                    auto params = st.at("params").get<std::vector<double>>();
                    check_params(params.size(), net.parameter_count());
                    return RecurrentModel{std::move(net), std::move(params)};
                }
            },
            config);
        return {config, window_len, n_features, std::move(state), summary};
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace citecast
