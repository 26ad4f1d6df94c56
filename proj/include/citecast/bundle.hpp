#pragma once

#include <string>
#include <vector>

#include "citecast/citescore_predictor.hpp"
#include "citecast/fitted.hpp"
#include "citecast/hash.hpp"
#include "citecast/io.hpp"
#include "citecast/models/serialize.hpp"

namespace citecast {

// JSON forms of fitted preprocessors and models. A bundle file holds either a
// single fitted model (citations task) or a CiteScore strategy with its
// component models.

[[nodiscard]] inline json to_json(const ColumnTransform& t) {
    if (t.kind == ColumnTransform::Kind::MinMax) return {{"kind", "min_max"}, {"lo", t.lo}, {"hi", t.hi}};
    return {{"kind", "power"}, {"lambda", t.lambda}, {"mean", t.mean}, {"scale", t.scale}};
}

[[nodiscard]] inline ColumnTransform column_transform_from_json(const json& j) {
    ColumnTransform t;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "min_max") {
        t.kind = ColumnTransform::Kind::MinMax;
        t.lo = j.at("lo").get<double>();
        t.hi = j.at("hi").get<double>();
    } else if (kind == "power") {
        t.kind = ColumnTransform::Kind::Power;
        t.lambda = j.at("lambda").get<double>();
        t.mean = j.at("mean").get<double>();
        t.scale = j.at("scale").get<double>();
    } else {
        throw DataError("unknown column transform '" + kind + "'");
    }
    return t;
}

[[nodiscard]] inline json to_json(const Preprocessor& p) {
    json inputs = json::array(), transforms = json::array();
    for (auto f : p.inputs()) inputs.push_back(std::string(symbol(f)));
    for (const auto& t : p.input_transforms()) transforms.push_back(to_json(t));
    return {{"inputs", inputs},
            {"target", std::string(symbol(p.target()))},
            {"input_transforms", transforms},
            {"target_transform", to_json(p.target_transform())}};
}

[[nodiscard]] inline Preprocessor preprocessor_from_json(const json& j) {
    std::vector<FeatureId> inputs;
    for (const auto& s : j.at("inputs")) inputs.push_back(feature_from_symbol(s.get<std::string>()));
    std::vector<ColumnTransform> transforms;
    for (const auto& t : j.at("input_transforms")) transforms.push_back(column_transform_from_json(t));
    return {std::move(inputs), feature_from_symbol(j.at("target").get<std::string>()), std::move(transforms),
            column_transform_from_json(j.at("target_transform"))};
}

[[nodiscard]] inline json to_json(const FittedModel& f) {
    json pre = to_json(f.preprocessor);
    const std::string pre_hash = sha256_hex(pre.dump());
    return {{"features", f.features.name},
            {"window_len", f.window_len},
            {"preprocessor", std::move(pre)},
            {"preprocessor_sha256", pre_hash},
            {"model", to_json(f.model)}};
}

[[nodiscard]] inline FittedModel fitted_model_from_json(const json& j) {
    try {
        FittedModel f;
        f.features = feature_config(j.at("features").get<std::string>());
        f.window_len = j.at("window_len").get<int>();
        if (j.contains("preprocessor_sha256") &&
            j.at("preprocessor_sha256").get<std::string>() != sha256_hex(j.at("preprocessor").dump()))
            throw DataError("bundle preprocessor does not match its recorded hash");
        f.preprocessor = preprocessor_from_json(j.at("preprocessor"));
        f.model = trained_model_from_json(j.at("model"));
        if (f.model.window_len() != static_cast<std::size_t>(f.window_len) ||
            f.model.n_features() != f.features.inputs.size() || f.preprocessor.inputs().size() != f.features.inputs.size())
            throw DataError("bundle layout does not match its feature configuration");
        return f;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model bundle: ") + e.what());
    }
}

/// A deployable predictor: one model for citations, or a CiteScore strategy.
struct PredictorBundle {
    std::string task;  // "citations" or "citescore"
    std::string label;
    CiteScoreStrategyKind strategy = CiteScoreStrategyKind::SumWindow;
    std::vector<FittedModel> components;

    [[nodiscard]] CiteScoreStrategy citescore_strategy() const {
        std::vector<ComponentPredictor> c;
        for (const auto& m : components) c.push_back(component(m));
        switch (strategy) {
            case CiteScoreStrategyKind::Direct: return CiteScoreStrategy::direct(c.at(0));
            case CiteScoreStrategyKind::SumWindow: return CiteScoreStrategy::sum_window(c.at(0));
            case CiteScoreStrategyKind::PerYear:
                if (c.size() != 4) throw DataError("per-year strategy needs four component models");
                return CiteScoreStrategy::per_year({c[0], c[1], c[2], c[3]});
        }
        throw DataError("bad strategy");
    }
};

[[nodiscard]] inline json to_json(const PredictorBundle& b) {
    json comps = json::array();
    for (const auto& c : b.components) comps.push_back(to_json(c));
    json j{{"format_version", kModelFormatVersion}, {"task", b.task}, {"label", b.label}, {"components", comps}};
    if (b.task == "citescore") j["strategy"] = std::string(strategy_name(b.strategy));
    return j;
}

[[nodiscard]] inline PredictorBundle predictor_bundle_from_json(const json& j) {
    try {
        PredictorBundle b;
        if (j.at("format_version").get<int>() != kModelFormatVersion) throw DataError("unsupported bundle version");
        b.task = j.at("task").get<std::string>();
        b.label = j.value("label", std::string());
        if (b.task != "citations" && b.task != "citescore") throw DataError("unknown bundle task '" + b.task + "'");
        if (b.task == "citescore") b.strategy = strategy_from_name(j.at("strategy").get<std::string>());
        for (const auto& c : j.at("components")) b.components.push_back(fitted_model_from_json(c));
        if (b.components.empty()) throw DataError("bundle has no models");
        return b;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed predictor bundle: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("malformed predictor bundle: ") + e.what());
    }
}

}  // namespace citecast
