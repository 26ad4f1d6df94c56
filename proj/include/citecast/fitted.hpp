#pragma once

#include <span>
#include <string>
#include <vector>

#include "citecast/features.hpp"
#include "citecast/models/model.hpp"
#include "citecast/preprocess.hpp"

namespace citecast {

/// A feature configuration, window length, fitted preprocessor and trained
/// model: everything needed to map a raw sample to a raw-scale prediction.
struct FittedModel {
    FeatureConfig features;
    int window_len = 0;
    Preprocessor preprocessor;
    TrainedModel model;

    /// Raw-scale prediction for a raw (untransformed) sample.
    [[nodiscard]] double predict(const Sample& raw) const {
        return preprocessor.invert_target(model.predict(preprocessor.apply(raw)));
    }

    [[nodiscard]] std::vector<double> predict(std::span<const Sample> raw) const {
        const auto transformed = preprocessor.apply(raw);
        auto out = model.predict(std::span<const Sample>(transformed));
        for (double& v : out) v = preprocessor.invert_target(v);
        return out;
    }

    /// Raw-scale prediction for the year after the journal's last record.
    [[nodiscard]] double predict_next(const JournalHistory& h) const {
        auto input = prediction_input(h, features, window_len);
        if (!input)
            throw InsufficientHistoryError(h.journal_id() + ": history cannot fill a " + std::to_string(window_len) +
                                           "-year '" + features.name + "' window");
        return predict(*input);
    }
};

/// Fits the preprocessor on `raw_train` and trains `model_config` on the
/// transformed samples.
[[nodiscard]] inline FittedModel fit_model(std::span<const Sample> raw_train, const FeatureConfig& features,
                                           int window_len, const ModelConfig& model_config, const TrainOptions& opts) {
    if (raw_train.empty()) throw ConfigError("no training samples for " + features.name);
    FittedModel f;
    f.features = features;
    f.window_len = window_len;
    f.preprocessor = fit_preprocessor(raw_train, features);
    const auto transformed = f.preprocessor.apply(raw_train);
    f.model = train_model(model_config, std::span<const Sample>(transformed), opts);
    return f;
}

}  // namespace citecast
