#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "citecast/data_model.hpp"
#include "citecast/error.hpp"
#include "citecast/fitted.hpp"

namespace citecast {

/// Raw-scale prediction of one quantity for the year after the history's
/// last record.
using ComponentPredictor = std::function<double(const JournalHistory&)>;

[[nodiscard]] inline ComponentPredictor component(FittedModel model) {
    return [m = std::move(model)](const JournalHistory& h) { return m.predict_next(h); };
}

enum class CiteScoreStrategyKind { Direct, SumWindow, PerYear };

[[nodiscard]] inline std::string_view strategy_name(CiteScoreStrategyKind k) {
    switch (k) {
        case CiteScoreStrategyKind::Direct: return "direct";
        case CiteScoreStrategyKind::SumWindow: return "sum_window";
        case CiteScoreStrategyKind::PerYear: return "per_year";
    }
    return "?";
}

[[nodiscard]] inline CiteScoreStrategyKind strategy_from_name(std::string_view name) {
    for (auto k : {CiteScoreStrategyKind::Direct, CiteScoreStrategyKind::SumWindow, CiteScoreStrategyKind::PerYear})
        if (strategy_name(k) == name) return k;
    throw ConfigError("unknown CiteScore strategy '" + std::string(name) + "'");
}

/// How next-year citations are predicted:
///   Direct     one model for the CiteScore itself;
///   SumWindow  one model for next-year citations to the 4-year window;
///   PerYear    four models, for citations to papers 0, 1, 2 and 3 years old.
/// `publications` predicts next-year output; empty means persistence.
class CiteScoreStrategy {
public:
    [[nodiscard]] static CiteScoreStrategy direct(ComponentPredictor model) {
        return {CiteScoreStrategyKind::Direct, {std::move(model)}};
    }
    [[nodiscard]] static CiteScoreStrategy sum_window(ComponentPredictor model) {
        return {CiteScoreStrategyKind::SumWindow, {std::move(model)}};
    }
    /// models[k] predicts citations to publications from k years before the target year.
    [[nodiscard]] static CiteScoreStrategy per_year(std::array<ComponentPredictor, 4> models) {
        return {CiteScoreStrategyKind::PerYear, {models.begin(), models.end()}};
    }

    CiteScoreStrategy& with_publications(ComponentPredictor p) {
        publications_ = std::move(p);
        return *this;
    }

    [[nodiscard]] CiteScoreStrategyKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::vector<ComponentPredictor>& components() const noexcept { return components_; }
    [[nodiscard]] const ComponentPredictor& publications() const noexcept { return publications_; }

private:
    CiteScoreStrategy(CiteScoreStrategyKind kind, std::vector<ComponentPredictor> components)
        : kind_(kind), components_(std::move(components)) {
        for (const auto& c : components_)
            if (!c) throw ConfigError("CiteScore strategy component is empty");
    }

    CiteScoreStrategyKind kind_;
    std::vector<ComponentPredictor> components_;
    ComponentPredictor publications_;
};

/// Next-year publications by persistence: the final year's count.
[[nodiscard]] inline Count predict_publications(const JournalHistory& h) { return h.back().publications; }

/// Already-observed part of next year's CiteScore numerator: citations in
/// years up to the final year to publications from the 3 years before the target.
[[nodiscard]] inline Count known_citescore_numerator(const JournalHistory& h) {
    const int x = h.last_year() + 1;
    return citescore_numerator(h, x, x - 1);
}

struct CiteScorePrediction {
    int target_year = 0;
    double citescore = 0.0;
    CiteScoreStrategyKind strategy = CiteScoreStrategyKind::SumWindow;
    /// Component outputs after clamping at zero (empty for Direct).
    std::vector<double> predicted_terms;
    double predicted_citations = 0.0;
    double known_numerator = 0.0;
    double publications = 0.0;
    double denominator = 0.0;
};

/// Completes the CiteScore for the year after the history's last record from
/// the known citation terms plus predicted next-year citations, over the
/// three known plus one predicted publication counts. Clamped at 0.
[[nodiscard]] inline CiteScorePrediction predict_citescore(const JournalHistory& h, const CiteScoreStrategy& strategy) {
    if (h.empty()) throw InsufficientHistoryError("cannot predict CiteScore for an empty history");
    const int x = h.last_year() + 1;
    CiteScorePrediction out;
    out.target_year = x;
    out.strategy = strategy.kind();

    if (strategy.kind() == CiteScoreStrategyKind::Direct) {
        out.citescore = std::max(0.0, strategy.components().front()(h));
        return out;
    }
    if (!h.has_years(x - kCiteScoreWindow + 1, x - 1))
        throw InsufficientHistoryError(h.journal_id() + ": CiteScore for " + std::to_string(x) + " needs years " +
                                       std::to_string(x - kCiteScoreWindow + 1) + "-" + std::to_string(x - 1));
    out.known_numerator = static_cast<double>(known_citescore_numerator(h));
    for (const auto& c : strategy.components()) {
        const double v = std::max(0.0, c(h));
        out.predicted_terms.push_back(v);
        out.predicted_citations += v;
    }
    out.publications = strategy.publications() ? std::max(0.0, strategy.publications()(h))
                                               : static_cast<double>(predict_publications(h));
    out.denominator = static_cast<double>(publication_window_sum(h, x - 1, kCiteScoreWindow - 1)) + out.publications;
    if (!(out.denominator > 0.0))
        throw UndefinedCiteScoreError(h.journal_id() + ": no publications in the CiteScore window for " +
                                      std::to_string(x));
    out.citescore = std::max(0.0, (out.known_numerator + out.predicted_citations) / out.denominator);
    return out;
}

}  // namespace citecast
