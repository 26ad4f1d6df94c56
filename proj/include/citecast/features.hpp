#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citecast/data_model.hpp"
#include "citecast/error.hpp"
#include "citecast/random.hpp"

namespace citecast {

/// Every input and output quantity of the feature selection matrix, in matrix row order.
/// `x` is the year a feature vector describes; `y` is the year being predicted.
enum class FeatureId {
    // inputs
    Year,              // x (provided as the prediction year)
    PctNotCited,       // nc_x
    Citations,         // c_x
    Publications,      // p_x
    Snip,              // SNIP_x
    Sjr,               // SJR_x
    CitesCur,          // c_{x,x}
    CitesCurLag1,      // c_{x,x-1}
    CitesCurLag2,      // c_{x,x-2}
    CitesCurLag3,      // c_{x,x-3}
    CitesPrevLag1,     // c_{x-1,x-1}
    CitesPrevLag2,     // c_{x-1,x-2}
    CitesPrev2Lag2,    // c_{x-2,x-2}
    CitesWindow4,      // c_{x,w4}
    CitesWindow3,      // c_{x,w3}
    CitesPrevWindow2,  // c_{x-1,w2}
    PubsLag1,          // p_{x-1}
    PubsLag2,          // p_{x-2}
    PubsLag3,          // p_{x-3}
    PubsWindow3,       // p_{x,w3}
    PubsWindow4,       // p_{x,w4}
    // targets
    TargetCitations,   // c_y
    TargetWindow4,     // c_{y,w4}
    TargetCur,         // c_{y,y}
    TargetLag1,        // c_{y,y-1}
    TargetLag2,        // c_{y,y-2}
    TargetLag3,        // c_{y,y-3}
    // outside the matrix: the next-year CiteScore itself, used by the direct strategy
    TargetCiteScore,   // cs_y
};

inline constexpr std::size_t kFeatureCount = static_cast<std::size_t>(FeatureId::TargetCiteScore) + 1;
inline constexpr std::size_t kMatrixInputRows = 21;
inline constexpr std::size_t kMatrixTargetRows = 6;

struct FeatureInfo {
    FeatureId id;
    std::string_view symbol;
    /// How many years before the anchor year must also be present in the history.
    int lookback;
    bool is_target;
};

inline constexpr std::array<FeatureInfo, kFeatureCount> kFeatureInfo{{
    {FeatureId::Year, "x", 0, false},
    {FeatureId::PctNotCited, "nc_x", 0, false},
    {FeatureId::Citations, "c_x", 0, false},
    {FeatureId::Publications, "p_x", 0, false},
    {FeatureId::Snip, "SNIP_x", 0, false},
    {FeatureId::Sjr, "SJR_x", 0, false},
    {FeatureId::CitesCur, "c_{x,x}", 0, false},
    {FeatureId::CitesCurLag1, "c_{x,x-1}", 1, false},
    {FeatureId::CitesCurLag2, "c_{x,x-2}", 2, false},
    {FeatureId::CitesCurLag3, "c_{x,x-3}", 3, false},
    {FeatureId::CitesPrevLag1, "c_{x-1,x-1}", 1, false},
    {FeatureId::CitesPrevLag2, "c_{x-1,x-2}", 2, false},
    {FeatureId::CitesPrev2Lag2, "c_{x-2,x-2}", 2, false},
    {FeatureId::CitesWindow4, "c_{x,w4}", 3, false},
    {FeatureId::CitesWindow3, "c_{x,w3}", 2, false},
    {FeatureId::CitesPrevWindow2, "c_{x-1,w2}", 2, false},
    {FeatureId::PubsLag1, "p_{x-1}", 1, false},
    {FeatureId::PubsLag2, "p_{x-2}", 2, false},
    {FeatureId::PubsLag3, "p_{x-3}", 3, false},
    {FeatureId::PubsWindow3, "p_{x,w3}", 2, false},
    {FeatureId::PubsWindow4, "p_{x,w4}", 3, false},
    {FeatureId::TargetCitations, "c_y", 0, true},
    {FeatureId::TargetWindow4, "c_{y,w4}", 3, true},
    {FeatureId::TargetCur, "c_{y,y}", 0, true},
    {FeatureId::TargetLag1, "c_{y,y-1}", 1, true},
    {FeatureId::TargetLag2, "c_{y,y-2}", 2, true},
    {FeatureId::TargetLag3, "c_{y,y-3}", 3, true},
    {FeatureId::TargetCiteScore, "cs_y", 3, true},
}};

[[nodiscard]] constexpr const FeatureInfo& info(FeatureId id) { return kFeatureInfo[static_cast<std::size_t>(id)]; }
[[nodiscard]] constexpr std::string_view symbol(FeatureId id) { return info(id).symbol; }

[[nodiscard]] inline FeatureId feature_from_symbol(std::string_view s) {
    for (const auto& f : kFeatureInfo)
        if (f.symbol == s) return f.id;
    throw ConfigError("unknown feature symbol '" + std::string(s) + "'");
}

/// True for features scaled to [0,1]; every other feature is power-transformed.
[[nodiscard]] constexpr bool uses_min_max(FeatureId id) {
    return id == FeatureId::Year || id == FeatureId::PctNotCited;
}

/// The quantity a target describes, re-expressed at an earlier year. Baselines
/// extrapolate this series (e.g. c_x for target c_y).
[[nodiscard]] constexpr FeatureId series_feature(FeatureId target) {
    switch (target) {
        case FeatureId::TargetCitations: return FeatureId::Citations;
        case FeatureId::TargetWindow4: return FeatureId::CitesWindow4;
        case FeatureId::TargetCur: return FeatureId::CitesCur;
        case FeatureId::TargetLag1: return FeatureId::CitesCurLag1;
        case FeatureId::TargetLag2: return FeatureId::CitesCurLag2;
        case FeatureId::TargetLag3: return FeatureId::CitesCurLag3;
        default: return target;
    }
}

/// Value of `id` for a journal. Inputs are read at `anchor_year`; targets at
/// `anchor_year` as the predicted year. The Year feature is the prediction year.
/// Returns nullopt when the value cannot be computed (missing year or metric).
[[nodiscard]] inline std::optional<double> feature_value(const JournalHistory& h, FeatureId id, int anchor_year,
                                                         int prediction_year) {
    const int x = anchor_year;
    if (!h.has_years(x - info(id).lookback, x)) return std::nullopt;
    const auto& rec = h.at(x);
    auto d = [](Count c) { return std::optional<double>(static_cast<double>(c)); };
    switch (id) {
        case FeatureId::Year: return static_cast<double>(prediction_year);
        case FeatureId::PctNotCited: return rec.pct_not_cited;
        case FeatureId::Citations:
        case FeatureId::TargetCitations: return d(rec.total_citations());
        case FeatureId::Publications: return d(rec.publications);
        case FeatureId::Snip: return rec.snip;
        case FeatureId::Sjr: return rec.sjr;
        case FeatureId::CitesCur:
        case FeatureId::TargetCur: return d(rec.citations_to(x));
        case FeatureId::CitesCurLag1:
        case FeatureId::TargetLag1: return d(rec.citations_to(x - 1));
        case FeatureId::CitesCurLag2:
        case FeatureId::TargetLag2: return d(rec.citations_to(x - 2));
        case FeatureId::CitesCurLag3:
        case FeatureId::TargetLag3: return d(rec.citations_to(x - 3));
        case FeatureId::CitesPrevLag1: return d(h.at(x - 1).citations_to(x - 1));
        case FeatureId::CitesPrevLag2: return d(h.at(x - 1).citations_to(x - 2));
        case FeatureId::CitesPrev2Lag2: return d(h.at(x - 2).citations_to(x - 2));
        case FeatureId::CitesWindow4:
        case FeatureId::TargetWindow4: return d(citation_window_sum(h, x, 4));
        case FeatureId::CitesWindow3: return d(citation_window_sum(h, x, 3));
        case FeatureId::CitesPrevWindow2: return d(citation_window_sum(h, x - 1, 2));
        case FeatureId::PubsLag1: return d(h.at(x - 1).publications);
        case FeatureId::PubsLag2: return d(h.at(x - 2).publications);
        case FeatureId::PubsLag3: return d(h.at(x - 3).publications);
        case FeatureId::PubsWindow3: return d(publication_window_sum(h, x, 3));
        case FeatureId::PubsWindow4: return d(publication_window_sum(h, x, 4));
        case FeatureId::TargetCiteScore: {
            Count denom = 0;
            for (int i = x - 3; i <= x; ++i) denom += h.at(i).publications;
            if (denom <= 0) return std::nullopt;
            return compute_citescore(h, x);
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Feature configurations

/// A named input selection plus one prediction target.
struct FeatureConfig {
    std::string name;
    std::vector<FeatureId> inputs;  // matrix row order
    FeatureId target = FeatureId::TargetCitations;

    /// Largest lookback over the inputs: extra years needed before a window.
    [[nodiscard]] int input_lookback() const {
        int lb = 0;
        for (auto f : inputs) lb = std::max(lb, info(f).lookback);
        return lb;
    }

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

namespace detail {

inline constexpr std::array<std::string_view, 11> kMatrixColumns{
    "Citations Basic",        "Citations Full",       "CiteScore Sum Basic",   "CiteScore Sum Detailed",
    "CiteScore Sum Full",     "CiteScore Year 4",     "CiteScore Year 3",      "CiteScore Year 2 Basic",
    "CiteScore Year 2 Full",  "CiteScore Year 1 Basic", "CiteScore Year 1 Full",
};

// One string per matrix row, one character per column ('X' = selected).
inline constexpr std::array<std::string_view, kMatrixInputRows + kMatrixTargetRows> kMatrixMarks{
    "XXXXXXXXXXX",  // x
    "XXXXXXXXXXX",  // nc_x
    "XX.........",  // c_x
    "XX.XXXX....",  // p_x
    ".XXXXXXXXXX",  // SNIP_x
    ".XXXXXXXXXX",  // SJR_x
    "....XXX....",  // c_{x,x}
    "....X.XXX..",  // c_{x,x-1}
    "....X..XXXX",  // c_{x,x-2}
    ".........XX",  // c_{x,x-3}
    "....X...X..",  // c_{x-1,x-1}
    "....X.....X",  // c_{x-1,x-2}
    "...XX.....X",  // c_{x-2,x-2}
    "..XXX......",  // c_{x,w4}
    "..XX.......",  // c_{x,w3}
    "...X.......",  // c_{x-1,w2}
    "...XX.XXX..",  // p_{x-1}
    "...XX..XXXX",  // p_{x-2}
    ".........XX",  // p_{x-3}
    "..X........",  // p_{x,w3}
    "..XXX......",  // p_{x,w4}
    "XX.........",  // c_y
    "..XXX......",  // c_{y,w4}
    ".....X.....",  // c_{y,y}
    "......X....",  // c_{y,y-1}
    ".......XX..",  // c_{y,y-2}
    ".........XX",  // c_{y,y-3}
};

inline std::vector<FeatureConfig> build_matrix_configs() {
    std::vector<FeatureConfig> out;
    for (std::size_t col = 0; col < kMatrixColumns.size(); ++col) {
        FeatureConfig cfg;
        cfg.name = std::string(kMatrixColumns[col]);
        for (std::size_t row = 0; row < kMatrixMarks.size(); ++row) {
            if (kMatrixMarks[row][col] != 'X') continue;
            const auto id = static_cast<FeatureId>(row);
            if (row < kMatrixInputRows)
                cfg.inputs.push_back(id);
            else
                cfg.target = id;
        }
        out.push_back(std::move(cfg));
    }
    return out;
}

}  // namespace detail

/// The eleven columns of the feature selection matrix, in column order.
[[nodiscard]] inline const std::vector<FeatureConfig>& matrix_feature_configs() {
    static const std::vector<FeatureConfig> configs = detail::build_matrix_configs();
    return configs;
}

/// Direct next-year CiteScore regression; a comparison arm outside the matrix.
/// Uses the "CiteScore Sum Full" inputs.
[[nodiscard]] inline const FeatureConfig& citescore_direct_config() {
    static const FeatureConfig cfg{"CiteScore Direct", matrix_feature_configs()[4].inputs, FeatureId::TargetCiteScore};
    return cfg;
}

[[nodiscard]] inline const FeatureConfig& feature_config(std::string_view name) {
    for (const auto& c : matrix_feature_configs())
        if (c.name == name) return c;
    if (name == citescore_direct_config().name) return citescore_direct_config();
    throw ConfigError("unknown feature configuration '" + std::string(name) + "'");
}

/// Feature configurations searched for the next-year citations task.
[[nodiscard]] inline std::vector<FeatureConfig> citations_task_configs() {
    const auto& all = matrix_feature_configs();
    return {all.begin(), all.begin() + 2};
}

/// Feature configurations searched for the CiteScore task.
[[nodiscard]] inline std::vector<FeatureConfig> citescore_task_configs() {
    const auto& all = matrix_feature_configs();
    return {all.begin() + 2, all.end()};
}

inline constexpr std::array<int, 6> kWindowLengths{3, 4, 5, 6, 8, 10};

// ---------------------------------------------------------------------------
// Samples

inline constexpr int kBaselineLookback = 5;

/// One sliding-window training example: `window_len` chronological feature
/// vectors and the next year's target.
struct Sample {
    std::string journal_id;
    std::vector<int> window_years;
    std::size_t n_features = 0;
    std::vector<double> inputs;  // row-major, window_len x n_features, oldest year first
    double target = 0.0;
    int target_year = 0;
    /// Raw values of the target's quantity for up to kBaselineLookback years
    /// ending at the last window year, chronological. Feeds the baselines.
    std::vector<double> target_history;

    [[nodiscard]] std::size_t window_len() const noexcept { return window_years.size(); }
    [[nodiscard]] std::span<const double> step(std::size_t t) const {
        return std::span<const double>(inputs).subspan(t * n_features, n_features);
    }

    friend bool operator==(const Sample&, const Sample&) = default;
};

namespace detail {

// Input window ending at `last_year` for prediction year last_year + 1, or
// nullopt if any value is missing.
inline std::optional<std::vector<double>> window_inputs(const JournalHistory& h, const FeatureConfig& config,
                                                        int window_len, int last_year) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(window_len) * config.inputs.size());
    for (int yr = last_year - window_len + 1; yr <= last_year; ++yr) {
        for (auto f : config.inputs) {
            auto v = feature_value(h, f, yr, last_year + 1);
            if (!v) return std::nullopt;
            values.push_back(*v);
        }
    }
    return values;
}

inline std::vector<double> series_history(const JournalHistory& h, FeatureId target, int last_year) {
    const FeatureId sf = series_feature(target);
    std::vector<double> out;
    for (int yr = last_year; yr > last_year - kBaselineLookback; --yr) {
        auto v = feature_value(h, sf, yr, yr + 1);
        if (!v) break;
        out.push_back(*v);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace detail

/// Input window for predicting the year after the journal's final record.
/// Returns nullopt when the history cannot supply every required value.
[[nodiscard]] inline std::optional<Sample> prediction_input(const JournalHistory& h, const FeatureConfig& config,
                                                            int window_len) {
    if (h.empty()) return std::nullopt;
    const int last = h.last_year();
    auto values = detail::window_inputs(h, config, window_len, last);
    if (!values) return std::nullopt;
    Sample s;
    s.journal_id = h.journal_id();
    for (int yr = last - window_len + 1; yr <= last; ++yr) s.window_years.push_back(yr);
    s.n_features = config.inputs.size();
    s.inputs = std::move(*values);
    s.target = std::numeric_limits<double>::quiet_NaN();
    s.target_year = last + 1;
    s.target_history = detail::series_history(h, config.target, last);
    return s;
}

/// Stride-1 sliding windows over one journal. A window is emitted only when
/// every input over the window and the following year's target are available.
[[nodiscard]] inline std::vector<Sample> journal_samples(const JournalHistory& h, const FeatureConfig& config,
                                                         int window_len) {
    if (window_len < 1) throw ConfigError("window length must be >= 1");
    std::vector<Sample> out;
    if (h.empty()) return out;
    for (int last = h.first_year() + window_len - 1; last < h.last_year(); ++last) {
        auto target = feature_value(h, config.target, last + 1, last + 1);
        if (!target) continue;
        auto values = detail::window_inputs(h, config, window_len, last);
        if (!values) continue;
        Sample s;
        s.journal_id = h.journal_id();
        for (int yr = last - window_len + 1; yr <= last; ++yr) s.window_years.push_back(yr);
        s.n_features = config.inputs.size();
        s.inputs = std::move(*values);
        s.target = *target;
        s.target_year = last + 1;
        s.target_history = detail::series_history(h, config.target, last);
        out.push_back(std::move(s));
    }
    return out;
}

/// Samples from every journal in dataset order.
[[nodiscard]] inline std::vector<Sample> enumerate_samples(const Dataset& dataset, const FeatureConfig& config,
                                                           int window_len) {
    std::vector<Sample> out;
    for (const auto& j : dataset.journals()) {
        auto s = journal_samples(j, config, window_len);
        out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    }
    return out;
}

/// Journal-level random partition; |train| = round(train_fraction * N).
/// Both halves keep the dataset's original journal order.
[[nodiscard]] inline std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                                               std::uint64_t seed) {
    if (dataset.empty()) throw ConfigError("cannot split an empty dataset");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0,1)");
    const std::size_t n = dataset.size();
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, 0x5b1d);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> in_train(n, false);
    for (std::size_t k = 0; k < n_train; ++k) in_train[order[k]] = true;
    std::vector<JournalHistory> train, test;
    for (std::size_t k = 0; k < n; ++k) (in_train[k] ? train : test).push_back(dataset.journals()[k]);
    return {Dataset(std::move(train)), Dataset(std::move(test))};
}

/// Flattened CSV dump, one row per sample, for debugging.
inline void write_samples_csv(std::ostream& out, std::span<const Sample> samples, const FeatureConfig& config) {
    const std::size_t window = samples.empty() ? 0 : samples.front().window_len();
    out << "journal_id,target_year";
    for (std::size_t t = 0; t < window; ++t)
        for (auto f : config.inputs) out << ",\"t" << t << ':' << symbol(f) << '"';
    out << ",\"" << symbol(config.target) << "\"\n";
    out.precision(17);
    for (const auto& s : samples) {
        out << s.journal_id << ',' << s.target_year;
        for (double v : s.inputs) out << ',' << v;
        out << ',' << s.target << '\n';
    }
}

}  // namespace citecast
