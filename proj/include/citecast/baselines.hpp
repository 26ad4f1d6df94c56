#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "citecast/error.hpp"

namespace citecast {

// Heuristic next-value predictors over a chronological series v_1..v_n.
// Outputs are not clamped; a declining series may extrapolate below zero.

enum class BaselineKind { Persistence, Delta, WeightedDelta };

/// Delta and weighted-delta extrapolate successive differences. `PrintedSum`
/// instead adds successive *sums*, halved for the plain delta, and exists only
/// for side-by-side comparison.
enum class DeltaVariant { Difference, PrintedSum };

/// Weights in tenths, newest difference first: 0.4, 0.3, 0.2, 0.1.
inline constexpr std::array<double, 4> kWeightedDeltaTenths{4.0, 3.0, 2.0, 1.0};

[[nodiscard]] inline std::size_t baseline_lookback(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::Persistence: return 1;
        case BaselineKind::Delta: return 2;
        case BaselineKind::WeightedDelta: return 5;
    }
    return 1;
}

[[nodiscard]] inline std::string_view baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::Persistence: return "persistence";
        case BaselineKind::Delta: return "delta";
        case BaselineKind::WeightedDelta: return "weighted_delta";
    }
    return "?";
}

[[nodiscard]] inline BaselineKind baseline_from_name(std::string_view name) {
    for (auto k : {BaselineKind::Persistence, BaselineKind::Delta, BaselineKind::WeightedDelta})
        if (baseline_name(k) == name) return k;
    throw ConfigError("unknown baseline '" + std::string(name) + "'");
}

namespace detail {
inline void require_history(std::span<const double> s, std::size_t n, std::string_view who) {
    if (s.size() < n)
        throw InsufficientHistoryError(std::string(who) + " needs " + std::to_string(n) + " values, got " +
                                       std::to_string(s.size()));
}
}  // namespace detail

/// Repeats the last value.
[[nodiscard]] inline double persistence_predict(std::span<const double> s) {
    detail::require_history(s, 1, "persistence");
    return s.back();
}

/// Adds the last difference to the last value.
[[nodiscard]] inline double delta_predict(std::span<const double> s, DeltaVariant variant = DeltaVariant::Difference) {
    detail::require_history(s, 2, "delta");
    const double last = s[s.size() - 1];
    const double prev = s[s.size() - 2];
    if (variant == DeltaVariant::PrintedSum) return last + (last + prev) / 2.0;
    return last + (last - prev);
}

/// Adds a 0.4/0.3/0.2/0.1-weighted sum of the last four differences (newest first).
[[nodiscard]] inline double weighted_delta_predict(std::span<const double> s,
                                                   DeltaVariant variant = DeltaVariant::Difference) {
    detail::require_history(s, 5, "weighted delta");
    const std::size_t n = s.size();
    // Summing in tenths and dividing once keeps integer-slope series exact.
    double tenths = 0.0;
    for (std::size_t k = 0; k < kWeightedDeltaTenths.size(); ++k) {
        const double newer = s[n - 1 - k];
        const double older = s[n - 2 - k];
        tenths += kWeightedDeltaTenths[k] * (variant == DeltaVariant::PrintedSum ? newer + older : newer - older);
    }
    return s[n - 1] + tenths / 10.0;
}

[[nodiscard]] inline double baseline_predict(BaselineKind kind, std::span<const double> s,
                                             DeltaVariant variant = DeltaVariant::Difference) {
    switch (kind) {
        case BaselineKind::Persistence: return persistence_predict(s);
        case BaselineKind::Delta: return delta_predict(s, variant);
        case BaselineKind::WeightedDelta: return weighted_delta_predict(s, variant);
    }
    return persistence_predict(s);
}

}  // namespace citecast
