#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "citecast/error.hpp"

namespace citecast {

using Count = std::int64_t;

/// One journal-year of bibliometric data.
///
/// `citations_by_pub_year[y]` is the number of citations received during `year`
/// by documents published in year `y`. The map is sparse: absent keys are zero.
struct AnnualRecord {
    int year = 0;
    Count publications = 0;
    std::map<int, Count> citations_by_pub_year;
    double pct_not_cited = 0.0;
    std::optional<double> snip;
    std::optional<double> sjr;

    /// Citations received this year by documents from `pub_year`.
    [[nodiscard]] Count citations_to(int pub_year) const {
        auto it = citations_by_pub_year.find(pub_year);
        return it == citations_by_pub_year.end() ? 0 : it->second;
    }

    /// Citations received this year across every publication year.
    [[nodiscard]] Count total_citations() const {
        Count total = 0;
        for (const auto& [pub_year, n] : citations_by_pub_year) total += n;
        return total;
    }

    friend bool operator==(const AnnualRecord&, const AnnualRecord&) = default;
};

/// Chronological annual records for a single journal.
///
/// The container does not enforce its invariants on construction so that
/// malformed ingested data can still be inspected; use validate_history().
class JournalHistory {
public:
    JournalHistory() = default;
    JournalHistory(std::string journal_id, std::vector<AnnualRecord> records)
        : journal_id_(std::move(journal_id)), records_(std::move(records)) {}

    [[nodiscard]] const std::string& journal_id() const noexcept { return journal_id_; }
    [[nodiscard]] std::span<const AnnualRecord> records() const noexcept { return records_; }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] int first_year() const { return front().year; }
    [[nodiscard]] int last_year() const { return back().year; }

    [[nodiscard]] const AnnualRecord& front() const {
        if (records_.empty()) throw InsufficientHistoryError("journal '" + journal_id_ + "' has no records");
        return records_.front();
    }
    [[nodiscard]] const AnnualRecord& back() const {
        if (records_.empty()) throw InsufficientHistoryError("journal '" + journal_id_ + "' has no records");
        return records_.back();
    }

    [[nodiscard]] const AnnualRecord* find(int year) const noexcept {
        if (records_.empty()) return nullptr;
        const long idx = static_cast<long>(year) - records_.front().year;
        if (idx >= 0 && idx < static_cast<long>(records_.size()) && records_[idx].year == year)
            return &records_[idx];
        for (const auto& r : records_)
            if (r.year == year) return &r;
        return nullptr;
    }

    [[nodiscard]] const AnnualRecord& at(int year) const {
        if (const auto* r = find(year)) return *r;
        throw MissingYearError(journal_id_, year);
    }

    [[nodiscard]] bool has_year(int year) const noexcept { return find(year) != nullptr; }

    /// True when every year in [from, to] has a record.
    [[nodiscard]] bool has_years(int from, int to) const noexcept {
        for (int y = from; y <= to; ++y)
            if (!has_year(y)) return false;
        return true;
    }

    /// Copy containing only records with year <= `last_year`.
    [[nodiscard]] JournalHistory truncated(int last_year) const {
        std::vector<AnnualRecord> kept;
        for (const auto& r : records_)
            if (r.year <= last_year) kept.push_back(r);
        return {journal_id_, std::move(kept)};
    }

    friend bool operator==(const JournalHistory&, const JournalHistory&) = default;

private:
    std::string journal_id_;
    std::vector<AnnualRecord> records_;
};

/// A collection of journal histories with unique ids.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<JournalHistory> journals) : journals_(std::move(journals)) {
        std::unordered_set<std::string> seen;
        for (const auto& j : journals_) {
            if (!seen.insert(j.journal_id()).second)
                throw DataError("duplicate journal_id '" + j.journal_id() + "'");
            if (j.empty()) continue;
            auto [lo, hi] = std::minmax_element(j.records().begin(), j.records().end(),
                                                [](const auto& a, const auto& b) { return a.year < b.year; });
            if (!horizon_) horizon_ = {lo->year, hi->year};
            horizon_->first = std::min(horizon_->first, lo->year);
            horizon_->second = std::max(horizon_->second, hi->year);
        }
    }

    [[nodiscard]] std::span<const JournalHistory> journals() const noexcept { return journals_; }
    [[nodiscard]] std::size_t size() const noexcept { return journals_.size(); }
    [[nodiscard]] bool empty() const noexcept { return journals_.empty(); }
    /// (min_year, max_year) over all records; empty when no records exist.
    [[nodiscard]] std::optional<std::pair<int, int>> horizon() const noexcept { return horizon_; }

    [[nodiscard]] const JournalHistory* find(const std::string& journal_id) const noexcept {
        for (const auto& j : journals_)
            if (j.journal_id() == journal_id) return &j;
        return nullptr;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<JournalHistory> journals_;
    std::optional<std::pair<int, int>> horizon_;
};

// ---------------------------------------------------------------------------
// Derived quantities

/// c_x: citations received during `year` across all publication years.
[[nodiscard]] inline Count total_citations(const JournalHistory& history, int year) {
    return history.at(year).total_citations();
}

/// c_{x,w}: citations received during `year` by publications from the
/// `window` years ending at `year` (inclusive). Every publication year in the
/// window must have a record.
[[nodiscard]] inline Count citation_window_sum(const JournalHistory& history, int year, int window) {
    if (window < 1) throw ConfigError("citation window must be >= 1, got " + std::to_string(window));
    const auto& rec = history.at(year);
    Count sum = 0;
    for (int pub = year - window + 1; pub <= year; ++pub) {
        if (!history.has_year(pub)) throw MissingYearError(history.journal_id(), pub);
        sum += rec.citations_to(pub);
    }
    return sum;
}

/// p_{x,w}: publications over the `window` years ending at `year` (inclusive).
[[nodiscard]] inline Count publication_window_sum(const JournalHistory& history, int year, int window) {
    if (window < 1) throw ConfigError("publication window must be >= 1, got " + std::to_string(window));
    Count sum = 0;
    for (int y = year - window + 1; y <= year; ++y) sum += history.at(y).publications;
    return sum;
}

inline constexpr int kCiteScoreWindow = 4;

/// CiteScore numerator for `year`: citations received in years j <= `through_year`
/// by publications from years i in [year-3, year], i <= j.
[[nodiscard]] inline Count citescore_numerator(const JournalHistory& history, int year, int through_year) {
    Count num = 0;
    for (int i = year - kCiteScoreWindow + 1; i <= year; ++i) {
        for (int j = i; j <= through_year; ++j) num += history.at(j).citations_to(i);
    }
    return num;
}

/// CiteScore for `year`: in-window citations over in-window publications.
[[nodiscard]] inline double compute_citescore(const JournalHistory& history, int year) {
    Count denom = 0;
    for (int i = year - kCiteScoreWindow + 1; i <= year; ++i) denom += history.at(i).publications;
    const Count num = citescore_numerator(history, year, year);
    if (denom <= 0)
        throw UndefinedCiteScoreError("journal '" + history.journal_id() + "': no publications in the CiteScore window ending " +
                                      std::to_string(year));
    return static_cast<double>(num) / static_cast<double>(denom);
}

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
    EmptyHistory,
    YearGap,
    NonIncreasingYear,
    NegativePublications,
    NegativeCitations,
    CitationBeforePublication,
    PctNotCitedOutOfRange,
    NegativeMetric,
    InactiveFinalYear,
};

struct Violation {
    ViolationKind kind;
    int year = 0;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
    [[nodiscard]] bool has(ViolationKind kind) const noexcept {
        return std::any_of(violations.begin(), violations.end(), [kind](const auto& v) { return v.kind == kind; });
    }
};

/// Checks every JournalHistory/AnnualRecord invariant. Never throws.
[[nodiscard]] inline ValidationReport validate_history(const JournalHistory& history) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, int year, std::string msg) {
        report.violations.push_back({kind, year, std::move(msg)});
    };
    const auto records = history.records();
    if (records.empty()) {
        add(ViolationKind::EmptyHistory, 0, "history has no records");
        return report;
    }
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        const auto ys = std::to_string(r.year);
        if (k > 0) {
            const int prev = records[k - 1].year;
            if (r.year <= prev)
                add(ViolationKind::NonIncreasingYear, r.year, "year " + ys + " does not follow " + std::to_string(prev));
            else if (r.year != prev + 1)
                add(ViolationKind::YearGap, r.year, "gap between " + std::to_string(prev) + " and " + ys);
        }
        if (r.publications < 0) add(ViolationKind::NegativePublications, r.year, "negative publications in " + ys);
        for (const auto& [pub_year, n] : r.citations_by_pub_year) {
            if (pub_year > r.year)
                add(ViolationKind::CitationBeforePublication, r.year,
                    "citation from before publication: c(" + ys + "," + std::to_string(pub_year) + ")");
            if (n < 0)
                add(ViolationKind::NegativeCitations, r.year,
                    "negative citation count c(" + ys + "," + std::to_string(pub_year) + ")");
        }
        if (!(r.pct_not_cited >= 0.0 && r.pct_not_cited <= 100.0))
            add(ViolationKind::PctNotCitedOutOfRange, r.year, "pct_not_cited out of [0,100] in " + ys);
        if ((r.snip && !(*r.snip >= 0.0)) || (r.sjr && !(*r.sjr >= 0.0)))
            add(ViolationKind::NegativeMetric, r.year, "negative SNIP/SJR in " + ys);
    }
    if (records.back().publications < 1)
        add(ViolationKind::InactiveFinalYear, records.back().year, "no publications in final year");
    return report;
}

}  // namespace citecast
