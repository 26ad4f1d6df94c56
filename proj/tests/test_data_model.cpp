#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "citecast/data_model.hpp"
#include "citecast/io.hpp"
#include "citecast/synthetic.hpp"
#include "test_util.hpp"

using namespace citecast;
using citecast::testing::citescore_oracle;
using citecast::testing::random_history;

namespace {

AnnualRecord record(int year, Count pubs, std::map<int, Count> cites) {
    AnnualRecord r;
    r.year = year;
    r.publications = pubs;
    r.citations_by_pub_year = std::move(cites);
    return r;
}

}  // namespace

TEST(TotalCitations, SumsTheRow) {
    JournalHistory h("j", {record(2020, 1, {{2020, 5}, {2019, 7}})});
    EXPECT_EQ(total_citations(h, 2020), 12);
}

TEST(TotalCitations, EmptyMapIsZero) {
    JournalHistory h("j", {record(2020, 1, {})});
    EXPECT_EQ(total_citations(h, 2020), 0);
}

TEST(TotalCitations, MissingYearThrows) {
    JournalHistory h("j", {record(2020, 1, {})});
    EXPECT_THROW((void)total_citations(h, 2019), MissingYearError);
}

TEST(TotalCitations, MatchesBruteForceRowSum) {
    std::mt19937_64 rng(3);
    const auto h = random_history(rng, "j", 2000, 2020);
    Count brute = 0;
    for (const auto& r : h.records())
        if (r.year == 2015)
            for (const auto& kv : r.citations_by_pub_year) brute += kv.second;
    EXPECT_EQ(total_citations(h, 2015), brute);
}

TEST(CitationWindowSum, HandExample) {
    std::vector<AnnualRecord> recs;
    for (int y = 2016; y <= 2019; ++y) recs.push_back(record(y, 1, {}));
    recs.push_back(record(2020, 1, {{2020, 1}, {2019, 2}, {2018, 3}, {2017, 4}, {2016, 9}}));
    JournalHistory h("j", recs);
    EXPECT_EQ(citation_window_sum(h, 2020, 4), 10);
    EXPECT_EQ(citation_window_sum(h, 2020, 1), 1);
}

TEST(CitationWindowSum, WindowOneIsCurrentYearTerm) {
    std::mt19937_64 rng(4);
    const auto h = random_history(rng, "j", 2000, 2010);
    for (int y = 2000; y <= 2010; ++y) EXPECT_EQ(citation_window_sum(h, y, 1), h.at(y).citations_to(y));
}

TEST(CitationWindowSum, FullSpanEqualsTotalMinusOlder) {
    std::mt19937_64 rng(5);
    const auto h = random_history(rng, "j", 2000, 2020);
    for (int w = 1; w <= 21; ++w) {
        Count older = 0;
        for (const auto& [i, c] : h.at(2020).citations_by_pub_year)
            if (i <= 2020 - w) older += c;
        EXPECT_EQ(citation_window_sum(h, 2020, w), total_citations(h, 2020) - older) << "w=" << w;
        EXPECT_GE(total_citations(h, 2020), citation_window_sum(h, 2020, w));
    }
}

TEST(CitationWindowSum, InsufficientHistoryThrows) {
    std::mt19937_64 rng(6);
    const auto h = random_history(rng, "j", 2018, 2020);
    EXPECT_THROW((void)citation_window_sum(h, 2020, 4), MissingYearError);
}

TEST(CiteScore, TenPerYearEightyCitationsIsTwo) {
    std::vector<AnnualRecord> recs;
    for (int y = 2017; y <= 2020; ++y) recs.push_back(record(y, 10, {}));
    recs.back().citations_by_pub_year = {{2017, 20}, {2018, 20}, {2019, 20}, {2020, 20}};
    EXPECT_EQ(compute_citescore(JournalHistory("j", recs), 2020), 2.0);
}

TEST(CiteScore, ZeroCitationsIsZero) {
    std::vector<AnnualRecord> recs;
    for (int y = 2017; y <= 2020; ++y) recs.push_back(record(y, 7, {}));
    EXPECT_EQ(compute_citescore(JournalHistory("j", recs), 2020), 0.0);
}

TEST(CiteScore, ZeroPublicationsIsUndefined) {
    std::vector<AnnualRecord> recs;
    for (int y = 2017; y <= 2020; ++y) recs.push_back(record(y, 0, {}));
    EXPECT_THROW((void)compute_citescore(JournalHistory("j", recs), 2020), UndefinedCiteScoreError);
}

TEST(CiteScore, MissingYearThrows) {
    std::vector<AnnualRecord> recs;
    for (int y = 2018; y <= 2020; ++y) recs.push_back(record(y, 7, {}));
    EXPECT_THROW((void)compute_citescore(JournalHistory("j", recs), 2020), MissingYearError);
}

TEST(CiteScore, MatchesDoubleLoopOracle) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        const auto h = random_history(rng, "j", 2000, 2010);
        for (int x = 2003; x <= 2010; ++x) EXPECT_NEAR(compute_citescore(h, x), citescore_oracle(h, x), 1e-12 * citescore_oracle(h, x));
    }
}

TEST(CiteScore, DoublingWindowCitationsDoublesScore) {
    std::mt19937_64 rng(8);
    const auto h = random_history(rng, "j", 2000, 2010);
    std::vector<AnnualRecord> recs(h.records().begin(), h.records().end());
    for (auto& r : recs)
        for (auto& [i, c] : r.citations_by_pub_year)
            if (i >= 2007) c *= 2;
    EXPECT_DOUBLE_EQ(compute_citescore(JournalHistory("j", recs), 2010), 2.0 * compute_citescore(h, 2010));
}

TEST(CiteScore, IgnoresCitationsOutsideWindow) {
    std::mt19937_64 rng(9);
    const auto h = random_history(rng, "j", 2000, 2012);
    std::vector<AnnualRecord> recs(h.records().begin(), h.records().end());
    for (auto& r : recs) {
        for (auto& [i, c] : r.citations_by_pub_year)
            if (i < 2007) c += 1000;  // older publications
        if (r.year > 2010) r.citations_by_pub_year[2008] += 1000;  // later citation years
    }
    EXPECT_EQ(compute_citescore(JournalHistory("j", recs), 2010), compute_citescore(h, 2010));
}

TEST(Validate, WellFormedHistoryIsClean) {
    std::mt19937_64 rng(10);
    EXPECT_TRUE(validate_history(random_history(rng, "j", 2000, 2020)).ok());
}

TEST(Validate, CitationBeforePublication) {
    JournalHistory h("j", {record(2019, 3, {{2020, 3}}), record(2020, 3, {})});
    const auto r = validate_history(h);
    ASSERT_TRUE(r.has(ViolationKind::CitationBeforePublication));
    EXPECT_NE(r.violations.front().message.find("citation from before publication"), std::string::npos);
}

TEST(Validate, YearGap) {
    JournalHistory h("j", {record(2016, 3, {}), record(2018, 3, {})});
    EXPECT_TRUE(validate_history(h).has(ViolationKind::YearGap));
}

TEST(Validate, OtherViolations) {
    auto r = record(2020, -1, {{2020, -2}});
    r.pct_not_cited = 120.0;
    r.snip = -1.0;
    const auto rep = validate_history(JournalHistory("j", {r}));
    EXPECT_TRUE(rep.has(ViolationKind::NegativePublications));
    EXPECT_TRUE(rep.has(ViolationKind::NegativeCitations));
    EXPECT_TRUE(rep.has(ViolationKind::PctNotCitedOutOfRange));
    EXPECT_TRUE(rep.has(ViolationKind::NegativeMetric));
    EXPECT_TRUE(validate_history(JournalHistory("j", {})).has(ViolationKind::EmptyHistory));
}

TEST(DatasetTest, RejectsDuplicateIds) {
    std::mt19937_64 rng(11);
    EXPECT_THROW(Dataset({random_history(rng, "a", 2000, 2002), random_history(rng, "a", 2000, 2002)}), DataError);
}

TEST(Synthetic, ZeroJournalsIsEmpty) {
    GeneratorConfig c;
    c.n_journals = 0;
    EXPECT_TRUE(generate_synthetic(c, 1).empty());
}

TEST(Synthetic, DeterministicPerSeed) {
    GeneratorConfig c;
    c.n_journals = 50;
    EXPECT_EQ(generate_synthetic(c, 5), generate_synthetic(c, 5));
    EXPECT_NE(generate_synthetic(c, 5), generate_synthetic(c, 6));
}

TEST(Synthetic, EveryHistoryValidates) {
    GeneratorConfig c;
    c.n_journals = 300;
    const auto d = generate_synthetic(c, 17);
    for (const auto& h : d.journals()) EXPECT_TRUE(validate_history(h).ok()) << h.journal_id();
}

TEST(Synthetic, BadConfigThrows) {
    GeneratorConfig c;
    c.n_journals = -1;
    EXPECT_THROW((void)generate_synthetic(c, 1), ConfigError);
    c.n_journals = 5;
    c.year_max = c.year_min - 1;
    EXPECT_THROW((void)generate_synthetic(c, 1), ConfigError);
}

TEST(Io, RoundTrip) {
    GeneratorConfig c;
    c.n_journals = 20;
    const auto d = generate_synthetic(c, 2);
    std::stringstream ss;
    write_journals(ss, d.journals());
    EXPECT_EQ(Dataset(read_journals(ss)), d);
}

TEST(Io, EmptyInputHasNoJournals) {
    std::istringstream in("");
    EXPECT_TRUE(read_journals(in).empty());
}

TEST(Io, MalformedLineNamesLine) {
    std::istringstream in("{\"journal_id\": \"a\", \"records\": [}\n");
    try {
        (void)read_journals(in);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1u);
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
}

TEST(Io, SchemaViolationIsParseError) {
    std::istringstream in("{\"journal_id\": \"a\", \"records\": [{\"year\": 2000}]}\n");
    EXPECT_THROW((void)read_journals(in), ParseError);
}
