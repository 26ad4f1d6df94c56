#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "citecast/data_model.hpp"
#include "citecast/error.hpp"
#include "citecast/synthetic.hpp"

namespace citecast {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Journal histories <-> JSON

inline json to_json(const AnnualRecord& r) {
    json cites = json::object();
    for (const auto& [pub_year, n] : r.citations_by_pub_year) cites[std::to_string(pub_year)] = n;
    return json{{"year", r.year},
                {"publications", r.publications},
                {"citations_by_pub_year", std::move(cites)},
                {"pct_not_cited", r.pct_not_cited},
                {"snip", r.snip ? json(*r.snip) : json(nullptr)},
                {"sjr", r.sjr ? json(*r.sjr) : json(nullptr)}};
}

inline json to_json(const JournalHistory& h) {
    json records = json::array();
    for (const auto& r : h.records()) records.push_back(to_json(r));
    return json{{"journal_id", h.journal_id()}, {"records", std::move(records)}};
}

namespace detail {

inline const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw DataError(std::string("missing field '") + key + "'");
    return *it;
}

inline Count require_count(const json& v, const char* what) {
    if (!v.is_number_integer()) throw DataError(std::string("'") + what + "' must be an integer");
    return v.get<Count>();
}

inline std::optional<double> optional_number(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw DataError(std::string("'") + key + "' must be a number or null");
    return it->get<double>();
}

}  // namespace detail

inline AnnualRecord annual_record_from_json(const json& j) {
    if (!j.is_object()) throw DataError("record must be an object");
    AnnualRecord r;
    r.year = static_cast<int>(detail::require_count(detail::require(j, "year"), "year"));
    r.publications = detail::require_count(detail::require(j, "publications"), "publications");
    const auto& cites = detail::require(j, "citations_by_pub_year");
    if (!cites.is_object()) throw DataError("'citations_by_pub_year' must be an object");
    for (const auto& [key, value] : cites.items()) {
        int pub_year = 0;
        std::size_t used = 0;
        try {
            pub_year = std::stoi(key, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != key.size()) throw DataError("citation key '" + key + "' is not a year");
        r.citations_by_pub_year[pub_year] = detail::require_count(value, "citation count");
    }
    const auto& nc = detail::require(j, "pct_not_cited");
    if (!nc.is_number()) throw DataError("'pct_not_cited' must be a number");
    r.pct_not_cited = nc.get<double>();
    r.snip = detail::optional_number(j, "snip");
    r.sjr = detail::optional_number(j, "sjr");
    return r;
}

inline JournalHistory journal_from_json(const json& j) {
    if (!j.is_object()) throw DataError("journal line must be a JSON object");
    const auto& id = detail::require(j, "journal_id");
    if (!id.is_string()) throw DataError("'journal_id' must be a string");
    const auto& recs = detail::require(j, "records");
    if (!recs.is_array()) throw DataError("'records' must be an array");
    std::vector<AnnualRecord> records;
    records.reserve(recs.size());
    for (const auto& r : recs) records.push_back(annual_record_from_json(r));
    return {id.get<std::string>(), std::move(records)};
}

// ---------------------------------------------------------------------------
// NDJSON files: one journal per line, blank lines ignored.

/// Parses journals from an NDJSON stream. Errors carry the 1-based line number.
inline std::vector<JournalHistory> read_journals(std::istream& in) {
    std::vector<JournalHistory> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(journal_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const DataError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return out;
}

inline std::vector<JournalHistory> read_journals_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_journals(in);
}

inline void write_journals(std::ostream& out, std::span<const JournalHistory> journals) {
    for (const auto& j : journals) out << to_json(j).dump() << '\n';
}

inline void write_dataset_file(const std::string& path, const Dataset& dataset) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_journals(out, dataset.journals());
}

// ---------------------------------------------------------------------------
// Generator config

inline json to_json(const GeneratorConfig& c) {
    return json{{"n_journals", c.n_journals},
                {"year_min", c.year_min},
                {"year_max", c.year_max},
                {"full_history_fraction", c.full_history_fraction},
                {"min_history_years", c.min_history_years},
                {"pub_log_mean", c.pub_log_mean},
                {"pub_log_sd", c.pub_log_sd},
                {"pub_growth", c.pub_growth},
                {"ar_rho", c.ar_rho},
                {"ar_sigma", c.ar_sigma},
                {"cite_rate_log_mean", c.cite_rate_log_mean},
                {"cite_rate_log_sd", c.cite_rate_log_sd},
                {"cite_growth", c.cite_growth},
                {"lag_offset", c.lag_offset},
                {"lag_decay", c.lag_decay},
                {"uncited_dispersion", c.uncited_dispersion},
                {"missing_metric_prob", c.missing_metric_prob}};
}

/// Reads a generator config; absent keys keep their defaults. A "seed" key, if
/// present, is ignored here and read by the caller.
inline GeneratorConfig generator_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
    GeneratorConfig c;
    auto get = [&](const char* key, auto& field) {
        if (auto it = j.find(key); it != j.end()) {
            try {
                it->get_to(field);
            } catch (const json::exception&) {
                throw ConfigError(std::string("generator config: bad value for '") + key + "'");
            }
        }
    };
    get("n_journals", c.n_journals);
    get("year_min", c.year_min);
    get("year_max", c.year_max);
    get("full_history_fraction", c.full_history_fraction);
    get("min_history_years", c.min_history_years);
    get("pub_log_mean", c.pub_log_mean);
    get("pub_log_sd", c.pub_log_sd);
    get("pub_growth", c.pub_growth);
    get("ar_rho", c.ar_rho);
    get("ar_sigma", c.ar_sigma);
    get("cite_rate_log_mean", c.cite_rate_log_mean);
    get("cite_rate_log_sd", c.cite_rate_log_sd);
    get("cite_growth", c.cite_growth);
    get("lag_offset", c.lag_offset);
    get("lag_decay", c.lag_decay);
    get("uncited_dispersion", c.uncited_dispersion);
    get("missing_metric_prob", c.missing_metric_prob);
    c.validate();
    return c;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

}  // namespace citecast
