#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "citecast/data_model.hpp"
#include "citecast/error.hpp"
#include "citecast/random.hpp"

namespace citecast {

/// Parameters of the synthetic journal generator.
///
/// Defaults are calibrated so that pooled journal-year means land near
/// 108 publications and 2880 citations per year, with long right tails.
struct GeneratorConfig {
    int n_journals = 1000;
    int year_min = 2000;
    int year_max = 2020;

    /// Share of journals indexed for the whole span; the rest start later.
    double full_history_fraction = 0.5;
    int min_history_years = 3;

    // log p_x = pub_log_mean + pub_growth * (x - year_min) + ar_x
    double pub_log_mean = 3.42;
    double pub_log_sd = 1.434;
    double pub_growth = 0.02;

    // Year-to-year multiplicative AR(1) shocks shared by publications and citation intensity.
    double ar_rho = 0.9;
    double ar_sigma = 0.06;

    // Per-publication citation intensity (citations per document per unit of lag profile).
    double cite_rate_log_mean = 0.60;
    double cite_rate_log_sd = 1.07;
    double cite_growth = 0.03;

    // Lag profile weight(l) = (l + lag_offset) * lag_decay^l, l = citation year - publication year.
    double lag_offset = 0.3;
    double lag_decay = 0.7;

    /// Negative-binomial shape used for the share of never-cited documents.
    double uncited_dispersion = 0.35;
    /// Per journal-year probability that SNIP and SJR are both unavailable.
    double missing_metric_prob = 0.02;

    void validate() const {
        if (n_journals < 0) throw ConfigError("n_journals must be >= 0");
        if (year_max < year_min) throw ConfigError("year_max must be >= year_min");
        if (min_history_years < 1 || min_history_years > year_max - year_min + 1)
            throw ConfigError("min_history_years must be in [1, year span]");
        if (!(full_history_fraction >= 0.0 && full_history_fraction <= 1.0))
            throw ConfigError("full_history_fraction must be in [0,1]");
        if (!(pub_log_sd >= 0.0) || !(cite_rate_log_sd >= 0.0) || !(ar_sigma >= 0.0))
            throw ConfigError("standard deviations must be >= 0");
        if (!(ar_rho > -1.0 && ar_rho < 1.0)) throw ConfigError("ar_rho must be in (-1,1)");
        if (!(lag_decay > 0.0 && lag_decay < 1.0)) throw ConfigError("lag_decay must be in (0,1)");
        if (!(lag_offset > 0.0)) throw ConfigError("lag_offset must be > 0");
        if (!(uncited_dispersion > 0.0)) throw ConfigError("uncited_dispersion must be > 0");
        if (!(missing_metric_prob >= 0.0 && missing_metric_prob <= 1.0))
            throw ConfigError("missing_metric_prob must be in [0,1]");
    }

    [[nodiscard]] double lag_weight(int lag) const {
        return (lag + lag_offset) * std::pow(lag_decay, lag);
    }
};

namespace detail {

inline Count sample_poisson(Rng& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    // std::poisson_distribution is exact but slow for very large means.
    if (mean > 1e7) {
        std::normal_distribution<double> z(mean, std::sqrt(mean));
        return std::max<Count>(0, std::llround(z(rng)));
    }
    std::poisson_distribution<Count> d(mean);
    return d(rng);
}

inline Count sample_binomial(Rng& rng, Count n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::binomial_distribution<Count> d(n, p);
    return d(rng);
}

inline JournalHistory generate_journal(const GeneratorConfig& cfg, std::uint64_t seed, int index) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(index));
    std::normal_distribution<double> std_normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    int start = cfg.year_min;
    const int latest_start = cfg.year_max - cfg.min_history_years + 1;
    if (unit(rng) >= cfg.full_history_fraction && latest_start > cfg.year_min) {
        std::uniform_int_distribution<int> pick(cfg.year_min + 1, latest_start);
        start = pick(rng);
    }

    const double pub_base = cfg.pub_log_mean + cfg.pub_log_sd * std_normal(rng);
    const double z_rate = std_normal(rng);
    const double rate_base = cfg.cite_rate_log_mean + cfg.cite_rate_log_sd * z_rate;
    // SNIP/SJR are log-normal, partially correlated with citation intensity.
    const double snip_base = -0.65 + 0.94 * (0.6 * z_rate + 0.8 * std_normal(rng));
    const double sjr_base = -1.168 + 1.243 * (0.6 * z_rate + 0.8 * std_normal(rng));

    const double stationary_sd = cfg.ar_sigma / std::sqrt(1.0 - cfg.ar_rho * cfg.ar_rho);
    double pub_shock = stationary_sd * std_normal(rng);
    double rate_shock = stationary_sd * std_normal(rng);

    const int n_years = cfg.year_max - start + 1;
    std::vector<Count> pubs(n_years);
    std::vector<double> rate(n_years);
    for (int k = 0; k < n_years; ++k) {
        if (k > 0) {
            pub_shock = cfg.ar_rho * pub_shock + cfg.ar_sigma * std_normal(rng);
            rate_shock = cfg.ar_rho * rate_shock + cfg.ar_sigma * std_normal(rng);
        }
        const int t = start + k - cfg.year_min;
        const double lp = pub_base + cfg.pub_growth * t + pub_shock;
        pubs[k] = std::max<Count>(1, std::llround(std::exp(lp)));
        rate[k] = std::exp(rate_base + cfg.cite_growth * t + rate_shock);
    }

    std::vector<AnnualRecord> records(n_years);
    for (int k = 0; k < n_years; ++k) {
        auto& r = records[k];
        r.year = start + k;
        r.publications = pubs[k];
        for (int i = 0; i <= k; ++i) {
            const double mean = static_cast<double>(pubs[i]) * rate[k] * cfg.lag_weight(k - i);
            const Count c = sample_poisson(rng, mean);
            if (c > 0) r.citations_by_pub_year[start + i] = c;
        }
    }

    // Never-cited share of each cohort, as of the final observed year.
    for (int k = 0; k < n_years; ++k) {
        double expected = 0.0;
        for (int j = k; j < n_years; ++j) expected += rate[j] * cfg.lag_weight(j - k);
        const double p_zero = std::pow(1.0 + expected / cfg.uncited_dispersion, -cfg.uncited_dispersion);
        const Count uncited = sample_binomial(rng, pubs[k], p_zero);
        records[k].pct_not_cited = 100.0 * static_cast<double>(uncited) / static_cast<double>(pubs[k]);
    }

    for (auto& r : records) {
        if (unit(rng) < cfg.missing_metric_prob) continue;
        r.snip = std::exp(snip_base + 0.1 * std_normal(rng));
        r.sjr = std::exp(sjr_base + 0.1 * std_normal(rng));
    }

    char id[32];
    std::snprintf(id, sizeof id, "SYN-%06d", index);
    return {id, std::move(records)};
}

}  // namespace detail

/// Draws a synthetic dataset. Deterministic for a fixed (config, seed); each
/// journal uses its own derived random stream.
[[nodiscard]] inline Dataset generate_synthetic(const GeneratorConfig& config, std::uint64_t seed) {
    config.validate();
    std::vector<JournalHistory> journals;
    journals.reserve(static_cast<std::size_t>(config.n_journals));
    for (int j = 0; j < config.n_journals; ++j) journals.push_back(detail::generate_journal(config, seed, j));
    return Dataset(std::move(journals));
}

}  // namespace citecast
