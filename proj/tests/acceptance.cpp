// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Tolerances and time limits are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "citecast/citecast.hpp"
#include "gradient_check.hpp"
#include "test_util.hpp"

using namespace citecast;
namespace fs = std::filesystem;

namespace {

constexpr double kCiteScoreRelTol = 1e-12;
constexpr double kCiteScoreSeconds = 5.0;
constexpr double kBaselineRelTol = 1e-12;
constexpr double kBaselineSeconds = 5.0;
constexpr int kGradInstances = 50;
constexpr double kGradSeconds = 60.0;
constexpr double kReductionTol = 0.05;
constexpr double kPluginTol = 1e-9;
constexpr double kExperimentSeconds = 15.0 * 60.0;
constexpr double kRoundTripTol = 1e-9;
constexpr double kSkewReduction = 0.5;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// 1 -------------------------------------------------------------------------

Outcome citescore_formula() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> first(1990, 2015), span(3, 20);
    std::uniform_int_distribution<Count> max_cites(0, 5000);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int a = first(rng);
        const auto h = testing::random_history(rng, "j" + std::to_string(t), a, a + span(rng), max_cites(rng));
        for (int x = h.first_year() + 3; x <= h.last_year(); ++x)
            worst = std::max(worst, rel_diff(compute_citescore(h, x), testing::citescore_oracle(h, x)));
    }
    o.check(worst <= kCiteScoreRelTol, "max relative error " + fmt("%.3g", worst));

    std::vector<AnnualRecord> recs;
    for (int y = 2017; y <= 2020; ++y) {
        AnnualRecord r;
        r.year = y;
        r.publications = 10;
        recs.push_back(r);
    }
    recs.back().citations_by_pub_year = {{2017, 20}, {2018, 20}, {2019, 20}, {2020, 20}};
    o.check(compute_citescore(JournalHistory("j", recs), 2020) == 2.0, "80 citations over 40 documents is not 2.0");

    const double secs = seconds_since(t0);
    o.check(secs < kCiteScoreSeconds, "took " + fmt("%.2f", secs) + " s");
    if (o.pass) o.detail = "1000 histories, max rel err " + fmt("%.2g", worst) + ", " + fmt("%.2f", secs) + " s";
    return o;
}

// 2 -------------------------------------------------------------------------

Outcome baseline_oracle() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> len(5, 21);
    std::uniform_real_distribution<double> val(0.0, 1e5);
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> s(static_cast<std::size_t>(len(rng)));
        for (auto& v : s) v = val(rng);
        const std::size_t n = s.size();
        const double v1 = s[n - 1], v2 = s[n - 2], v3 = s[n - 3], v4 = s[n - 4], v5 = s[n - 5];
        const double persistence = v1;
        const double delta = v1 + (v1 - v2);
        const double weighted = v1 + 0.4 * (v1 - v2) + 0.3 * (v2 - v3) + 0.2 * (v3 - v4) + 0.1 * (v4 - v5);
        o.check(persistence_predict(s) == persistence, "persistence differs");
        worst = std::max(worst, rel_diff(delta_predict(s), delta));
        worst = std::max(worst, rel_diff(weighted_delta_predict(s), weighted));
    }
    o.check(worst <= kBaselineRelTol, "max relative error " + fmt("%.3g", worst));

    std::uniform_int_distribution<int> ints(-100000, 100000);
    for (int t = 0; t < 1000; ++t) {
        const double c = val(rng);
        const std::vector<double> flat(static_cast<std::size_t>(len(rng)), c);
        o.check(persistence_predict(flat) == c && delta_predict(flat) == c && weighted_delta_predict(flat) == c,
                "constant series not returned exactly");
        const double a = ints(rng), b = ints(rng);
        std::vector<double> line;
        for (int i = 0; i < 10; ++i) line.push_back(a + b * i);
        o.check(delta_predict(line) == a + b * 10 && weighted_delta_predict(line) == a + b * 10,
                "linear series not extrapolated exactly");
    }

    const double secs = seconds_since(t0);
    o.check(secs < kBaselineSeconds, "took " + fmt("%.2f", secs) + " s");
    if (o.pass) o.detail = "10000 series, max rel err " + fmt("%.2g", worst) + ", " + fmt("%.2f", secs) + " s";
    return o;
}

// 3 -------------------------------------------------------------------------

Outcome gradient_checks() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(303);
    std::string worst_list;
    const std::pair<testing::GradNet, const char*> nets[] = {
        {testing::GradNet::Mlp, "mlp"}, {testing::GradNet::Rnn, "rnn"}, {testing::GradNet::Lstm, "lstm"}};
    for (const auto& [which, name] : nets) {
        double worst = 0.0;
        for (int t = 0; t < kGradInstances; ++t) worst = std::max(worst, testing::random_gradient_check(which, rng));
        o.check(worst < testing::kGradRelTol, std::string(name) + " max rel err " + fmt("%.3g", worst));
        worst_list += std::string(worst_list.empty() ? "" : ", ") + name + " " + fmt("%.2g", worst);
    }
    const double secs = seconds_since(t0);
    o.check(secs < kGradSeconds, "took " + fmt("%.1f", secs) + " s");
    if (o.pass) o.detail = "50 instances each; " + worst_list + "; " + fmt("%.1f", secs) + " s";
    return o;
}

// 4 -------------------------------------------------------------------------

Outcome grid_counts() {
    Outcome o;
    const ModelFamily families[] = {ModelFamily::LinearRegression, ModelFamily::DecisionTree, ModelFamily::RandomForest,
                                    ModelFamily::Knn, ModelFamily::Mlp, ModelFamily::Rnn, ModelFamily::Lstm};
    const std::size_t citations[] = {12, 180, 540, 48, 108, 72, 72};
    const std::size_t citescore[] = {54, 810, 2430, 216, 486, 324, 324};
    auto count = [](const std::vector<FeatureConfig>& configs, ModelFamily f) {
        GridSpec spec;
        spec.feature_configs = configs;
        spec.windows.assign(std::begin(kWindowLengths), std::end(kWindowLengths));
        spec.models = model_grid(f);
        return enumerate_grid(spec).size();
    };
    std::string got_a, got_b;
    for (std::size_t k = 0; k < 7; ++k) {
        const auto a = count(citations_task_configs(), families[k]);
        const auto b = count(citescore_task_configs(), families[k]);
        got_a += (k ? "/" : "") + std::to_string(a);
        got_b += (k ? "/" : "") + std::to_string(b);
        o.check(a == citations[k], std::string(family_name(families[k])) + " citations " + std::to_string(a));
        o.check(b == citescore[k], std::string(family_name(families[k])) + " citescore " + std::to_string(b));
    }
    if (o.pass) o.detail = "citations " + got_a + ", citescore " + got_b;
    return o;
}

// 5 -------------------------------------------------------------------------

Outcome error_reduction_arithmetic() {
    Outcome o;
    struct Case {
        const char* what;
        double model, baseline, expected;
    };
    const Case cases[] = {{"citations MAE", 246.787, 426.141, 42.1},
                          {"citations MAPE", 9.51, 12.53, 24.1},
                          {"citescore MAE", 0.215, 0.279, 22.9},
                          {"citescore MAPE", 9.04, 11.07, 18.3}};
    std::string got;
    for (const auto& c : cases) {
        const double r = reduction_pct(c.model, c.baseline);
        o.check(std::abs(r - c.expected) <= kReductionTol, std::string(c.what) + " " + fmt("%.3f", r));
        got += std::string(got.empty() ? "" : ", ") + c.what + " " + fmt("%.2f%%", r);
    }
    if (o.pass) o.detail = got;
    return o;
}

// 6 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome end_to_end() {
    Outcome o;
    const fs::path config_path = fs::path(CITECAST_SOURCE_DIR) / "configs" / "citations_lstm.json";
    const json raw = read_json_file(config_path.string());
    auto cfg = experiment_config_from_json(raw, config_path.parent_path());
    if (!raw.contains("jobs")) cfg.jobs = default_jobs();

    const fs::path root = fs::temp_directory_path() / "citecast_acceptance";
    std::vector<double> secs;
    for (const char* run : {"a", "b"}) {
        const auto dir = root / run;
        fs::remove_all(dir);
        const auto t0 = std::chrono::steady_clock::now();
        Experiment exp(cfg);
        ArtifactWriter writer(dir);
        (void)exp.run(writer, Experiment::Stage::Evaluate);
        secs.push_back(seconds_since(t0));
    }

    auto mape = [&](const std::string& label) {
        return read_json_file((root / "a" / "metrics" / (label + ".json")).string()).at("metrics").at("mape").get<double>();
    };
    const double persistence = mape("persistence"), lstm = mape("lstm"), lr = mape("linear_regression");
    o.check(lstm < persistence, "LSTM MAPE " + fmt("%.3f", lstm) + " >= persistence " + fmt("%.3f", persistence));
    o.check(lr < persistence, "LR MAPE " + fmt("%.3f", lr) + " >= persistence " + fmt("%.3f", persistence));

    const auto data = generate_synthetic(*cfg.synth, cfg.synth_seed);
    std::size_t checked = 0;
    const double plugin = testing::max_plugin_error(data.journals(), &checked);
    o.check(checked > 0 && plugin < kPluginTol, "plug-in error " + fmt("%.3g", plugin));

    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), root / "a");
        const auto top = rel.begin()->string();
        const bool report = top == "metrics" || top == "buckets" || rel == "summary.json" || rel == "error_reduction.json";
        if (!report) continue;
        ++compared;
        if (slurp(entry.path()) != slurp(root / "b" / rel)) o.check(false, rel.string() + " differs between runs");
    }
    o.check(compared > 0, "no metric reports found");

    const double worst = std::max(secs[0], secs[1]);
    o.check(worst < kExperimentSeconds, "a run took " + fmt("%.0f", worst) + " s");
    if (o.pass)
        o.detail = std::to_string(data.size()) + " journals; MAPE lstm " + fmt("%.2f", lstm) + ", lr " + fmt("%.2f", lr) +
                   ", persistence " + fmt("%.2f", persistence) + "; plug-in err " + fmt("%.2g", plugin) + " over " +
                   std::to_string(checked) + "; " + std::to_string(compared) + " reports identical; runs " +
                   fmt("%.0f", secs[0]) + " s and " + fmt("%.0f", secs[1]) + " s";
    return o;
}

// 7 -------------------------------------------------------------------------

double skewness(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double m2 = 0, m3 = 0;
    for (double x : v) {
        m2 += (x - m) * (x - m);
        m3 += (x - m) * (x - m) * (x - m);
    }
    m2 /= static_cast<double>(v.size());
    m3 /= static_cast<double>(v.size());
    return m3 / std::pow(m2, 1.5);
}

Outcome pipeline_invariants() {
    Outcome o;
    GeneratorConfig gc;
    gc.n_journals = 500;
    const auto d = generate_synthetic(gc, 7);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto [train, test] = split_dataset(d, 0.9, seed);
        std::set<std::string> ids;
        for (const auto& h : train.journals()) ids.insert(h.journal_id());
        for (const auto& h : test.journals())
            o.check(ids.insert(h.journal_id()).second, "journal " + h.journal_id() + " on both sides");
        o.check(train.size() == 450 && test.size() == 50 && ids.size() == d.size(), "split sizes");
    }

    for (std::size_t n : {10u, 11u, 99u, 100u, 101u, 1234u})
        for (int k : {2, 3, 5, 10}) {
            const auto folds = kfold_split(n, k, n * 31 + static_cast<std::size_t>(k));
            std::size_t lo = n, hi = 0, total = 0;
            std::set<std::size_t> seen;
            for (const auto& f : folds) {
                lo = std::min(lo, f.size());
                hi = std::max(hi, f.size());
                total += f.size();
                seen.insert(f.begin(), f.end());
            }
            o.check(hi - lo <= 1 && total == n && seen.size() == n,
                    "kfold n=" + std::to_string(n) + " k=" + std::to_string(k));
        }

    std::mt19937_64 rng(707);
    for (int years = 1; years <= 21; ++years) {
        const auto h = testing::random_history(rng, "j", 2000, 2000 + years - 1);
        for (const auto& cfg : matrix_feature_configs())
            for (int w : kWindowLengths) {
                const int expected = std::max(0, years - std::max(w + cfg.input_lookback(), info(cfg.target).lookback));
                o.check(static_cast<int>(journal_samples(h, cfg, w).size()) == expected,
                        "sample count " + cfg.name + " years=" + std::to_string(years) + " w=" + std::to_string(w));
            }
    }

    std::lognormal_distribution<double> ln(4.0, 1.5);
    std::vector<double> v(5000);
    for (auto& x : v) x = ln(rng);
    const auto t = ColumnTransform::fit_power(v);
    std::vector<double> out;
    double round_trip = 0.0;
    for (double x : v) {
        out.push_back(t.apply(x));
        round_trip = std::max(round_trip, std::abs(t.invert(out.back()) - x) / std::abs(x));
    }
    o.check(round_trip < kRoundTripTol, "power round trip " + fmt("%.3g", round_trip));
    const double before = std::abs(skewness(v)), after = std::abs(skewness(out));
    const double reduction = 1.0 - after / before;
    o.check(reduction >= kSkewReduction, "skew reduction " + fmt("%.3f", reduction));
    if (o.pass)
        o.detail = "round trip " + fmt("%.2g", round_trip) + ", skew " + fmt("%.2f", before) + " -> " + fmt("%.3f", after);
    return o;
}

// 8 -------------------------------------------------------------------------

Outcome metric_suite() {
    Outcome o;
    using Vec = std::vector<double>;
    const auto hand = compute_metrics(Vec{110, 180}, Vec{100, 200});
    o.check(hand.mae == 15.0 && hand.mape && *hand.mape == 10.0 && hand.r2 && *hand.r2 == 0.9,
            "hand case MAE/MAPE/R2 " + fmt("%.17g", hand.mae));
    const Vec t{3, 1, 4, 1, 5, 9, 2, 6};
    const auto perfect = compute_metrics(t, t);
    o.check(perfect.mae == 0.0 && *perfect.mape == 0.0 && *perfect.r2 == 1.0, "perfect predictions");
    const Vec u{2, 4, 6, 8};
    const auto mean = compute_metrics(Vec(4, 5.0), u);
    o.check(mean.r2 && *mean.r2 == 0.0, "mean predictor R2");
    if (o.pass) o.detail = "MAE 15, MAPE 10%, R2 0.9; R2 1 perfect; R2 0 mean";
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"citescore formula", citescore_formula},
        {"baseline oracles", baseline_oracle},
        {"gradient checks", gradient_checks},
        {"grid enumeration counts", grid_counts},
        {"error reduction arithmetic", error_reduction_arithmetic},
        {"end-to-end synthetic experiment", end_to_end},
        {"pipeline invariants", pipeline_invariants},
        {"metric suite", metric_suite},
    };
    int failed = 0, index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
