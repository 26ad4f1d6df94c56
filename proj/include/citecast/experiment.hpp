#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "citecast/baselines.hpp"
#include "citecast/bundle.hpp"
#include "citecast/citescore_predictor.hpp"
#include "citecast/evaluation.hpp"
#include "citecast/fitted.hpp"
#include "citecast/grid_search.hpp"
#include "citecast/hash.hpp"
#include "citecast/io.hpp"
#include "citecast/synthetic.hpp"

namespace citecast {

inline constexpr const char* kToolVersion = "1.0.0";

enum class Task { Citations, CiteScore };

[[nodiscard]] inline std::string task_name(Task t) { return t == Task::Citations ? "citations" : "citescore"; }

[[nodiscard]] inline Task task_from_name(const std::string& s) {
    if (s == "citations") return Task::Citations;
    if (s == "citescore") return Task::CiteScore;
    throw ConfigError("unknown task '" + s + "' (expected citations or citescore)");
}

/// Quantity whose next-year value is evaluated (and extrapolated by baselines).
[[nodiscard]] inline FeatureId task_target(Task t) {
    return t == Task::Citations ? FeatureId::TargetCitations : FeatureId::TargetCiteScore;
}

struct BucketScheme {
    std::string name;
    std::vector<double> edges;
};

[[nodiscard]] inline std::vector<double> concat_edges(std::vector<double> a, const std::vector<double>& b) {
    for (std::size_t i = 1; i < b.size(); ++i) a.push_back(b[i]);
    return a;
}

/// Citations: 0-1,000 in 10, 0-50,000 in 5, and 10 + 5 combined.
/// CiteScore: 0-5 in 10, 0-25 in 5, and 10 + 4 combined.
[[nodiscard]] inline std::vector<BucketScheme> default_bucket_schemes(Task t) {
    if (t == Task::Citations)
        return {{"small", uniform_edges(0, 1000, 10)},
                {"large", uniform_edges(0, 50000, 5)},
                {"combined", concat_edges(uniform_edges(0, 1000, 10), uniform_edges(1000, 50000, 5))}};
    return {{"small", uniform_edges(0, 5, 10)},
            {"large", uniform_edges(0, 25, 5)},
            {"combined", concat_edges(uniform_edges(0, 5, 10), uniform_edges(5, 25, 4))}};
}

// ---------------------------------------------------------------------------
// Configuration

struct ComponentSpec {
    std::string features;
    int window_len = 0;
    std::optional<int> epochs;
};

struct ModelEntry {
    std::string label;
    ModelConfig model;
    CiteScoreStrategyKind strategy = CiteScoreStrategyKind::SumWindow;
    std::vector<ComponentSpec> components;
};

struct GridOptions {
    std::vector<ModelConfig> models;
    std::vector<std::string> feature_configs;
    std::vector<int> windows;
    int folds = 10;
    std::optional<int> max_epochs = 2000;
    bool journal_folds = false;
    CiteScoreStrategyKind strategy = CiteScoreStrategyKind::SumWindow;
};

struct ExperimentConfig {
    Task task = Task::Citations;
    std::optional<std::string> data_path;
    std::optional<GeneratorConfig> synth;
    std::uint64_t synth_seed = 0;
    bool allow_drop = false;
    double train_fraction = 0.9;
    std::uint64_t split_seed = 0;
    /// Base seed: grid folds use it directly, final run r uses seed + r.
    std::uint64_t seed = 0;
    std::vector<ModelEntry> models;
    std::optional<GridOptions> grid;
    std::vector<BaselineKind> baselines{BaselineKind::Persistence, BaselineKind::Delta, BaselineKind::WeightedDelta};
    DeltaVariant delta_variant = DeltaVariant::Difference;
    int runs = 10;
    std::vector<BucketScheme> buckets;
    int jobs = 1;
    json source;
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "'");
    }
}

inline std::vector<ComponentSpec> components_from_json(const json& e) {
    std::vector<ComponentSpec> out;
    auto one = [](const json& c) {
        ComponentSpec s;
        s.features = get_or<std::string>(c, "features", "");
        s.window_len = get_or<int>(c, "window", 0);
        if (c.contains("epochs")) s.epochs = get_or<int>(c, "epochs", 0);
        if (s.features.empty() || s.window_len < 1) throw ConfigError("model component needs 'features' and 'window' >= 1");
        (void)feature_config(s.features);
        if (s.epochs && *s.epochs < 1) throw ConfigError("'epochs' must be >= 1");
        return s;
    };
    if (e.contains("components")) {
        for (const auto& c : e.at("components")) out.push_back(one(c));
    } else {
        out.push_back(one(e));
    }
    return out;
}

}  // namespace detail

/// Parses an experiment config. Relative data paths resolve against `base_dir`.
[[nodiscard]] inline ExperimentConfig experiment_config_from_json(const json& j,
                                                                  const std::filesystem::path& base_dir = {}) {
    using detail::get_or;
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    ExperimentConfig c;
    c.source = j;
    c.task = task_from_name(get_or<std::string>(j, "task", "citations"));
    if (!j.contains("seed")) throw ConfigError("experiment config needs a 'seed'");
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.jobs = get_or<int>(j, "jobs", 1);

    if (!j.contains("data")) throw ConfigError("experiment config needs a 'data' section");
    const json& data = j.at("data");
    const bool has_path = data.contains("path"), has_synth = data.contains("synth");
    if (has_path == has_synth) throw ConfigError("'data' needs exactly one of 'path' or 'synth'");
    if (has_path) {
        std::filesystem::path p = get_or<std::string>(data, "path", "");
        c.data_path = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
    } else {
        c.synth = generator_config_from_json(data.at("synth"));
        c.synth_seed = get_or<std::uint64_t>(data.at("synth"), "seed", c.seed);
    }
    c.allow_drop = get_or<bool>(data, "allow_drop", false);

    if (j.contains("split")) {
        c.train_fraction = get_or<double>(j.at("split"), "train_fraction", 0.9);
        c.split_seed = get_or<std::uint64_t>(j.at("split"), "seed", c.seed);
    } else {
        c.split_seed = c.seed;
    }

    if (j.contains("models")) {
        std::set<std::string> labels;
        for (const auto& e : j.at("models")) {
            ModelEntry m;
            if (!e.contains("model")) throw ConfigError("each model entry needs a 'model'");
            m.model = model_config_from_json(e.at("model"));
            m.label = get_or<std::string>(e, "label", std::string(family_name(family_of(m.model))));
            m.strategy = strategy_from_name(get_or<std::string>(e, "strategy", "sum_window"));
            m.components = detail::components_from_json(e);
            if (c.task == Task::Citations && m.components.size() != 1)
                throw ConfigError("citations models take exactly one component");
            if (c.task == Task::CiteScore) {
                const std::size_t want = m.strategy == CiteScoreStrategyKind::PerYear ? 4 : 1;
                if (m.components.size() != want)
                    throw ConfigError("strategy " + std::string(strategy_name(m.strategy)) + " takes " +
                                      std::to_string(want) + " component(s)");
            }
            if (!labels.insert(m.label).second) throw ConfigError("duplicate model label '" + m.label + "'");
            c.models.push_back(std::move(m));
        }
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        GridOptions o;
        if (g.contains("models"))
            for (const auto& m : g.at("models")) o.models.push_back(model_config_from_json(m));
        if (g.contains("families"))
            for (const auto& f : g.at("families")) {
                auto grid = model_grid(family_from_name(f.get<std::string>()));
                o.models.insert(o.models.end(), grid.begin(), grid.end());
            }
        if (o.models.empty()) throw ConfigError("grid needs 'families' or 'models'");
        if (g.contains("feature_configs")) {
            o.feature_configs = g.at("feature_configs").get<std::vector<std::string>>();
        } else {
            for (const auto& fc : c.task == Task::Citations ? citations_task_configs() : citescore_task_configs())
                o.feature_configs.push_back(fc.name);
        }
        for (const auto& name : o.feature_configs) (void)feature_config(name);
        o.windows = get_or<std::vector<int>>(g, "windows", std::vector<int>(kWindowLengths.begin(), kWindowLengths.end()));
        o.folds = get_or<int>(g, "folds", 10);
        if (g.contains("max_epochs")) o.max_epochs = get_or<int>(g, "max_epochs", 2000);
        o.journal_folds = get_or<bool>(g, "journal_folds", false);
        o.strategy = strategy_from_name(get_or<std::string>(g, "strategy", "sum_window"));
        c.grid = std::move(o);
    }

    if (j.contains("evaluation")) {
        const json& ev = j.at("evaluation");
        c.runs = get_or<int>(ev, "runs", 10);
        if (ev.contains("baselines")) {
            c.baselines.clear();
            for (const auto& b : ev.at("baselines")) c.baselines.push_back(baseline_from_name(b.get<std::string>()));
        }
        const auto variant = get_or<std::string>(ev, "delta_variant", "difference");
        if (variant == "difference") c.delta_variant = DeltaVariant::Difference;
        else if (variant == "printed_sum") c.delta_variant = DeltaVariant::PrintedSum;
        else throw ConfigError("delta_variant must be 'difference' or 'printed_sum'");
        if (ev.contains("buckets")) {
            for (const auto& b : ev.at("buckets")) {
                BucketScheme s;
                s.name = get_or<std::string>(b, "name", "");
                if (s.name.empty()) throw ConfigError("bucket scheme needs a 'name'");
                if (b.contains("edges")) s.edges = b.at("edges").get<std::vector<double>>();
                else s.edges = uniform_edges(get_or<double>(b, "lo", 0), get_or<double>(b, "hi", 0), get_or<int>(b, "count", 0));
                c.buckets.push_back(std::move(s));
            }
        }
    }
    if (c.buckets.empty()) c.buckets = default_bucket_schemes(c.task);
    if (c.runs < 1) throw ConfigError("evaluation.runs must be >= 1");
    if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
    if (c.models.empty() && !c.grid && c.baselines.empty()) throw ConfigError("nothing to evaluate");
    return c;
}

[[nodiscard]] inline ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_json(read_json_file(path), std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Data loading

struct IngestSummary {
    std::size_t journals = 0;
    std::size_t records = 0;
    std::size_t violations = 0;
    std::size_t dropped = 0;
    std::vector<std::string> messages;  // "<journal>: <violation>"
};

/// Validates every journal. Any violation rejects the data unless
/// `allow_drop`, which removes the offending journals instead.
[[nodiscard]] inline Dataset validate_journals(std::vector<JournalHistory> journals, bool allow_drop,
                                               IngestSummary& summary) {
    std::vector<JournalHistory> kept;
    for (auto& h : journals) {
        ++summary.journals;
        summary.records += h.size();
        const auto report = validate_history(h);
        if (report.ok()) {
            kept.push_back(std::move(h));
            continue;
        }
        summary.violations += report.violations.size();
        for (const auto& v : report.violations) summary.messages.push_back(h.journal_id() + ": " + v.message);
        ++summary.dropped;
    }
    if (summary.violations > 0 && !allow_drop) {
        std::string msg = std::to_string(summary.violations) + " validation violation(s) in " +
                          std::to_string(summary.dropped) + " journal(s); first: " + summary.messages.front();
        throw DataError(msg);
    }
    if (!allow_drop) summary.dropped = 0;
    return Dataset(std::move(kept));
}

using Logger = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Outputs

[[nodiscard]] inline json to_json(const MetricSet& m) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"mae", m.mae},       {"medae", m.medae},       {"mape", opt(m.mape)},
            {"medape", opt(m.medape)}, {"r2", opt(m.r2)},     {"n_samples", m.n_samples},
            {"n_excluded_from_mape", m.n_excluded_from_mape}};
}

/// Writes files under an output directory and remembers their hashes.
class ArtifactWriter {
public:
    struct Artifact {
        std::string path;
        std::string sha256;
        std::size_t bytes = 0;
    };

    explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
    }

    void write(const std::string& rel, const std::string& content) {
        const auto p = root_ / rel;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) throw DataError("cannot write '" + p.string() + "'");
        out << content;
        if (!out) throw DataError("failed writing '" + p.string() + "'");
        artifacts_.push_back({rel, sha256_hex(content), content.size()});
    }

    void write_json(const std::string& rel, const json& j) { write(rel, j.dump(2) + "\n"); }

    [[nodiscard]] const std::vector<Artifact>& artifacts() const noexcept { return artifacts_; }
    [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }

    [[nodiscard]] json artifacts_json() const {
        json a = json::array();
        for (const auto& x : artifacts_) a.push_back({{"path", x.path}, {"sha256", x.sha256}, {"bytes", x.bytes}});
        return a;
    }

private:
    std::filesystem::path root_;
    std::vector<Artifact> artifacts_;
};

[[nodiscard]] inline std::string dataset_ndjson(const Dataset& d) {
    std::ostringstream out;
    write_journals(out, d.journals());
    return out.str();
}

[[nodiscard]] inline std::string journal_ids(const Dataset& d) {
    std::string s;
    for (const auto& h : d.journals()) s += h.journal_id() + "\n";
    return s;
}

// ---------------------------------------------------------------------------
// Resolved entries

struct ResolvedComponent {
    FeatureConfig features;
    int window_len = 0;
    int epochs = 0;  // fixed epochs for iterative models, 0 otherwise
};

struct ResolvedEntry {
    std::string label;
    ModelConfig model;
    CiteScoreStrategyKind strategy = CiteScoreStrategyKind::SumWindow;
    std::vector<ResolvedComponent> components;
    std::string origin;  // "pinned" or "grid"
    /// Per-component models when they differ (grid-selected per-year entries).
    std::vector<ModelConfig> component_models = {};
};

[[nodiscard]] inline json to_json(const ResolvedEntry& e, Task task) {
    json comps = json::array();
    for (const auto& c : e.components)
        comps.push_back({{"features", c.features.name}, {"window", c.window_len}, {"epochs", c.epochs}});
    json j{{"label", e.label}, {"model", model_config_to_json(e.model)}, {"components", comps}, {"origin", e.origin}};
    if (!e.component_models.empty()) {
        json ms = json::array();
        for (const auto& m : e.component_models) ms.push_back(model_config_to_json(m));
        j["component_models"] = ms;
    }
    if (task == Task::CiteScore) j["strategy"] = std::string(strategy_name(e.strategy));
    return j;
}

/// Training samples per (feature config, window), built on first use.
class SampleCache {
public:
    explicit SampleCache(const Dataset& d) : data_(&d) {}
    const std::vector<Sample>& get(const FeatureConfig& fc, int window) {
        auto key = std::make_pair(fc.name, window);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, enumerate_samples(*data_, fc, window)).first;
        return it->second;
    }

private:
    const Dataset* data_;
    std::map<std::pair<std::string, int>, std::vector<Sample>> cache_;
};

/// Epoch count for a final run: early-stopped training on all training
/// samples with the base seed, keeping the best epoch.
[[nodiscard]] inline int derive_epochs(const std::vector<Sample>& train, const FeatureConfig& fc, int window,
                                       const ModelConfig& mc, std::uint64_t seed, std::optional<int> max_epochs) {
    auto opts = TrainOptions::selection(family_of(mc), seed);
    opts.max_epochs = max_epochs;
    const auto fitted = fit_model(train, fc, window, mc, opts);
    return std::max(1, fitted.model.summary().epochs_used);
}

// ---------------------------------------------------------------------------
// Experiment

struct ExperimentOutcome {
    json summary;
    json manifest;
    std::vector<ResolvedEntry> entries;
    std::optional<GridSearchResult> grid;
};

class Experiment {
public:
    Experiment(ExperimentConfig config, Logger log = {}) : cfg_(std::move(config)), log_(std::move(log)) {}

    [[nodiscard]] const ExperimentConfig& config() const noexcept { return cfg_; }

    /// Loads or synthesizes the dataset and validates it.
    [[nodiscard]] Dataset load_dataset() {
        const auto t0 = clock::now();
        std::vector<JournalHistory> journals;
        if (cfg_.data_path) {
            note("reading " + *cfg_.data_path);
            journals = read_journals_file(*cfg_.data_path);
        } else {
            note("synthesizing " + std::to_string(cfg_.synth->n_journals) + " journals");
            const auto d = generate_synthetic(*cfg_.synth, cfg_.synth_seed);
            journals.assign(d.journals().begin(), d.journals().end());
        }
        IngestSummary summary;
        Dataset d = validate_journals(std::move(journals), cfg_.allow_drop, summary);
        if (summary.dropped > 0) note("dropped " + std::to_string(summary.dropped) + " invalid journal(s)");
        ingest_ = summary;
        timing("load_dataset", t0);
        return d;
    }

    [[nodiscard]] std::pair<Dataset, Dataset> split(const Dataset& d) {
        return split_dataset(d, cfg_.train_fraction, cfg_.split_seed);
    }

    /// Runs the configured grid search on the training journals.
    [[nodiscard]] GridSearchResult run_grid(const Dataset& train) {
        const auto t0 = clock::now();
        const auto& g = *cfg_.grid;
        GridSpec spec;
        for (const auto& n : g.feature_configs) spec.feature_configs.push_back(feature_config(n));
        spec.windows = g.windows;
        spec.models = g.models;
        spec.folds = g.folds;
        spec.seed = cfg_.seed;
        spec.journal_folds = g.journal_folds;
        spec.max_epochs = g.max_epochs;
        spec.jobs = cfg_.jobs;
        note("grid search over " + std::to_string(enumerate_grid(spec).size()) + " configurations");
        auto r = grid_search(train, spec, log_);
        timing("grid_search", t0);
        return r;
    }

    [[nodiscard]] static json grid_to_json(const GridSearchResult& r, const GridOptions& g, Task task) {
        json entries = json::array();
        for (const auto& e : r.entries) {
            json x{{"tuple", e.tuple_index},          {"features", e.feature_config}, {"window", e.window_len},
                   {"model", model_config_to_json(e.model)}, {"name", e.name()},        {"failed", e.failed}};
            x["cv_mape"] = e.cv_mape ? json(*e.cv_mape) : json(nullptr);
            x["fold_mapes"] = e.fold_mapes;
            x["mean_epochs"] = e.mean_epochs ? json(*e.mean_epochs) : json(nullptr);
            x["parameter_count"] = e.parameter_count;
            if (e.failed) x["failure"] = e.failure;
            entries.push_back(std::move(x));
        }
        json ranking = json::array();
        for (auto i : r.ranking) ranking.push_back(i);
        return {{"task", task_name(task)},
                {"tuple_count", r.entries.size()},
                {"expected_tuple_count", g.feature_configs.size() * g.windows.size() * g.models.size()},
                {"folds", g.folds},
                {"ranking", ranking},
                {"entries", entries}};
    }

    /// Pinned entries plus, for each family in the grid, its selected configuration.
    [[nodiscard]] std::vector<ResolvedEntry> resolve(const Dataset& train, const GridSearchResult* grid) {
        const auto t0 = clock::now();
        SampleCache cache(train);
        std::vector<ResolvedEntry> out;
        std::set<std::string> labels;
        const std::optional<int> cap = cfg_.grid ? cfg_.grid->max_epochs : std::optional<int>(2000);
        for (const auto& m : cfg_.models) {
            ResolvedEntry e{m.label, m.model, m.strategy, {}, "pinned"};
            for (const auto& c : m.components) {
                ResolvedComponent rc{feature_config(c.features), c.window_len, 0};
                if (cfg_.task == Task::CiteScore) check_component_target(m.strategy, rc.features, e.components.size());
                if (is_iterative(family_of(m.model))) {
                    if (c.epochs) {
                        rc.epochs = *c.epochs;
                    } else {
                        rc.epochs = derive_epochs(cache.get(rc.features, rc.window_len), rc.features, rc.window_len,
                                                  m.model, cfg_.seed, cap);
                        note(m.label + ": derived " + std::to_string(rc.epochs) + " epochs for " + rc.features.name);
                    }
                }
                e.components.push_back(std::move(rc));
            }
            labels.insert(e.label);
            out.push_back(std::move(e));
        }
        if (grid) {
            for (auto family : kAllFamilies) {
                auto sel = select_from_grid(*grid, family);
                if (!sel) continue;
                if (labels.count(sel->label)) sel->label += "_grid";
                labels.insert(sel->label);
                out.push_back(std::move(*sel));
            }
        }
        timing("resolve", t0);
        return out;
    }

    enum class Stage { GridSearch, Train, Evaluate };

    /// Pipeline up to `stage`: data, split, optional grid search, then either
    /// one trained bundle per entry (Train) or the final runs and reports
    /// (Evaluate). Every file written is listed in manifest.json.
    ExperimentOutcome run(ArtifactWriter& writer, Stage stage = Stage::Evaluate) {
        const auto t_start = clock::now();
        ExperimentOutcome outcome;
        const Dataset data = load_dataset();
        const auto [train, test] = split(data);
        note("split: " + std::to_string(train.size()) + " train / " + std::to_string(test.size()) + " test journals");
        if (stage == Stage::GridSearch && !cfg_.grid) throw ConfigError("config has no 'grid' section");
        if (cfg_.grid) {
            outcome.grid = run_grid(train);
            writer.write_json("grid_search.json", grid_to_json(*outcome.grid, *cfg_.grid, cfg_.task));
        }
        if (stage != Stage::GridSearch) {
            outcome.entries = resolve(train, outcome.grid ? &*outcome.grid : nullptr);
            if (stage == Stage::Train) {
                const auto t0 = clock::now();
                for (const auto& b : train_bundles(train, outcome.entries))
                    writer.write_json("models/" + b.label + ".json", to_json(b));
                timing("train", t0);
            } else {
                evaluate(train, test, outcome.entries, writer, outcome);
            }
        }

        json entries = json::array();
        for (const auto& e : outcome.entries) entries.push_back(to_json(e, cfg_.task));
        json runs = json::array();
        for (int r = 0; r < cfg_.runs; ++r) runs.push_back(cfg_.seed + static_cast<std::uint64_t>(r));
        timing("total", t_start);
        outcome.manifest = {
            {"tool", "citecast"},
            {"version", kToolVersion},
            {"stage", stage == Stage::GridSearch ? "grid-search" : stage == Stage::Train ? "train" : "evaluate"},
            {"task", task_name(cfg_.task)},
            {"config", cfg_.source},
            {"seeds", {{"base", cfg_.seed}, {"synth", cfg_.synth_seed}, {"split", cfg_.split_seed}, {"runs", runs}}},
            {"dataset",
             {{"journals", data.size()},
              {"records", ingest_.records},
              {"dropped", ingest_.dropped},
              {"sha256", sha256_hex(dataset_ndjson(data))}}},
            {"split",
             {{"train_journals", train.size()},
              {"test_journals", test.size()},
              {"train_ids_sha256", sha256_hex(journal_ids(train))},
              {"test_ids_sha256", sha256_hex(journal_ids(test))}}},
            {"entries", entries},
            {"timings_s", timings_},
            {"artifacts", writer.artifacts_json()},
        };
        if (outcome.grid) {
            outcome.manifest["grid"] = {{"tuple_count", outcome.grid->entries.size()},
                                        {"expected_tuple_count", cfg_.grid->feature_configs.size() *
                                                                     cfg_.grid->windows.size() *
                                                                     cfg_.grid->models.size()}};
        }
        std::ofstream(writer.root() / "manifest.json") << outcome.manifest.dump(2) << "\n";
        return outcome;
    }

    /// Trains one run (base seed) of every entry on the training journals.
    [[nodiscard]] std::vector<PredictorBundle> train_bundles(const Dataset& train,
                                                             const std::vector<ResolvedEntry>& entries) {
        SampleCache cache(train);
        std::vector<PredictorBundle> out;
        for (const auto& e : entries) {
            for (const auto& c : e.components) (void)cache.get(c.features, c.window_len);
            out.push_back(train_bundle(cache, e, cfg_.seed));
        }
        return out;
    }

private:
    using clock = std::chrono::steady_clock;

    struct Key {
        std::size_t journal = 0;
        int year = 0;
        auto operator<=>(const Key&) const = default;
    };

    void note(const std::string& s) const {
        if (log_) log_(s);
    }

    void timing(const std::string& stage, clock::time_point t0) {
        timings_[stage] = std::chrono::duration<double>(clock::now() - t0).count();
    }

    void check_component_target(CiteScoreStrategyKind s, const FeatureConfig& fc, std::size_t index) const {
        FeatureId want = FeatureId::TargetWindow4;
        if (s == CiteScoreStrategyKind::Direct) want = FeatureId::TargetCiteScore;
        if (s == CiteScoreStrategyKind::PerYear) {
            constexpr FeatureId lag[] = {FeatureId::TargetCur, FeatureId::TargetLag1, FeatureId::TargetLag2,
                                         FeatureId::TargetLag3};
            want = lag[index];
        }
        if (fc.target != want)
            throw ConfigError("feature config '" + fc.name + "' predicts " + std::string(symbol(fc.target)) +
                              " but component " + std::to_string(index) + " of strategy " +
                              std::string(strategy_name(s)) + " needs " + std::string(symbol(want)));
    }

    [[nodiscard]] ResolvedComponent component_from_entry(const GridEntry& g) const {
        int epochs = 0;
        if (g.mean_epochs) epochs = std::max(1, static_cast<int>(std::lround(*g.mean_epochs)));
        return {feature_config(g.feature_config), g.window_len, epochs};
    }

    /// Best successful grid entry of `family` whose target is `target`.
    [[nodiscard]] static const GridEntry* best_for(const GridSearchResult& r, ModelFamily family, FeatureId target) {
        for (auto i : r.ranking) {
            const auto& e = r.entries[i];
            if (family_of(e.model) == family && feature_config(e.feature_config).target == target) return &e;
        }
        return nullptr;
    }

    [[nodiscard]] std::optional<ResolvedEntry> select_from_grid(const GridSearchResult& r, ModelFamily family) const {
        ResolvedEntry e;
        e.label = std::string(family_name(family));
        e.origin = "grid";
        if (cfg_.task == Task::Citations) {
            const GridEntry* best = best_for(r, family, FeatureId::TargetCitations);
            if (!best) return std::nullopt;
            e.model = best->model;
            e.components.push_back(component_from_entry(*best));
            return e;
        }
        e.strategy = cfg_.grid->strategy;
        std::vector<FeatureId> targets;
        switch (e.strategy) {
            case CiteScoreStrategyKind::Direct: targets = {FeatureId::TargetCiteScore}; break;
            case CiteScoreStrategyKind::SumWindow: targets = {FeatureId::TargetWindow4}; break;
            case CiteScoreStrategyKind::PerYear:
                targets = {FeatureId::TargetCur, FeatureId::TargetLag1, FeatureId::TargetLag2, FeatureId::TargetLag3};
                break;
        }
        // Each component keeps its own best hyperparameters; the entry's
        // reported model is that of the first component.
        std::vector<ModelConfig> models;
        for (auto t : targets) {
            const GridEntry* best = best_for(r, family, t);
            if (!best) return std::nullopt;
            models.push_back(best->model);
            e.components.push_back(component_from_entry(*best));
        }
        e.model = models.front();
        e.component_models = std::move(models);
        return e;
    }

    PredictorBundle train_bundle(SampleCache& cache, const ResolvedEntry& e, std::uint64_t seed) const {
        PredictorBundle b;
        b.task = task_name(cfg_.task);
        b.label = e.label;
        b.strategy = e.strategy;
        for (std::size_t i = 0; i < e.components.size(); ++i) {
            const auto& c = e.components[i];
            const auto& mc = e.component_models.empty() ? e.model : e.component_models[i];
            b.components.push_back(fit_model(cache.get(c.features, c.window_len), c.features, c.window_len, mc,
                                             TrainOptions::fixed(std::max(1, c.epochs), seed)));
        }
        return b;
    }

    /// Runs needed for an entry: deterministic learners train once.
    [[nodiscard]] int distinct_runs(const ResolvedEntry& e) const {
        const auto f = family_of(e.model);
        const bool stochastic = f == ModelFamily::RandomForest || is_iterative(f);
        return stochastic ? cfg_.runs : 1;
    }

    void evaluate(const Dataset& train, const Dataset& test, const std::vector<ResolvedEntry>& entries,
                  ArtifactWriter& writer, ExperimentOutcome& outcome) {
        const auto t0 = clock::now();
        const FeatureId target = task_target(cfg_.task);
        std::size_t lookback = 1;
        for (auto b : cfg_.baselines) lookback = std::max(lookback, baseline_lookback(b));

        // Candidate keys: ground truth present and enough history for every baseline.
        std::map<Key, std::pair<double, std::vector<double>>> candidates;  // truth, series
        for (std::size_t ji = 0; ji < test.size(); ++ji) {
            const auto& h = test.journals()[ji];
            if (h.empty()) continue;
            for (int y = h.first_year() + 1; y <= h.last_year(); ++y) {
                auto truth = feature_value(h, target, y, y);
                if (!truth) continue;
                auto series = detail::series_history(h, target, y - 1);
                if (series.size() < lookback) continue;
                candidates.emplace(Key{ji, y}, std::make_pair(*truth, std::move(series)));
            }
        }

        // Per entry and key, the raw inputs of each component.
        SampleCache train_cache(train);
        struct EntryInputs {
            std::vector<std::map<Key, Sample>> per_component;
        };
        std::vector<EntryInputs> inputs(entries.size());
        std::set<Key> common;
        for (const auto& [k, _] : candidates) common.insert(k);
        for (std::size_t ei = 0; ei < entries.size(); ++ei) {
            const auto& e = entries[ei];
            for (const auto& c : e.components) {
                std::map<Key, Sample> m;
                for (const auto& k : common) {
                    const auto& h = test.journals()[k.journal];
                    auto s = prediction_input(h.truncated(k.year - 1), c.features, c.window_len);
                    if (s) m.emplace(k, std::move(*s));
                }
                std::set<Key> keep;
                for (const auto& [k, _] : m) keep.insert(k);
                common = std::move(keep);
                inputs[ei].per_component.push_back(std::move(m));
                (void)train_cache.get(c.features, c.window_len);
            }
        }
        if (common.empty()) throw DataError("no test sample is usable by every model and baseline");
        const std::vector<Key> keys(common.begin(), common.end());
        std::vector<double> truth;
        truth.reserve(keys.size());
        for (const auto& k : keys) truth.push_back(candidates.at(k).first);
        note("evaluating on " + std::to_string(keys.size()) + " common test samples");

        json summary_rows = json::array();
        std::map<std::string, MetricSet> overall;

        auto emit = [&](const std::string& label, const std::string& kind, const json& extra,
                        const std::vector<std::vector<double>>& run_preds) {
            std::vector<MetricSet> per_run;
            for (const auto& p : run_preds) per_run.push_back(compute_metrics(p, truth));
            const MetricSet avg = average_metrics(per_run);
            overall[label] = avg;
            json runs = json::array();
            for (const auto& m : per_run) runs.push_back(to_json(m));
            json j{{"task", task_name(cfg_.task)}, {"label", label},       {"kind", kind},
                   {"runs", run_preds.size()},      {"metrics", to_json(avg)}, {"per_run", runs}};
            j.update(extra);
            writer.write_json("metrics/" + label + ".json", j);
            json row = to_json(avg);
            row["label"] = label;
            row["kind"] = kind;
            summary_rows.push_back(row);
            for (const auto& scheme : cfg_.buckets) write_buckets(writer, scheme, label, run_preds, truth);
        };

        for (auto b : cfg_.baselines) {
            std::vector<double> p;
            p.reserve(keys.size());
            for (const auto& k : keys) p.push_back(baseline_predict(b, candidates.at(k).second, cfg_.delta_variant));
            emit(std::string(baseline_name(b)), "baseline", json::object(), {p});
        }

        // Final runs: (entry, run) work items in fixed slots.
        struct Job {
            std::size_t entry;
            int run;
        };
        std::vector<Job> jobs;
        for (std::size_t ei = 0; ei < entries.size(); ++ei)
            for (int r = 0; r < distinct_runs(entries[ei]); ++r) jobs.push_back({ei, r});
        std::vector<std::vector<double>> job_preds(jobs.size());
        std::vector<std::optional<PredictorBundle>> first_bundles(entries.size());
        parallel_for(jobs.size(), cfg_.jobs, [&](std::size_t ji) {
            const auto& job = jobs[ji];
            const auto& e = entries[job.entry];
            PredictorBundle bundle = train_bundle_cached(train_cache, e, cfg_.seed + static_cast<std::uint64_t>(job.run));
            job_preds[ji] = predict_keys(bundle, inputs[job.entry], keys, test);
            if (job.run == 0) first_bundles[job.entry] = std::move(bundle);
        });

        std::size_t ji = 0;
        for (std::size_t ei = 0; ei < entries.size(); ++ei) {
            const auto& e = entries[ei];
            const int distinct = distinct_runs(e);
            std::vector<std::vector<double>> preds;
            for (int r = 0; r < distinct; ++r) preds.push_back(std::move(job_preds[ji++]));
            // Deterministic learners give identical runs; replicate for reporting.
            while (static_cast<int>(preds.size()) < cfg_.runs) preds.push_back(preds.front());
            emit(e.label, "model", {{"entry", to_json(e, cfg_.task)}}, preds);
            writer.write_json("models/" + e.label + ".json", to_json(*first_bundles[ei]));
        }

        json reductions = json::object();
        for (const auto& e : entries) {
            json per = json::object();
            for (auto b : cfg_.baselines) {
                const auto r = error_reduction(overall.at(e.label), overall.at(std::string(baseline_name(b))));
                per[std::string(baseline_name(b))] = {
                    {"mae_reduction_pct", r.mae_reduction_pct ? json(*r.mae_reduction_pct) : json(nullptr)},
                    {"mape_reduction_pct", r.mape_reduction_pct ? json(*r.mape_reduction_pct) : json(nullptr)}};
            }
            reductions[e.label] = per;
        }
        writer.write_json("error_reduction.json", reductions);

        outcome.summary = {{"task", task_name(cfg_.task)},
                           {"n_test_samples", keys.size()},
                           {"runs", cfg_.runs},
                           {"results", summary_rows}};
        writer.write_json("summary.json", outcome.summary);
        timing("evaluate", t0);
    }

    PredictorBundle train_bundle_cached(SampleCache& cache, const ResolvedEntry& e, std::uint64_t seed) const {
        // The cache is fully populated before the parallel section, so these
        // lookups never insert.
        return train_bundle(cache, e, seed);
    }

    [[nodiscard]] std::vector<double> predict_keys(const PredictorBundle& b, const auto& entry_inputs,
                                                   const std::vector<Key>& keys, const Dataset& test) const {
        // Batch-predict each component on its key inputs.
        std::vector<std::vector<double>> comp(b.components.size());
        for (std::size_t c = 0; c < b.components.size(); ++c) {
            std::vector<Sample> xs;
            xs.reserve(keys.size());
            for (const auto& k : keys) xs.push_back(entry_inputs.per_component[c].at(k));
            comp[c] = b.components[c].predict(std::span<const Sample>(xs));
        }
        std::vector<double> out(keys.size());
        if (cfg_.task == Task::Citations) {
            out = std::move(comp[0]);
            return out;
        }
        for (std::size_t i = 0; i < keys.size(); ++i) {
            std::vector<ComponentPredictor> fixed;
            for (std::size_t c = 0; c < comp.size(); ++c) {
                const double v = comp[c][i];
                fixed.push_back([v](const JournalHistory&) { return v; });
            }
            CiteScoreStrategy s = b.strategy == CiteScoreStrategyKind::PerYear
                                      ? CiteScoreStrategy::per_year({fixed[0], fixed[1], fixed[2], fixed[3]})
                                  : b.strategy == CiteScoreStrategyKind::Direct ? CiteScoreStrategy::direct(fixed[0])
                                                                                : CiteScoreStrategy::sum_window(fixed[0]);
            const auto& h = test.journals()[keys[i].journal];
            out[i] = predict_citescore(h.truncated(keys[i].year - 1), s).citescore;
        }
        return out;
    }

    void write_buckets(ArtifactWriter& writer, const BucketScheme& scheme, const std::string& label,
                       const std::vector<std::vector<double>>& run_preds, const std::vector<double>& truth) const {
        std::vector<BucketReport> reports;
        for (const auto& p : run_preds) reports.push_back(bucketize_errors(p, truth, scheme.edges));
        std::ostringstream csv;
        csv.precision(17);
        csv << "bucket_lo,bucket_hi,n,mae,mape,low_confidence\n";
        const auto& first = reports.front();
        for (std::size_t b = 0; b < first.buckets.size(); ++b) {
            const auto& k = first.buckets[b];
            csv << k.lo << ',' << k.hi << ',' << k.n << ',';
            if (k.n > 0) {
                double mae = 0.0, mape = 0.0;
                bool mape_ok = true;
                for (const auto& r : reports) {
                    mae += r.buckets[b].metrics->mae;
                    if (r.buckets[b].metrics->mape) mape += *r.buckets[b].metrics->mape;
                    else mape_ok = false;
                }
                csv << mae / reports.size() << ',';
                if (mape_ok) csv << mape / reports.size();
            } else {
                csv << ',';
            }
            csv << ',' << (k.low_confidence ? 1 : 0) << '\n';
        }
        writer.write("buckets/" + scheme.name + "_" + label + ".csv", csv.str());
    }

    ExperimentConfig cfg_;
    Logger log_;
    IngestSummary ingest_;
    json timings_ = json::object();
};

}  // namespace citecast
