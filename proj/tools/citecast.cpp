// citecast: command-line front end for ingesting journal data, synthesizing
// datasets, running grid searches, training, evaluating and predicting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "citecast/citecast.hpp"

namespace {

using namespace citecast;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kDivergence = 3 };

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string out_dir = "out";
    bool allow_drop = false;
    bool quiet = false;
    std::string path;   // ingest input
    std::string model;  // predict bundle
    std::string input;  // predict data
};

Logger stderr_logger(const Flags& f) {
    if (f.quiet) return {};
    return [](const std::string& s) { std::cerr << "[citecast] " << s << "\n"; };
}

/// Reads --config and applies flag overrides before parsing.
ExperimentConfig load_config(const Flags& f) {
    if (f.config.empty()) throw ConfigError("--config is required");
    json j = read_json_file(f.config);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (f.seed) j["seed"] = *f.seed;
    if (f.allow_drop && j.contains("data")) j["data"]["allow_drop"] = true;
    auto cfg = experiment_config_from_json(j, std::filesystem::path(f.config).parent_path());
    if (f.jobs) cfg.jobs = *f.jobs;
    else if (!j.contains("jobs")) cfg.jobs = default_jobs();
    return cfg;
}

int cmd_ingest(const Flags& f) {
    std::ifstream in(f.path);
    if (!in) throw DataError("cannot open '" + f.path + "'");
    IngestSummary s;
    Dataset d;
    try {
        d = validate_journals(read_journals(in), f.allow_drop, s);
    } catch (const ParseError&) {
        throw;
    } catch (const DataError&) {
        for (const auto& m : s.messages) std::cerr << "violation: " << m << "\n";
        throw;
    }
    for (const auto& m : s.messages) std::cerr << "dropped: " << m << "\n";
    const json out{{"journals", s.journals},
                   {"records", s.records},
                   {"violations", s.violations},
                   {"dropped_journals", s.dropped},
                   {"kept_journals", d.size()}};
    std::cout << out.dump() << "\n";
    return kOk;
}

int cmd_synth(const Flags& f) {
    GeneratorConfig gc;
    std::uint64_t seed = 0;
    if (!f.config.empty()) {
        const json j = read_json_file(f.config);
        const json& g = j.contains("synth") ? j.at("synth") : j;
        gc = generator_config_from_json(g);
        seed = g.value("seed", j.value("seed", std::uint64_t{0}));
    }
    if (f.seed) seed = *f.seed;
    const Dataset d = generate_synthetic(gc, seed);
    std::filesystem::create_directories(f.out_dir);
    const auto path = (std::filesystem::path(f.out_dir) / "dataset.ndjson").string();
    write_dataset_file(path, d);
    std::size_t records = 0;
    for (const auto& h : d.journals()) records += h.size();
    std::cout << json{{"path", path}, {"journals", d.size()}, {"records", records}, {"seed", seed},
                      {"sha256", sha256_file(path)}}
                     .dump()
              << "\n";
    return kOk;
}

int cmd_pipeline(const Flags& f, Experiment::Stage stage) {
    Experiment exp(load_config(f), stderr_logger(f));
    ArtifactWriter writer(f.out_dir);
    const auto outcome = exp.run(writer, stage);
    if (stage == Experiment::Stage::Evaluate) {
        std::cout << outcome.summary.dump(2) << "\n";
    } else if (stage == Experiment::Stage::GridSearch) {
        json best = json::object();
        for (auto family : kAllFamilies)
            for (auto i : outcome.grid->ranking)
                if (family_of(outcome.grid->entries[i].model) == family) {
                    const auto& e = outcome.grid->entries[i];
                    best[std::string(family_name(family))] = {{"name", e.name()}, {"cv_mape", *e.cv_mape}};
                    break;
                }
        std::cout << json{{"tuple_count", outcome.grid->entries.size()}, {"best", best}}.dump(2) << "\n";
    } else {
        json labels = json::array();
        for (const auto& e : outcome.entries) labels.push_back("models/" + e.label + ".json");
        std::cout << json{{"out_dir", f.out_dir}, {"models", labels}}.dump(2) << "\n";
    }
    return kOk;
}

int cmd_predict(const Flags& f) {
    if (f.model.empty() || f.input.empty()) throw ConfigError("predict needs --model and --input");
    const PredictorBundle bundle = predictor_bundle_from_json(read_json_file(f.model));
    const auto journals = read_journals_file(f.input);
    int status = kOk;
    for (const auto& h : journals) {
        json out{{"journal_id", h.journal_id()}};
        try {
            if (bundle.task == "citations") {
                const auto& m = bundle.components.front();
                out["target_year"] = h.last_year() + 1;
                const double c = m.predict_next(h);
                out["predicted_citations"] = c;
                out["strategy"] = "citations";
                out["components"] = {{"citations", c}};
            } else {
                const auto p = predict_citescore(h, bundle.citescore_strategy());
                out["target_year"] = p.target_year;
                out["predicted_citescore"] = p.citescore;
                out["strategy"] = std::string(strategy_name(p.strategy));
                json comps{{"p_x", p.publications}, {"known_numerator", p.known_numerator}};
                if (p.strategy == CiteScoreStrategyKind::SumWindow) comps["c_x_w4"] = p.predicted_terms.at(0);
                if (p.strategy == CiteScoreStrategyKind::PerYear)
                    for (std::size_t k = 0; k < p.predicted_terms.size(); ++k)
                        comps["c_x_lag" + std::to_string(k)] = p.predicted_terms[k];
                out["components"] = comps;
            }
        } catch (const InsufficientHistoryError& e) {
            out["error"] = e.what();
            status = kData;
        } catch (const UndefinedCiteScoreError& e) {
            out["error"] = e.what();
            status = kData;
        }
        std::cout << out.dump() << "\n";
    }
    return status;
}

int cmd_report(const Flags& f) {
    const auto root = std::filesystem::path(f.out_dir);
    const json manifest = read_json_file((root / "manifest.json").string());
    int status = kOk;
    std::size_t ok = 0;
    for (const auto& a : manifest.at("artifacts")) {
        const auto rel = a.at("path").get<std::string>();
        const auto path = (root / rel).string();
        std::string actual;
        try {
            actual = sha256_file(path);
        } catch (const DataError&) {
            actual = "missing";
        }
        if (actual == a.at("sha256").get<std::string>()) {
            ++ok;
        } else {
            std::cout << "MISMATCH " << rel << "\n";
            status = kData;
        }
    }
    std::cout << "artifacts verified: " << ok << "/" << manifest.at("artifacts").size() << "\n";
    const auto summary_path = root / "summary.json";
    if (std::filesystem::exists(summary_path)) {
        const json s = read_json_file(summary_path.string());
        std::printf("%-28s %-9s %12s %12s %9s %9s %8s\n", "label", "kind", "MAE", "MedAE", "MAPE", "MedAPE", "R2");
        auto num = [](const json& v) { return v.is_null() ? std::string("-") : std::to_string(v.get<double>()); };
        for (const auto& r : s.at("results"))
            std::printf("%-28s %-9s %12.4f %12.4f %9s %9s %8s\n", r.at("label").get<std::string>().c_str(),
                        r.at("kind").get<std::string>().c_str(), r.at("mae").get<double>(),
                        r.at("medae").get<double>(), num(r.at("mape")).c_str(), num(r.at("medape")).c_str(),
                        num(r.at("r2")).c_str());
        std::printf("test samples: %zu, runs: %d\n", s.at("n_test_samples").get<std::size_t>(), s.at("runs").get<int>());
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"citecast: journal citation and CiteScore forecasting"};
    app.require_subcommand(1);
    Flags f;

    auto add_common = [&](CLI::App* c, bool config_required) {
        auto* opt = c->add_option("--config", f.config, "experiment config (JSON)");
        if (config_required) opt->required();
        c->add_option("--seed", f.seed, "override the base seed");
        c->add_option("--jobs", f.jobs, "worker threads (default: available cores)")->check(CLI::PositiveNumber);
        c->add_option("--out-dir", f.out_dir, "output directory");
        c->add_flag("--allow-drop", f.allow_drop, "drop journals that fail validation");
        c->add_flag("-q,--quiet", f.quiet, "no progress on stderr");
    };

    auto* ingest = app.add_subcommand("ingest", "load and validate an NDJSON dataset");
    ingest->add_option("path", f.path, "NDJSON file")->required();
    ingest->add_flag("--allow-drop", f.allow_drop, "drop journals that fail validation");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--config", f.config, "generator config (JSON)");
    synth->add_option("--seed", f.seed, "generator seed");
    synth->add_option("--out-dir", f.out_dir, "output directory");

    auto* grid = app.add_subcommand("grid-search", "cross-validated grid search");
    add_common(grid, true);
    auto* train = app.add_subcommand("train", "train final models and write bundles");
    add_common(train, true);
    auto* evaluate = app.add_subcommand("evaluate", "full experiment: final runs, metrics and reports");
    add_common(evaluate, true);

    auto* predict = app.add_subcommand("predict", "predict the next year for each journal");
    predict->add_option("--model", f.model, "model bundle (JSON)")->required();
    predict->add_option("--input", f.input, "NDJSON journal histories")->required();

    auto* report = app.add_subcommand("report", "verify an output directory and print its summary");
    report->add_option("--out-dir", f.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*ingest) return cmd_ingest(f);
        if (*synth) return cmd_synth(f);
        if (*grid) return cmd_pipeline(f, Experiment::Stage::GridSearch);
        if (*train) return cmd_pipeline(f, Experiment::Stage::Train);
        if (*evaluate) return cmd_pipeline(f, Experiment::Stage::Evaluate);
        if (*predict) return cmd_predict(f);
        if (*report) return cmd_report(f);
    } catch (const DivergenceError& e) {
        std::cerr << "error: training diverged: " << e.what() << "\n";
        return kDivergence;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}
