#include "cactus/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cactus/explain.hpp"
#include "cactus/harness.hpp"

namespace fs = std::filesystem;

namespace cactus::cli {

namespace {

struct CommonOptions {
    std::string input;
    std::string schema;
    std::string model;
    std::string out;
    std::vector<std::string> metrics = {"CPB", "CDG", "CPR"};
    uint64_t seed = 0;
    double damping = 0.85;
    double tol = 1e-12;
    int max_iter = 10000;
    double max_missing = 1.0;
    std::vector<std::string> exclude;
    size_t top_k = 9;
    int top_k_features = -1;
    std::vector<double> levels = {0.0, 0.2, 0.4, 0.6, 0.8};
    int folds = 10;
    double holdout = 0.2;
    std::string fold_mode = "holdout";
    std::string rank_metric = "CPR";
    std::string synthetic;
    std::string spec_path;
    bool export_graphs = false;
};

std::vector<Metric> parse_metrics(const std::vector<std::string>& names) {
    std::vector<Metric> metrics;
    for (const auto& name : names) {
        auto m = metric_from_name(name);
        if (!m) throw Error("unknown metric '" + name + "' (expected CPB, CDG or CPR)");
        if (std::find(metrics.begin(), metrics.end(), *m) == metrics.end())
            metrics.push_back(*m);
    }
    if (metrics.empty()) throw Error("no metrics selected");
    return metrics;
}

PageRankParams pagerank_params(const CommonOptions& opt) {
    PageRankParams p;
    p.damping = opt.damping;
    p.tol = opt.tol;
    p.max_iter = opt.max_iter;
    return p;
}

CrossValidationConfig cv_config(const CommonOptions& opt) {
    CrossValidationConfig config;
    config.folds = opt.folds;
    config.holdout = opt.holdout;
    config.seed = opt.seed;
    config.pagerank = pagerank_params(opt);
    if (opt.fold_mode == "kfold") config.mode = FoldMode::KFold;
    else if (opt.fold_mode == "holdout") config.mode = FoldMode::RepeatedHoldout;
    else throw Error("unknown fold mode '" + opt.fold_mode + "' (expected holdout or kfold)");
    return config;
}

void ensure_out_dir(const CommonOptions& opt) {
    if (opt.out.empty()) throw Error("--out is required");
    const fs::path out = fs::weakly_canonical(opt.out);
    for (const std::string& in : {opt.input, opt.schema, opt.model, opt.synthetic, opt.spec_path}) {
        if (in.empty()) continue;
        if (fs::weakly_canonical(in) == out)
            throw Error("output directory '" + opt.out + "' collides with input path '" + in + "'");
    }
    fs::create_directories(out);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Every command records its fully resolved configuration (defaults
/// expanded) so a run can be reproduced from the output directory alone.
void write_resolved_config(const CommonOptions& opt, const std::string& command) {
    nlohmann::json j;
    j["command"] = command;
    j["input"] = opt.input;
    j["schema"] = opt.schema;
    j["model"] = opt.model;
    j["out"] = opt.out;
    j["metrics"] = opt.metrics;
    j["seed"] = opt.seed;
    j["damping"] = opt.damping;
    j["tol"] = opt.tol;
    j["max_iter"] = opt.max_iter;
    j["max_missing"] = opt.max_missing;
    j["exclude"] = opt.exclude;
    j["top_k"] = opt.top_k;
    j["top_k_features"] = opt.top_k_features;
    j["levels"] = opt.levels;
    j["folds"] = opt.folds;
    j["holdout"] = opt.holdout;
    j["fold_mode"] = opt.fold_mode;
    j["rank_metric"] = opt.rank_metric;
    j["synthetic"] = opt.synthetic;
    j["spec"] = opt.spec_path;
    j["export_graphs"] = opt.export_graphs;
    write_file(fs::path(opt.out) / "resolved_config.json", j.dump(2) + "\n");
}

SchemaConfig schema_config_for(const CommonOptions& opt) {
    if (opt.schema.empty()) throw Error("--schema is required for this command");
    return load_schema_config(opt.schema);
}

/// Maps a loaded dataset's labels into the model's class index space.
std::vector<int> remap_labels(const Dataset& d, const Model& model) {
    std::vector<int> mapping(d.class_names.size(), -1);
    for (size_t i = 0; i < d.class_names.size(); ++i) {
        auto it = std::find(model.class_names.begin(), model.class_names.end(), d.class_names[i]);
        if (it == model.class_names.end())
            throw Error("label '" + d.class_names[i] + "' is not a class of the model");
        mapping[i] = static_cast<int>(it - model.class_names.begin());
    }
    std::vector<int> labels(d.labels.size());
    for (size_t r = 0; r < d.labels.size(); ++r)
        labels[r] = mapping[static_cast<size_t>(d.labels[r])];
    return labels;
}

std::string abstraction_summary_csv(const Model& model) {
    std::string out = "feature,kind,threshold,partition,achieved_ba,levels\n";
    for (const auto& fs_entry : model.abstraction.schema) {
        out += fs_entry.name;
        out += ',';
        out += kind_name(fs_entry.kind);
        if (fs_entry.kind == FeatureKind::Continuous) {
            const Cutoff& c = model.abstraction.cutoffs.at(fs_entry.name);
            out += ',' + fmt_double(c.threshold);
            out += ',' + std::to_string(c.partition);
            out += ',' + fmt_double(c.achieved_ba);
            out += ',';
        } else {
            const auto& levels = model.abstraction.categorical_levels.at(fs_entry.name);
            out += ",,,," + join(levels, "|");
        }
        out += '\n';
    }
    return out;
}

Dataset load_filtered_dataset(const CommonOptions& opt, const SchemaConfig& config) {
    Dataset d = load_csv(opt.input, config);
    if (!opt.exclude.empty() || opt.max_missing < 1.0) {
        FilterSpec filter;
        filter.excluded = opt.exclude;
        filter.max_missing_fraction = opt.max_missing;
        d = apply_filter(d, filter);
    }
    return d;
}

SyntheticSpec synthetic_spec_for(const CommonOptions& opt, const std::string& path) {
    SyntheticSpec spec;
    bool has_explicit_seed = false;
    if (!path.empty()) {
        const std::string text = read_file(path);
        spec = synthetic_spec_from_json(text);
        has_explicit_seed = nlohmann::json::parse(text).contains("seed");
    }
    // The spec file wins when it pins a seed; otherwise derive from --seed so
    // one root seed drives the whole invocation.
    if (!has_explicit_seed) spec.seed = derive_seed(opt.seed, 31);
    return spec;
}

// -----------------------------------------------------------------------
// Commands
// -----------------------------------------------------------------------

int cmd_train(const CommonOptions& opt) {
    ensure_out_dir(opt);
    SchemaConfig config = schema_config_for(opt);
    Dataset d = load_filtered_dataset(opt, config);
    std::cout << "train: " << d.n_rows() << " rows, " << d.n_features() << " features, "
              << d.n_classes() << " classes\n";

    Model model = train_pipeline(d, pagerank_params(opt), &config);
    for (const auto& w : model.warnings) std::cout << "warning: " << w << "\n";

    save_model(model, (fs::path(opt.out) / "model.json").string());
    write_file(fs::path(opt.out) / "abstraction_summary.csv", abstraction_summary_csv(model));
    write_resolved_config(opt, "train");

    for (Metric m : kAllMetrics)
        std::cout << "train: self BA " << metric_name(m) << " = "
                  << fmt_double(model.training_ba[static_cast<size_t>(m)]) << "\n";

    if (opt.export_graphs) {
        FlipTable table = encode_dataset(d, model.abstraction, nullptr);
        auto graphs = build_all_class_graphs(table, model.abstraction, d.labels,
                                             static_cast<int>(d.n_classes()));
        for (const auto& g : graphs) {
            const std::string tag = "class_" + model.class_names[static_cast<size_t>(g.class_id)];
            write_file(fs::path(opt.out) / ("graph_" + tag + "_edges.csv"),
                       graph_edges_csv(g, model.abstraction));
            write_file(fs::path(opt.out) / ("graph_" + tag + "_nodes.json"),
                       graph_nodes_json(g, model.abstraction,
                                        model.centrality.pagerank[static_cast<size_t>(g.class_id)],
                                        model.centrality.degree[static_cast<size_t>(g.class_id)]));
        }
    }
    std::cout << "train: wrote " << (fs::path(opt.out) / "model.json").string() << "\n";
    return 0;
}

int cmd_classify(const CommonOptions& opt) {
    ensure_out_dir(opt);
    Model model = load_model(opt.model);
    SchemaConfig config;
    config.label_column = model.label_column;
    config.missing_markers = model.missing_markers;
    if (!opt.schema.empty()) config = load_schema_config(opt.schema);
    Dataset d = load_csv(opt.input, config, LabelPolicy::Optional);

    std::vector<std::string> encode_warnings;
    FlipTable table = encode_dataset(d, model.abstraction, &encode_warnings);
    for (const auto& w : encode_warnings) std::cout << "warning: " << w << "\n";

    const auto metrics = parse_metrics(opt.metrics);
    nlohmann::json summary;
    summary["rows"] = d.n_rows();
    std::vector<int> labels;
    if (d.labeled()) labels = remap_labels(d, model);

    for (Metric metric : metrics) {
        auto results = classify_dataset(table, model.profile, metric);
        write_file(fs::path(opt.out) / (std::string("predictions_") + metric_name(metric) + ".csv"),
                   predictions_to_csv(results, model.class_names));
        nlohmann::json entry;
        size_t degenerate = 0;
        for (const auto& r : results) degenerate += r.degenerate ? 1 : 0;
        entry["degenerate"] = degenerate;
        if (d.labeled()) {
            std::vector<int> predicted(results.size());
            for (size_t i = 0; i < results.size(); ++i) predicted[i] = results[i].label;
            const double ba = balanced_accuracy(predicted, labels,
                                                static_cast<int>(model.class_names.size()));
            entry["balanced_accuracy"] = ba;
            std::cout << "classify: BA " << metric_name(metric) << " = " << fmt_double(ba) << "\n";
        }
        summary[metric_name(metric)] = entry;
    }
    write_file(fs::path(opt.out) / "classification_summary.json", summary.dump(2) + "\n");
    write_resolved_config(opt, "classify");
    return 0;
}

int cmd_explain(const CommonOptions& opt) {
    ensure_out_dir(opt);
    Model model = load_model(opt.model);
    SchemaConfig config;
    config.label_column = model.label_column;
    config.missing_markers = model.missing_markers;
    if (!opt.schema.empty()) config = load_schema_config(opt.schema);
    Dataset d = load_csv(opt.input, config);
    std::vector<int> labels = remap_labels(d, model);
    FlipTable table = encode_dataset(d, model.abstraction, nullptr);

    const auto metrics = parse_metrics(opt.metrics);
    const size_t top_k = std::min(opt.top_k, model.abstraction.schema.size());

    std::vector<RankReport> ranks;
    std::vector<ConfidenceReport> confidences;
    for (Metric metric : metrics) {
        ranks.push_back(
            rank_report(model.profile, model.abstraction, model.class_names, metric, top_k));
        auto results = classify_dataset(table, model.profile, metric);
        confidences.push_back(confidence_analysis(results, labels, metric));
    }
    emit_reports(ranks, confidences, opt.out);
    write_resolved_config(opt, "explain");
    std::cout << "explain: wrote reports for " << metrics.size() << " metric(s) to " << opt.out
              << "\n";
    return 0;
}

int cmd_refine(const CommonOptions& opt) {
    ensure_out_dir(opt);
    Model model = load_model(opt.model);
    SchemaConfig config;
    config.label_column = model.label_column;
    config.missing_markers = model.missing_markers;
    if (!opt.schema.empty()) config = load_schema_config(opt.schema);
    Dataset d = load_csv(opt.input, config);

    auto rank_metric = metric_from_name(opt.rank_metric);
    if (!rank_metric) throw Error("unknown rank metric '" + opt.rank_metric + "'");
    FeatureRanks ranks = all_feature_ranks(model.profile, model.abstraction, *rank_metric);

    FilterSpec filter;
    filter.excluded = opt.exclude;
    filter.max_missing_fraction = opt.max_missing;
    if (opt.top_k_features >= 0)
        filter.keep_top_k_by_rank = static_cast<size_t>(opt.top_k_features);
    Dataset refined = apply_filter(d, filter, &ranks);
    std::cout << "refine: " << d.n_features() << " -> " << refined.n_features()
              << " features\n";

    const auto metrics = parse_metrics(opt.metrics);
    const auto config_cv = cv_config(opt);
    StudyTable before = run_fragmentation_study(d, {0.0}, metrics, config_cv);
    StudyTable after = run_fragmentation_study(refined, {0.0}, metrics, config_cv);

    std::string comparison = "metric,ba_whole_mean,ba_whole_sd,ba_refined_mean,ba_refined_sd\n";
    for (size_t i = 0; i < metrics.size(); ++i) {
        const EvalResult& b = before.results[i];
        const EvalResult& a = after.results[i];
        comparison += b.metric + ',' + fmt_double(b.mean) + ',' + fmt_double(b.sd) + ',' +
                      fmt_double(a.mean) + ',' + fmt_double(a.sd) + '\n';
        std::cout << "refine: " << b.metric << " BA " << fmt_double(b.mean) << " -> "
                  << fmt_double(a.mean) << "\n";
    }
    write_file(fs::path(opt.out) / "comparison.csv", comparison);

    Model refined_model = train_pipeline(refined, pagerank_params(opt), &config);
    save_model(refined_model, (fs::path(opt.out) / "model_refined.json").string());
    save_csv(refined, (fs::path(opt.out) / "refined.csv").string());

    SchemaConfig refined_config = config;
    refined_config.categorical.clear();
    refined_config.continuous.clear();
    refined_config.excluded.clear();
    for (const auto& fs_entry : refined.schema)
        (fs_entry.kind == FeatureKind::Categorical ? refined_config.categorical
                                                   : refined_config.continuous)
            .push_back(fs_entry.name);
    write_file(fs::path(opt.out) / "refined_schema.json", schema_config_to_json(refined_config));
    write_resolved_config(opt, "refine");
    return 0;
}

int cmd_study(const CommonOptions& opt) {
    ensure_out_dir(opt);
    Dataset d;
    if (!opt.synthetic.empty() || opt.input.empty()) {
        SyntheticSpec spec = synthetic_spec_for(opt, opt.synthetic);
        d = synthesize(spec);
        std::cout << "study: synthesized " << d.n_rows() << " rows, " << d.n_features()
                  << " features\n";
    } else {
        d = load_filtered_dataset(opt, schema_config_for(opt));
        std::cout << "study: loaded " << d.n_rows() << " rows, " << d.n_features()
                  << " features\n";
    }
    for (double level : opt.levels)
        if (level < 0.0 || level >= 1.0)
            throw Error("study: levels must lie in [0,1)");

    StudyTable study =
        run_fragmentation_study(d, opt.levels, parse_metrics(opt.metrics), cv_config(opt));
    write_file(fs::path(opt.out) / "study.csv", study_to_csv(study));
    write_file(fs::path(opt.out) / "study.svg", study_to_svg(study));
    write_resolved_config(opt, "study");
    for (const auto& res : study.results)
        std::cout << "study: level " << fmt_double(res.fragmentation_level) << " " << res.metric
                  << " BA " << fmt_double(res.mean) << " +/- " << fmt_double(res.sd) << "\n";
    return 0;
}

int cmd_synthesize(const CommonOptions& opt) {
    ensure_out_dir(opt);
    SyntheticSpec spec = synthetic_spec_for(opt, opt.spec_path);
    Dataset d = synthesize(spec);
    save_csv(d, (fs::path(opt.out) / "synthetic.csv").string());

    SchemaConfig config;
    config.label_column = d.label_column;
    for (const auto& fs_entry : d.schema)
        (fs_entry.kind == FeatureKind::Categorical ? config.categorical : config.continuous)
            .push_back(fs_entry.name);
    write_file(fs::path(opt.out) / "synthetic_schema.json", schema_config_to_json(config));
    write_file(fs::path(opt.out) / "synthetic_spec.json", synthetic_spec_to_json(spec));
    write_resolved_config(opt, "synthesize");
    std::cout << "synthesize: wrote " << d.n_rows() << " rows to "
              << (fs::path(opt.out) / "synthetic.csv").string() << "\n";
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"CACTUS: explainable graph-centrality classifier for tabular data"};
    app.require_subcommand(1);
    CommonOptions opt;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--metrics", opt.metrics, "Metrics to evaluate (CPB, CDG, CPR)")
            ->delimiter(',');
        cmd->add_option("--seed", opt.seed, "Root seed for every random consumer");
        cmd->add_option("--damping", opt.damping, "PageRank damping factor");
        cmd->add_option("--tol", opt.tol, "PageRank convergence tolerance");
        cmd->add_option("--max-iter", opt.max_iter, "PageRank iteration cap");
        cmd->add_option("--out", opt.out, "Output directory")->required();
    };

    CLI::App* train = app.add_subcommand("train", "Learn a model from a labeled CSV");
    train->add_option("--input", opt.input, "Training CSV")->required();
    train->add_option("--schema", opt.schema, "Schema config JSON")->required();
    train->add_option("--exclude", opt.exclude, "Features to drop before training")
        ->delimiter(',');
    train->add_option("--max-missing", opt.max_missing,
                      "Drop features with a higher missing fraction");
    train->add_flag("--export-graphs", opt.export_graphs, "Also write per-class graph files");
    add_common(train);

    CLI::App* classify = app.add_subcommand("classify", "Apply a model to a CSV");
    classify->add_option("--model", opt.model, "Model JSON")->required();
    classify->add_option("--input", opt.input, "CSV to classify")->required();
    classify->add_option("--schema", opt.schema, "Optional schema config override");
    add_common(classify);

    CLI::App* explain = app.add_subcommand("explain", "Emit rank and confidence reports");
    explain->add_option("--model", opt.model, "Model JSON")->required();
    explain->add_option("--input", opt.input, "Labeled CSV")->required();
    explain->add_option("--schema", opt.schema, "Optional schema config override");
    explain->add_option("--top-k", opt.top_k, "Features per rank report");
    add_common(explain);

    CLI::App* refine = app.add_subcommand("refine", "Filter features, retrain, compare");
    refine->add_option("--model", opt.model, "Model JSON")->required();
    refine->add_option("--input", opt.input, "Labeled CSV")->required();
    refine->add_option("--schema", opt.schema, "Optional schema config override");
    refine->add_option("--exclude", opt.exclude, "Features to drop")->delimiter(',');
    refine->add_option("--max-missing", opt.max_missing,
                       "Drop features with a higher missing fraction");
    refine->add_option("--top-k-features", opt.top_k_features,
                       "Keep only this many features by average rank");
    refine->add_option("--rank-metric", opt.rank_metric, "Metric whose ranks drive --top-k-features");
    refine->add_option("--folds", opt.folds, "Cross-validation folds");
    refine->add_option("--holdout", opt.holdout, "Test fraction per fold");
    refine->add_option("--fold-mode", opt.fold_mode, "holdout (repeated) or kfold");
    add_common(refine);

    CLI::App* study = app.add_subcommand("study", "Fragmentation study over removal levels");
    study->add_option("--input", opt.input, "Labeled CSV (omit to use synthetic data)");
    study->add_option("--schema", opt.schema, "Schema config JSON");
    study->add_option("--synthetic", opt.synthetic, "Synthetic spec JSON");
    study->add_option("--levels", opt.levels, "Removal fractions")->delimiter(',');
    study->add_option("--folds", opt.folds, "Cross-validation folds");
    study->add_option("--holdout", opt.holdout, "Test fraction per fold");
    study->add_option("--fold-mode", opt.fold_mode, "holdout (repeated) or kfold");
    study->add_option("--exclude", opt.exclude, "Features to drop")->delimiter(',');
    study->add_option("--max-missing", opt.max_missing,
                      "Drop features with a higher missing fraction");
    add_common(study);

    CLI::App* synthesize_cmd = app.add_subcommand("synthesize", "Generate a synthetic cohort CSV");
    synthesize_cmd->add_option("--spec", opt.spec_path, "Synthetic spec JSON");
    add_common(synthesize_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (train->parsed()) return cmd_train(opt);
        if (classify->parsed()) return cmd_classify(opt);
        if (explain->parsed()) return cmd_explain(opt);
        if (refine->parsed()) return cmd_refine(opt);
        if (study->parsed()) return cmd_study(opt);
        if (synthesize_cmd->parsed()) return cmd_synthesize(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no command\n";
    return 1;
}

} // namespace cactus::cli
