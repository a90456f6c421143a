#include "cactus/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cactus/parallel.hpp"

namespace cactus {

SignificanceProfile train(const FlipTable& ft, const std::vector<int>& labels,
                          const std::vector<ClassGraph>& graphs,
                          const CentralityTable& centralities) {
    const int k = static_cast<int>(graphs.size());
    if (labels.size() != ft.rows.size()) throw Error("train: labels/rows size mismatch");
    const size_t n_flips = ft.universe_size;
    SignificanceProfile profile;
    profile.n_classes = k;
    profile.n_flips = n_flips;
    for (auto& tensor : profile.sigma) tensor.assign(static_cast<size_t>(k) * n_flips, 0.0);

    for (int c = 0; c < k; ++c) {
        const ClassGraph& g = graphs[static_cast<size_t>(c)];
        if (g.n_flips != n_flips) throw Error("train: graph/flip-table universe mismatch");
        for (size_t f = 0; f < n_flips; ++f) {
            const double p = g.flip_class_prob[f];
            const double pr = centralities.pagerank[static_cast<size_t>(c)][f];
            const double dg = centralities.degree[static_cast<size_t>(c)][f];
            if (!std::isfinite(pr) || !std::isfinite(dg))
                throw Error("train: non-finite centrality for flip index " + std::to_string(f));
            const size_t at = static_cast<size_t>(c) * n_flips + f;
            profile.sigma[static_cast<size_t>(Metric::CPB)][at] = p;
            profile.sigma[static_cast<size_t>(Metric::CDG)][at] = p * dg;
            profile.sigma[static_cast<size_t>(Metric::CPR)][at] = p * pr;
        }
    }

    // Raw-confidence bounds over the training cohort, per metric.
    for (Metric m : kAllMetrics) {
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (const auto& row : ft.rows) {
            ClassScores s = score(row, profile, m);
            int best = static_cast<int>(std::max_element(s.cost.begin(), s.cost.end()) -
                                        s.cost.begin());
            const double raw = raw_confidence(s.cost, best);
            if (first) {
                lo = hi = raw;
                first = false;
            } else {
                lo = std::min(lo, raw);
                hi = std::max(hi, raw);
            }
        }
        profile.confidence_bounds[static_cast<size_t>(m)] = {lo, hi};
    }
    return profile;
}

ClassScores score(const std::vector<int>& sample_flips, const SignificanceProfile& profile,
                  Metric metric) {
    ClassScores out;
    out.metric = metric;
    out.cost.assign(static_cast<size_t>(profile.n_classes), 0.0);
    const auto& tensor = profile.sigma[static_cast<size_t>(metric)];
    for (int f : sample_flips) {
        if (f < 0 || static_cast<size_t>(f) >= profile.n_flips)
            throw Error("score: unknown flip index " + std::to_string(f));
        for (int c = 0; c < profile.n_classes; ++c)
            out.cost[static_cast<size_t>(c)] +=
                tensor[static_cast<size_t>(c) * profile.n_flips + static_cast<size_t>(f)];
    }
    return out;
}

double raw_confidence(const std::vector<double>& costs, int argmax_index) {
    const size_t k = costs.size();
    if (k < 2) throw Error("raw_confidence: needs at least 2 classes");
    double sum = 0.0;
    for (size_t i = 0; i < k; ++i) {
        if (static_cast<int>(i) == argmax_index) continue;
        sum += std::fabs(costs[static_cast<size_t>(argmax_index)] - costs[i]);
    }
    return sum / static_cast<double>(k - 1);
}

ClassificationResult classify(const std::vector<int>& sample_flips,
                              const SignificanceProfile& profile, Metric metric) {
    ClassificationResult r;
    r.scores = score(sample_flips, profile, metric);
    const auto& costs = r.scores.cost;

    int best = 0;
    bool tie = false;
    for (size_t c = 1; c < costs.size(); ++c) {
        if (costs[c] > costs[static_cast<size_t>(best)]) {
            best = static_cast<int>(c);
            tie = false;
        } else if (costs[c] == costs[static_cast<size_t>(best)]) {
            tie = true;
        }
    }
    r.label = best;
    if (tie) r.warnings.push_back("cost tie broken toward class index " + std::to_string(best));

    r.degenerate = std::all_of(costs.begin(), costs.end(), [](double c) { return c == 0.0; });
    r.raw_confidence = raw_confidence(costs, best);

    const auto [lo, hi] = profile.confidence_bounds[static_cast<size_t>(metric)];
    if (hi > lo) {
        r.confidence = 100.0 * std::clamp((r.raw_confidence - lo) / (hi - lo), 0.0, 1.0);
    } else {
        r.confidence = 0.0;
        r.warnings.push_back("degenerate confidence bounds (max_raw == min_raw)");
    }
    return r;
}

std::vector<ClassificationResult> classify_dataset(const FlipTable& ft,
                                                   const SignificanceProfile& profile,
                                                   Metric metric) {
    std::vector<ClassificationResult> results(ft.rows.size());
    parallel_for(ft.rows.size(), [&](size_t r) {
        results[r] = classify(ft.rows[r], profile, metric);
    });
    return results;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

Model train_pipeline(const Dataset& d, const PageRankParams& params,
                     const SchemaConfig* source_config) {
    d.validate();
    if (!d.labeled()) throw Error("train: dataset has no labels");

    Model m;
    m.schema = d.schema;
    m.label_column = d.label_column;
    m.class_names = d.class_names;
    m.pr_params = params;
    if (source_config) m.missing_markers = source_config->missing_markers;
    else m.missing_markers = SchemaConfig{}.missing_markers;

    AbstractionResult abs = abstract_dataset(d);
    m.abstraction = std::move(abs.map);
    m.warnings = m.abstraction.warnings;

    const int k = static_cast<int>(d.n_classes());
    auto graphs = build_all_class_graphs(abs.table, m.abstraction, d.labels, k);
    m.centrality = compute_centralities(graphs, params);
    m.profile = train(abs.table, d.labels, graphs, m.centrality);

    m.flip_class_prob.resize(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c)
        m.flip_class_prob[static_cast<size_t>(c)] = graphs[static_cast<size_t>(c)].flip_class_prob;

    // Self-classification balanced accuracy, reported for later consistency
    // checks against `classify` runs on the same file.
    for (Metric metric : kAllMetrics) {
        auto results = classify_dataset(abs.table, m.profile, metric);
        std::vector<size_t> per_class(static_cast<size_t>(k), 0), hits(static_cast<size_t>(k), 0);
        for (size_t r = 0; r < results.size(); ++r) {
            per_class[static_cast<size_t>(d.labels[r])] += 1;
            if (results[r].label == d.labels[r]) hits[static_cast<size_t>(d.labels[r])] += 1;
        }
        double ba = 0.0;
        for (int c = 0; c < k; ++c)
            ba += static_cast<double>(hits[static_cast<size_t>(c)]) /
                  static_cast<double>(per_class[static_cast<size_t>(c)]);
        m.training_ba[static_cast<size_t>(metric)] = ba / static_cast<double>(k);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Serialisation
// ---------------------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const std::vector<std::vector<double>>& m) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : m) j.push_back(row);
    return j;
}

std::vector<std::vector<double>> matrix_from_json(const nlohmann::json& j) {
    std::vector<std::vector<double>> m;
    for (const auto& row : j) m.push_back(row.get<std::vector<double>>());
    return m;
}

} // namespace

std::string model_to_json(const Model& m) {
    nlohmann::json j;
    j["format"] = "cactus-model/1";
    j["label_column"] = m.label_column;
    j["missing_markers"] = m.missing_markers;
    j["class_names"] = m.class_names;

    nlohmann::json schema = nlohmann::json::array();
    for (const auto& fs : m.schema)
        schema.push_back({{"name", fs.name}, {"kind", kind_name(fs.kind)}, {"declared", fs.declared}});
    j["schema"] = schema;

    j["abstraction"] = nlohmann::json::parse(abstraction_to_json(m.abstraction));
    j["pagerank_params"] = {{"damping", m.pr_params.damping},
                            {"tol", m.pr_params.tol},
                            {"max_iter", m.pr_params.max_iter}};

    nlohmann::json sigma;
    nlohmann::json bounds;
    nlohmann::json training_ba;
    for (Metric metric : kAllMetrics) {
        const size_t mi = static_cast<size_t>(metric);
        std::vector<std::vector<double>> rows(static_cast<size_t>(m.profile.n_classes));
        for (int c = 0; c < m.profile.n_classes; ++c) {
            auto& row = rows[static_cast<size_t>(c)];
            row.resize(m.profile.n_flips);
            for (size_t f = 0; f < m.profile.n_flips; ++f)
                row[f] = m.profile.sigma[mi][static_cast<size_t>(c) * m.profile.n_flips + f];
        }
        sigma[metric_name(metric)] = matrix_to_json(rows);
        bounds[metric_name(metric)] = {m.profile.confidence_bounds[mi].first,
                                       m.profile.confidence_bounds[mi].second};
        training_ba[metric_name(metric)] = m.training_ba[mi];
    }
    j["sigma"] = sigma;
    j["confidence_bounds"] = bounds;
    j["training_ba"] = training_ba;
    j["flip_class_prob"] = matrix_to_json(m.flip_class_prob);
    j["centrality"] = {{"pagerank", matrix_to_json(m.centrality.pagerank)},
                       {"degree", matrix_to_json(m.centrality.degree)}};
    j["warnings"] = m.warnings;
    return j.dump(2) + "\n";
}

Model model_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw Error(std::string("model: invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "cactus-model/1")
        throw Error("model: unsupported format '" + j.value("format", "") + "'");

    Model m;
    m.label_column = j.at("label_column").get<std::string>();
    m.missing_markers = j.at("missing_markers").get<std::vector<std::string>>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& fs : j.at("schema")) {
        FeatureSchema s;
        s.name = fs.at("name").get<std::string>();
        s.kind = fs.at("kind").get<std::string>() == "continuous" ? FeatureKind::Continuous
                                                                  : FeatureKind::Categorical;
        s.declared = fs.value("declared", false);
        m.schema.push_back(s);
    }
    m.abstraction = abstraction_from_json(j.at("abstraction").dump());
    m.pr_params.damping = j.at("pagerank_params").at("damping").get<double>();
    m.pr_params.tol = j.at("pagerank_params").at("tol").get<double>();
    m.pr_params.max_iter = j.at("pagerank_params").at("max_iter").get<int>();

    m.profile.n_classes = static_cast<int>(m.class_names.size());
    m.profile.n_flips = m.abstraction.size();
    for (Metric metric : kAllMetrics) {
        const size_t mi = static_cast<size_t>(metric);
        auto rows = matrix_from_json(j.at("sigma").at(metric_name(metric)));
        if (rows.size() != m.class_names.size())
            throw Error("model: sigma class count mismatch");
        m.profile.sigma[mi].assign(rows.size() * m.profile.n_flips, 0.0);
        for (size_t c = 0; c < rows.size(); ++c) {
            if (rows[c].size() != m.profile.n_flips)
                throw Error("model: sigma flip count mismatch");
            for (size_t f = 0; f < rows[c].size(); ++f)
                m.profile.sigma[mi][c * m.profile.n_flips + f] = rows[c][f];
        }
        auto b = j.at("confidence_bounds").at(metric_name(metric));
        m.profile.confidence_bounds[mi] = {b.at(0).get<double>(), b.at(1).get<double>()};
        m.training_ba[mi] = j.at("training_ba").at(metric_name(metric)).get<double>();
    }
    m.flip_class_prob = matrix_from_json(j.at("flip_class_prob"));
    m.centrality.pagerank = matrix_from_json(j.at("centrality").at("pagerank"));
    m.centrality.degree = matrix_from_json(j.at("centrality").at("degree"));
    if (j.contains("warnings")) m.warnings = j.at("warnings").get<std::vector<std::string>>();
    return m;
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("model: cannot write '" + path + "'");
    out << model_to_json(m);
    if (!out) throw Error("model: write failed for '" + path + "'");
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("model: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

std::string predictions_to_csv(const std::vector<ClassificationResult>& results,
                               const std::vector<std::string>& class_names) {
    std::string out = "row_id,label,confidence,degenerate";
    for (const auto& name : class_names) out += ",cost_" + name;
    out += '\n';
    for (size_t r = 0; r < results.size(); ++r) {
        const auto& res = results[r];
        out += std::to_string(r);
        out += ',';
        out += class_names.at(static_cast<size_t>(res.label));
        out += ',';
        out += fmt_double(res.confidence);
        out += ',';
        out += res.degenerate ? "1" : "0";
        for (double c : res.scores.cost) {
            out += ',';
            out += fmt_double(c);
        }
        out += '\n';
    }
    return out;
}

} // namespace cactus
