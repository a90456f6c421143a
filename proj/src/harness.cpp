#include "cactus/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cactus/svg.hpp"

namespace cactus {

double balanced_accuracy(const std::vector<int>& predicted, const std::vector<int>& actual,
                         int k) {
    if (predicted.size() != actual.size() || actual.empty())
        throw Error("balanced_accuracy: predicted/actual must be aligned and non-empty");
    std::vector<size_t> count(static_cast<size_t>(k), 0), hit(static_cast<size_t>(k), 0);
    for (size_t i = 0; i < actual.size(); ++i) {
        const int y = actual[i];
        if (y < 0 || y >= k) throw Error("balanced_accuracy: label out of range");
        count[static_cast<size_t>(y)] += 1;
        if (predicted[i] == y) hit[static_cast<size_t>(y)] += 1;
    }
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
        if (count[static_cast<size_t>(c)] == 0)
            throw Error("balanced_accuracy: class " + std::to_string(c) + " absent from actual");
        sum += static_cast<double>(hit[static_cast<size_t>(c)]) /
               static_cast<double>(count[static_cast<size_t>(c)]);
    }
    return sum / static_cast<double>(k);
}

double balanced_accuracy_present(const std::vector<int>& predicted,
                                 const std::vector<int>& actual, int k) {
    std::vector<size_t> count(static_cast<size_t>(k), 0), hit(static_cast<size_t>(k), 0);
    for (size_t i = 0; i < actual.size(); ++i) {
        count[static_cast<size_t>(actual[i])] += 1;
        if (predicted[i] == actual[i]) hit[static_cast<size_t>(actual[i])] += 1;
    }
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < k; ++c) {
        if (count[static_cast<size_t>(c)] == 0) continue;
        ++present;
        sum += static_cast<double>(hit[static_cast<size_t>(c)]) /
               static_cast<double>(count[static_cast<size_t>(c)]);
    }
    if (present == 0) throw Error("balanced_accuracy: empty evaluation");
    return sum / static_cast<double>(present);
}

Dataset fragment(const Dataset& d, const FragmentationSpec& spec) {
    if (spec.removal_fraction < 0.0 || spec.removal_fraction >= 1.0)
        throw Error("fragment: removal_fraction must be in [0,1)");
    Dataset out = d;
    if (spec.removal_fraction == 0.0) return out;
    Rng rng(derive_seed(spec.seed, 0xF7A6));
    // Fixed feature-major traversal; only observed cells can be removed.
    for (auto& column : out.columns)
        for (auto& cell : column)
            if (!cell.missing && rng.bernoulli(spec.removal_fraction)) cell = Cell::make_missing();
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

namespace {

std::string padded_name(const char* prefix, size_t i) {
    std::string n = std::to_string(i);
    if (n.size() < 2) n = "0" + n;
    return prefix + n;
}

std::vector<size_t> class_counts(const SyntheticSpec& spec) {
    const size_t k = spec.class_proportions.size();
    double total = std::accumulate(spec.class_proportions.begin(), spec.class_proportions.end(), 0.0);
    if (std::fabs(total - 1.0) > 1e-9)
        throw Error("synthesize: class proportions sum to " + fmt_double(total) + ", expected 1");
    if (k < 2) throw Error("synthesize: need at least 2 classes");
    if (spec.n_rows < k) throw Error("synthesize: fewer rows than classes");

    // Largest-remainder allocation, then force every class to appear.
    std::vector<size_t> counts(k);
    std::vector<std::pair<double, size_t>> remainders;
    size_t assigned = 0;
    for (size_t c = 0; c < k; ++c) {
        if (spec.class_proportions[c] <= 0.0)
            throw Error("synthesize: class proportion must be positive");
        const double exact = spec.class_proportions[c] * static_cast<double>(spec.n_rows);
        counts[c] = static_cast<size_t>(std::floor(exact));
        assigned += counts[c];
        remainders.emplace_back(-(exact - std::floor(exact)), c);
    }
    std::sort(remainders.begin(), remainders.end());
    for (size_t i = 0; assigned < spec.n_rows; ++i, ++assigned) counts[remainders[i % k].second] += 1;
    for (size_t c = 0; c < k; ++c) {
        while (counts[c] == 0) {
            size_t donor = static_cast<size_t>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            counts[donor] -= 1;
            counts[c] += 1;
        }
    }
    return counts;
}

} // namespace

Dataset synthesize(const SyntheticSpec& spec) {
    const size_t k = spec.class_proportions.size();
    const size_t n_features = spec.n_continuous + spec.n_categorical;
    if (spec.n_informative > n_features)
        throw Error("synthesize: n_informative exceeds the feature count");
    if (spec.categorical_level_count < 2 && spec.n_categorical > 0)
        throw Error("synthesize: categorical features need at least 2 levels");
    if (spec.base_missing_fraction < 0.0 || spec.base_missing_fraction >= 1.0)
        throw Error("synthesize: base_missing_fraction must be in [0,1)");

    const auto counts = class_counts(spec);
    std::vector<int> labels;
    labels.reserve(spec.n_rows);
    for (size_t c = 0; c < k; ++c)
        labels.insert(labels.end(), counts[c], static_cast<int>(c));
    Rng label_rng(derive_seed(spec.seed, 1));
    label_rng.shuffle(labels);

    const size_t informative_continuous = std::min(spec.n_informative, spec.n_continuous);
    const size_t informative_categorical = spec.n_informative - informative_continuous;

    // Each informative continuous feature separates the classes along its own
    // seeded ordering, so features jointly identify a class rather than all
    // encoding the same split.
    std::vector<std::vector<double>> class_means(spec.n_continuous);
    Rng perm_rng(derive_seed(spec.seed, 2));
    for (size_t f = 0; f < spec.n_continuous; ++f) {
        std::vector<double> means(k, 0.0);
        if (f < informative_continuous) {
            std::vector<double> positions(k);
            for (size_t c = 0; c < k; ++c) positions[c] = static_cast<double>(c);
            perm_rng.shuffle(positions);
            for (size_t c = 0; c < k; ++c) means[c] = spec.class_separation * positions[c];
        }
        class_means[f] = std::move(means);
    }
    std::vector<size_t> preferred_offset(spec.n_categorical, 0);
    for (size_t f = 0; f < spec.n_categorical; ++f)
        preferred_offset[f] = static_cast<size_t>(perm_rng.bounded(spec.categorical_level_count));

    Dataset d;
    d.label_column = "class";
    d.labels = labels;
    for (size_t c = 0; c < k; ++c) d.class_names.push_back(std::to_string(c));

    Rng cell_rng(derive_seed(spec.seed, 3));
    const size_t levels = spec.categorical_level_count;
    for (size_t f = 0; f < spec.n_continuous; ++f) {
        d.schema.push_back(FeatureSchema{padded_name("cont_", f), FeatureKind::Continuous, false});
        std::vector<Cell> col;
        col.reserve(spec.n_rows);
        for (size_t r = 0; r < spec.n_rows; ++r) {
            const double mean = class_means[f][static_cast<size_t>(labels[r])];
            col.push_back(Cell::make_number(mean + cell_rng.normal()));
        }
        d.columns.push_back(std::move(col));
    }
    for (size_t f = 0; f < spec.n_categorical; ++f) {
        const bool informative = f < informative_categorical;
        d.schema.push_back(FeatureSchema{padded_name("cat_", f), FeatureKind::Categorical, false});
        std::vector<Cell> col;
        col.reserve(spec.n_rows);
        for (size_t r = 0; r < spec.n_rows; ++r) {
            size_t level;
            if (informative) {
                const size_t favored =
                    (static_cast<size_t>(labels[r]) + preferred_offset[f]) % levels;
                if (cell_rng.bernoulli(spec.categorical_skew)) {
                    level = favored;
                } else {
                    level = cell_rng.bounded(levels - 1);
                    if (level >= favored) ++level;
                }
            } else {
                level = cell_rng.bounded(levels);
            }
            col.push_back(Cell::make_number(static_cast<double>(level)));
        }
        d.columns.push_back(std::move(col));
    }

    if (spec.base_missing_fraction > 0.0) {
        Rng missing_rng(derive_seed(spec.seed, 4));
        for (auto& column : d.columns)
            for (auto& cell : column)
                if (missing_rng.bernoulli(spec.base_missing_fraction)) cell = Cell::make_missing();
    }
    d.validate();
    return d;
}

SyntheticSpec synthetic_spec_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw Error(std::string("synthetic spec: invalid JSON: ") + e.what());
    }
    SyntheticSpec spec;
    if (j.contains("n_rows")) spec.n_rows = j.at("n_rows").get<size_t>();
    if (j.contains("class_proportions"))
        spec.class_proportions = j.at("class_proportions").get<std::vector<double>>();
    if (j.contains("n_continuous")) spec.n_continuous = j.at("n_continuous").get<size_t>();
    if (j.contains("n_categorical")) spec.n_categorical = j.at("n_categorical").get<size_t>();
    if (j.contains("n_informative")) spec.n_informative = j.at("n_informative").get<size_t>();
    if (j.contains("base_missing_fraction"))
        spec.base_missing_fraction = j.at("base_missing_fraction").get<double>();
    if (j.contains("class_separation"))
        spec.class_separation = j.at("class_separation").get<double>();
    if (j.contains("categorical_level_count"))
        spec.categorical_level_count = j.at("categorical_level_count").get<size_t>();
    if (j.contains("categorical_skew"))
        spec.categorical_skew = j.at("categorical_skew").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<uint64_t>();
    return spec;
}

std::string synthetic_spec_to_json(const SyntheticSpec& spec) {
    nlohmann::json j;
    j["n_rows"] = spec.n_rows;
    j["class_proportions"] = spec.class_proportions;
    j["n_continuous"] = spec.n_continuous;
    j["n_categorical"] = spec.n_categorical;
    j["n_informative"] = spec.n_informative;
    j["base_missing_fraction"] = spec.base_missing_fraction;
    j["class_separation"] = spec.class_separation;
    j["categorical_level_count"] = spec.categorical_level_count;
    j["categorical_skew"] = spec.categorical_skew;
    j["seed"] = spec.seed;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Splits and fold evaluation
// ---------------------------------------------------------------------------

SplitIndices stratified_split(const std::vector<int>& labels, int k, double holdout, Rng& rng) {
    if (holdout <= 0.0 || holdout >= 1.0) throw Error("split: holdout must be in (0,1)");
    std::vector<std::vector<size_t>> per_class(static_cast<size_t>(k));
    for (size_t r = 0; r < labels.size(); ++r)
        per_class.at(static_cast<size_t>(labels[r])).push_back(r);

    SplitIndices out;
    for (auto& rows : per_class) {
        if (rows.empty()) continue;
        rng.shuffle(rows);
        size_t take = static_cast<size_t>(
            std::llround(holdout * static_cast<double>(rows.size())));
        if (rows.size() >= 2) take = std::clamp<size_t>(take, 1, rows.size() - 1);
        else take = 0; // a singleton class stays in training
        for (size_t i = 0; i < rows.size(); ++i)
            (i < take ? out.test : out.train).push_back(rows[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    if (out.train.empty() || out.test.empty()) throw Error("split: a side ended up empty");
    return out;
}

std::vector<std::vector<size_t>> stratified_folds(const std::vector<int>& labels, int k,
                                                  int folds, Rng& rng) {
    if (folds < 2) throw Error("folds: need at least 2");
    std::vector<std::vector<size_t>> buckets(static_cast<size_t>(folds));
    std::vector<std::vector<size_t>> per_class(static_cast<size_t>(k));
    for (size_t r = 0; r < labels.size(); ++r)
        per_class.at(static_cast<size_t>(labels[r])).push_back(r);
    size_t next = 0;
    for (auto& rows : per_class) {
        rng.shuffle(rows);
        for (size_t r : rows) {
            buckets[next % static_cast<size_t>(folds)].push_back(r);
            ++next;
        }
    }
    for (auto& b : buckets) std::sort(b.begin(), b.end());
    return buckets;
}

namespace {

int majority_class(const std::vector<int>& labels, int k) {
    std::vector<size_t> count(static_cast<size_t>(k), 0);
    for (int y : labels) count[static_cast<size_t>(y)] += 1;
    return static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
}

/// Decision stump on the continuous feature whose cut-off search separates
/// the training rows best; prediction is the majority class of the matching
/// side. Falls back to the plain majority class when no feature qualifies.
std::vector<int> best_feature_predictions(const Dataset& train, const Dataset& test, int k) {
    const auto partitions = enumerate_bipartitions(k);
    int best_feature = -1;
    Cutoff best;
    for (size_t f = 0; f < train.n_features(); ++f) {
        if (train.schema[f].kind != FeatureKind::Continuous) continue;
        std::vector<double> values;
        std::vector<int> labels;
        for (size_t r = 0; r < train.n_rows(); ++r) {
            if (train.columns[f][r].missing) continue;
            values.push_back(train.columns[f][r].number);
            labels.push_back(train.labels[r]);
        }
        try {
            Cutoff c = best_cutoff(values, labels, partitions);
            if (best_feature < 0 || c.achieved_ba > best.achieved_ba) {
                best = c;
                best_feature = static_cast<int>(f);
            }
        } catch (const Error&) {
            continue; // constant or unsplittable feature
        }
    }

    const int overall = majority_class(train.labels, k);
    std::vector<int> predictions(test.n_rows(), overall);
    if (best_feature < 0) return predictions;

    std::vector<size_t> low_count(static_cast<size_t>(k), 0), high_count(static_cast<size_t>(k), 0);
    for (size_t r = 0; r < train.n_rows(); ++r) {
        const Cell& c = train.columns[static_cast<size_t>(best_feature)][r];
        if (c.missing) continue;
        auto& side = c.number <= best.threshold ? low_count : high_count;
        side[static_cast<size_t>(train.labels[r])] += 1;
    }
    const int low_class = static_cast<int>(
        std::max_element(low_count.begin(), low_count.end()) - low_count.begin());
    const int high_class = static_cast<int>(
        std::max_element(high_count.begin(), high_count.end()) - high_count.begin());
    const int test_feature = test.feature_index(train.schema[static_cast<size_t>(best_feature)].name);
    for (size_t r = 0; r < test.n_rows(); ++r) {
        const Cell& c = test.columns[static_cast<size_t>(test_feature)][r];
        if (c.missing) continue;
        predictions[r] = c.number <= best.threshold ? low_class : high_class;
    }
    return predictions;
}

void require_all_classes(const std::vector<int>& labels, int k) {
    std::vector<bool> seen(static_cast<size_t>(k), false);
    for (int y : labels) seen[static_cast<size_t>(y)] = true;
    for (int c = 0; c < k; ++c)
        if (!seen[static_cast<size_t>(c)])
            throw Error("stratification: training split is missing class " + std::to_string(c));
}

SplitIndices fold_split(const Dataset& d, const CrossValidationConfig& config, int fold) {
    const int k = static_cast<int>(d.n_classes());
    if (config.mode == FoldMode::RepeatedHoldout) {
        Rng rng(derive_seed(config.seed, 101, static_cast<uint64_t>(fold)));
        return stratified_split(d.labels, k, config.holdout, rng);
    }
    Rng rng(derive_seed(config.seed, 202));
    auto buckets = stratified_folds(d.labels, k, config.folds, rng);
    SplitIndices split;
    split.test = buckets[static_cast<size_t>(fold)];
    for (int b = 0; b < config.folds; ++b) {
        if (b == fold) continue;
        split.train.insert(split.train.end(), buckets[static_cast<size_t>(b)].begin(),
                           buckets[static_cast<size_t>(b)].end());
    }
    std::sort(split.train.begin(), split.train.end());
    return split;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

EvalResult summarize(std::string metric, double level, std::vector<double> fold_ba) {
    EvalResult res;
    res.metric = std::move(metric);
    res.fragmentation_level = level;
    res.mean = mean_of(fold_ba);
    res.sd = sample_sd(fold_ba, res.mean);
    res.fold_ba = std::move(fold_ba);
    return res;
}

} // namespace

FoldScores evaluate_fold(const Dataset& d, const SplitIndices& split,
                         const PageRankParams& params) {
    const int k = static_cast<int>(d.n_classes());
    Dataset train_set = d.subset_rows(split.train);
    Dataset test_set = d.subset_rows(split.test);
    require_all_classes(train_set.labels, k);

    Model model = train_pipeline(train_set, params);
    FlipTable test_flips = encode_dataset(test_set, model.abstraction, nullptr);

    FoldScores scores;
    for (Metric metric : kAllMetrics) {
        auto results = classify_dataset(test_flips, model.profile, metric);
        std::vector<int> predicted(results.size());
        for (size_t i = 0; i < results.size(); ++i) predicted[i] = results[i].label;
        scores.ba[static_cast<size_t>(metric)] =
            balanced_accuracy_present(predicted, test_set.labels, k);
    }

    std::vector<int> majority(test_set.n_rows(), majority_class(train_set.labels, k));
    scores.majority_ba = balanced_accuracy_present(majority, test_set.labels, k);
    scores.best_feature_ba = balanced_accuracy_present(
        best_feature_predictions(train_set, test_set, k), test_set.labels, k);
    return scores;
}

EvalResult cross_validate(const Dataset& d, Metric metric, const CrossValidationConfig& config,
                          const FragmentationSpec& frag) {
    if (config.folds < 2) throw Error("cross_validate: folds must be >= 2");
    Dataset data = fragment(d, frag);
    std::vector<double> fold_ba(static_cast<size_t>(config.folds));
    for (int f = 0; f < config.folds; ++f) {
        FoldScores scores = evaluate_fold(data, fold_split(data, config, f), config.pagerank);
        fold_ba[static_cast<size_t>(f)] = scores.ba[static_cast<size_t>(metric)];
    }
    return summarize(metric_name(metric), frag.removal_fraction, std::move(fold_ba));
}

EvalResult baseline_majority(const Dataset& d, const CrossValidationConfig& config) {
    const int k = static_cast<int>(d.n_classes());
    std::vector<double> fold_ba(static_cast<size_t>(config.folds));
    for (int f = 0; f < config.folds; ++f) {
        SplitIndices split = fold_split(d, config, f);
        Dataset train_set = d.subset_rows(split.train);
        Dataset test_set = d.subset_rows(split.test);
        require_all_classes(train_set.labels, k);
        std::vector<int> predictions(test_set.n_rows(), majority_class(train_set.labels, k));
        fold_ba[static_cast<size_t>(f)] =
            balanced_accuracy_present(predictions, test_set.labels, k);
    }
    return summarize("majority", 0.0, std::move(fold_ba));
}

EvalResult baseline_best_feature(const Dataset& d, const CrossValidationConfig& config) {
    const int k = static_cast<int>(d.n_classes());
    std::vector<double> fold_ba(static_cast<size_t>(config.folds));
    for (int f = 0; f < config.folds; ++f) {
        SplitIndices split = fold_split(d, config, f);
        Dataset train_set = d.subset_rows(split.train);
        Dataset test_set = d.subset_rows(split.test);
        require_all_classes(train_set.labels, k);
        fold_ba[static_cast<size_t>(f)] = balanced_accuracy_present(
            best_feature_predictions(train_set, test_set, k), test_set.labels, k);
    }
    return summarize("best_feature", 0.0, std::move(fold_ba));
}

StudyTable run_fragmentation_study(const Dataset& d, const std::vector<double>& levels,
                                   const std::vector<Metric>& metrics,
                                   const CrossValidationConfig& config) {
    StudyTable study;
    study.levels = levels;
    for (size_t li = 0; li < levels.size(); ++li) {
        FragmentationSpec frag;
        frag.removal_fraction = levels[li];
        frag.seed = derive_seed(config.seed, 7, li);
        Dataset data = fragment(d, frag);

        // One training per fold serves every metric plus both baselines.
        std::vector<FoldScores> folds(static_cast<size_t>(config.folds));
        for (int f = 0; f < config.folds; ++f)
            folds[static_cast<size_t>(f)] =
                evaluate_fold(data, fold_split(data, config, f), config.pagerank);

        for (Metric metric : metrics) {
            std::vector<double> fold_ba;
            for (const auto& scores : folds)
                fold_ba.push_back(scores.ba[static_cast<size_t>(metric)]);
            study.results.push_back(summarize(metric_name(metric), levels[li], std::move(fold_ba)));
        }
        std::vector<double> maj, stump;
        for (const auto& scores : folds) {
            maj.push_back(scores.majority_ba);
            stump.push_back(scores.best_feature_ba);
        }
        study.results.push_back(summarize("majority", levels[li], std::move(maj)));
        study.results.push_back(summarize("best_feature", levels[li], std::move(stump)));
    }
    return study;
}

std::string study_to_csv(const StudyTable& study) {
    std::string out = "level,metric,fold,balanced_accuracy\n";
    for (const auto& res : study.results)
        for (size_t f = 0; f < res.fold_ba.size(); ++f) {
            out += fmt_double(res.fragmentation_level);
            out += ',';
            out += res.metric;
            out += ',';
            out += std::to_string(f);
            out += ',';
            out += fmt_double(res.fold_ba[f]);
            out += '\n';
        }
    out += "\nlevel,metric,mean,sd\n";
    for (const auto& res : study.results) {
        out += fmt_double(res.fragmentation_level);
        out += ',';
        out += res.metric;
        out += ',';
        out += fmt_double(res.mean);
        out += ',';
        out += fmt_double(res.sd);
        out += '\n';
    }
    return out;
}

std::string study_to_svg(const StudyTable& study) {
    const double width = 560, height = 360, margin = 50;
    SvgCanvas svg(width, height);
    const double plot_w = width - 2 * margin - 110; // room for the legend
    const double plot_h = height - 2 * margin;
    svg.line(margin, margin + plot_h, margin + plot_w, margin + plot_h, "#555555");
    svg.line(margin, margin, margin, margin + plot_h, "#555555");
    svg.text(margin + plot_w / 2, height - 12, "fraction of values removed", 11.0, "middle");
    svg.text(14, margin + plot_h / 2, "balanced accuracy", 11.0, "middle");
    for (int t = 0; t <= 5; ++t) {
        const double y = margin + plot_h * (1.0 - t / 5.0);
        svg.line(margin - 3, y, margin, y, "#555555");
        svg.text(margin - 6, y + 3, fmt_double(t / 5.0), 9.0, "end");
    }

    std::vector<std::string> series;
    for (const auto& res : study.results)
        if (std::find(series.begin(), series.end(), res.metric) == series.end())
            series.push_back(res.metric);

    const double max_level = study.levels.empty()
                                 ? 1.0
                                 : std::max(0.0001, *std::max_element(study.levels.begin(),
                                                                      study.levels.end()));
    static const char* colors[] = {"#ff7f0e", "#1f77b4", "#2ca02c", "#7f7f7f", "#9467bd",
                                   "#8c564b"};
    for (size_t s = 0; s < series.size(); ++s) {
        std::vector<std::pair<double, double>> points;
        for (const auto& res : study.results) {
            if (res.metric != series[s]) continue;
            const double x = margin + plot_w * (res.fragmentation_level / max_level);
            const double y = margin + plot_h * (1.0 - res.mean);
            points.emplace_back(x, y);
        }
        const std::string color = colors[s % 6];
        svg.polyline(points, color, 1.8, "series");
        for (auto [x, y] : points) svg.circle(x, y, 2.5, color);
        svg.rect(margin + plot_w + 14, margin + 16.0 * s, 10, 10, color);
        svg.text(margin + plot_w + 28, margin + 16.0 * s + 9, series[s], 10.0);
    }
    for (double level : study.levels) {
        const double x = margin + plot_w * (level / max_level);
        svg.line(x, margin + plot_h, x, margin + plot_h + 3, "#555555");
        svg.text(x, margin + plot_h + 14, fmt_double(level), 9.0, "middle");
    }
    return svg.finish();
}

} // namespace cactus
