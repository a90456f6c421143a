#pragma once

#include <array>
#include <string>
#include <vector>

#include "cactus/knowledge_graph.hpp"

namespace cactus {

/// The trained model core: per-metric flip significances and the raw
/// confidence range observed on the training cohort.
///   sigma(CPB, c, f) = P(f | c)
///   sigma(CDG, c, f) = P(f | c) * degree_c(f)
///   sigma(CPR, c, f) = P(f | c) * pagerank_c(f)
struct SignificanceProfile {
    int n_classes = 0;
    size_t n_flips = 0;
    // [metric][class * n_flips + flip]
    std::array<std::vector<double>, kMetricCount> sigma;
    // [metric] -> (min_raw, max_raw) over the training cohort
    std::array<std::pair<double, double>, kMetricCount> confidence_bounds{};

    double sig(Metric m, int class_id, int flip) const {
        return sigma[static_cast<size_t>(m)]
                    [static_cast<size_t>(class_id) * n_flips + static_cast<size_t>(flip)];
    }
};

struct ClassScores {
    Metric metric = Metric::CPB;
    std::vector<double> cost; // length K, all finite and >= 0
};

struct ClassificationResult {
    int label = 0;
    ClassScores scores;
    double raw_confidence = 0.0;
    double confidence = 0.0; // [0, 100]
    bool degenerate = false; // every class cost was zero
    std::vector<std::string> warnings;
};

/// Fills sigma from the class-conditional probabilities and centralities,
/// then replays the training rows to record per-metric raw-confidence
/// bounds used for the [0,100] normalisation.
SignificanceProfile train(const FlipTable& ft, const std::vector<int>& labels,
                          const std::vector<ClassGraph>& graphs,
                          const CentralityTable& centralities);

/// Additive cost per class: sum of the sample flips' significances.
ClassScores score(const std::vector<int>& sample_flips, const SignificanceProfile& profile,
                  Metric metric);

ClassificationResult classify(const std::vector<int>& sample_flips,
                              const SignificanceProfile& profile, Metric metric);

std::vector<ClassificationResult> classify_dataset(const FlipTable& ft,
                                                   const SignificanceProfile& profile,
                                                   Metric metric);

/// Mean absolute gap between the winning cost and the others (confidence
/// before normalisation): sum_{i != m} |C_m - C_i| / (K - 1).
double raw_confidence(const std::vector<double>& costs, int argmax_index);

/// Everything the train pipeline produces, bundled for serialisation.
struct Model {
    std::vector<FeatureSchema> schema; // original dataset schema (pre-drop)
    std::string label_column;
    std::vector<std::string> missing_markers;
    std::vector<std::string> class_names;
    AbstractionMap abstraction;
    PageRankParams pr_params;
    SignificanceProfile profile;
    std::vector<std::vector<double>> flip_class_prob; // [class][flip]
    CentralityTable centrality;
    std::array<double, kMetricCount> training_ba{}; // self-classification BA
    std::vector<std::string> warnings;
};

/// Runs abstraction -> class graphs -> centralities -> profile on a labeled
/// dataset. The dataset must already be filtered the way the caller wants.
Model train_pipeline(const Dataset& d, const PageRankParams& params,
                     const SchemaConfig* source_config = nullptr);

std::string model_to_json(const Model& m);
Model model_from_json(const std::string& json_text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

/// Predictions CSV: row_id, label, confidence, degenerate, per-class costs.
std::string predictions_to_csv(const std::vector<ClassificationResult>& results,
                               const std::vector<std::string>& class_names);

} // namespace cactus
