#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cactus/classifier.hpp"
#include "cactus/rng.hpp"

namespace cactus {

/// Controlled random removal of observed cells; labels are never touched.
struct FragmentationSpec {
    double removal_fraction = 0.0; // in [0, 1)
    uint64_t seed = 0;
};

/// Synthetic table shaped like an epidemiological cohort: class proportions,
/// class-shifted informative features, noise features, uniform missingness.
struct SyntheticSpec {
    size_t n_rows = 1000;
    std::vector<double> class_proportions = {0.5546, 0.2685, 0.1076, 0.0315, 0.0378};
    size_t n_continuous = 10;
    size_t n_categorical = 5;
    size_t n_informative = 8;
    double base_missing_fraction = 0.0;
    double class_separation = 1.0; // gap between class means, in sd units
    size_t categorical_level_count = 3;
    double categorical_skew = 0.65; // mass on a class's preferred level
    uint64_t seed = 0;
};

struct EvalResult {
    std::string metric;      // "CPB", "CDG", "CPR", "majority", "best_feature"
    double fragmentation_level = 0.0;
    std::vector<double> fold_ba;
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation across folds
};

enum class FoldMode { RepeatedHoldout, KFold };

struct CrossValidationConfig {
    int folds = 10;
    double holdout = 0.2;
    FoldMode mode = FoldMode::RepeatedHoldout;
    uint64_t seed = 0;
    PageRankParams pagerank;
};

/// Mean per-class recall over all K classes; throws when some class in
/// [0, K) never occurs in `actual`.
double balanced_accuracy(const std::vector<int>& predicted, const std::vector<int>& actual,
                         int k);

/// Same mean-of-recalls, skipping classes absent from `actual`. Used for
/// fold evaluation where a tiny class can miss a test split.
double balanced_accuracy_present(const std::vector<int>& predicted,
                                 const std::vector<int>& actual, int k);

Dataset fragment(const Dataset& d, const FragmentationSpec& spec);

Dataset synthesize(const SyntheticSpec& spec);

SyntheticSpec synthetic_spec_from_json(const std::string& json_text);
std::string synthetic_spec_to_json(const SyntheticSpec& spec);

/// Per-class proportional allocation to the test side (round to nearest,
/// clamped so both sides keep at least one row when the class has >= 2).
struct SplitIndices {
    std::vector<size_t> train;
    std::vector<size_t> test;
};
SplitIndices stratified_split(const std::vector<int>& labels, int k, double holdout, Rng& rng);

/// Disjoint stratified partition into `folds` buckets.
std::vector<std::vector<size_t>> stratified_folds(const std::vector<int>& labels, int k,
                                                  int folds, Rng& rng);

/// Trains on the train rows only and scores the test rows; one BA per
/// requested metric, in kAllMetrics order.
struct FoldScores {
    std::array<double, kMetricCount> ba{};
    double majority_ba = 0.0;
    double best_feature_ba = 0.0;
};
FoldScores evaluate_fold(const Dataset& d, const SplitIndices& split,
                         const PageRankParams& params);

EvalResult cross_validate(const Dataset& d, Metric metric, const CrossValidationConfig& config,
                          const FragmentationSpec& frag);

/// Chance-level reference: always predicts the training-split majority class.
EvalResult baseline_majority(const Dataset& d, const CrossValidationConfig& config);

/// Second reference: one decision stump on the feature whose cut-off search
/// achieved the best training balanced accuracy.
EvalResult baseline_best_feature(const Dataset& d, const CrossValidationConfig& config);

struct StudyTable {
    std::vector<double> levels;
    std::vector<EvalResult> results; // fixed (level, metric) order, baselines last per level
};

StudyTable run_fragmentation_study(const Dataset& d, const std::vector<double>& levels,
                                   const std::vector<Metric>& metrics,
                                   const CrossValidationConfig& config);

std::string study_to_csv(const StudyTable& study);
std::string study_to_svg(const StudyTable& study);

} // namespace cactus
