#pragma once

#include <string>
#include <vector>

#include "cactus/classifier.hpp"

namespace cactus {

/// Per-flip entry of a rank report. `sigma_by_class` is raw significance,
/// `normalized_by_class` is the presentation view scaled to sum to 1 over
/// the feature's flips within each class (all 0 when the feature's total
/// significance in that class is 0). Ranking always uses raw sigma.
struct RankFlipEntry {
    std::string flip;  // full name, e.g. "Age_U"
    std::string level;
    double flip_rank = 0.0;
    std::vector<double> sigma_by_class;
    std::vector<double> normalized_by_class;
};

struct RankFeatureEntry {
    std::string feature;
    double avg_rank = 0.0;
    std::vector<RankFlipEntry> flips;
};

struct RankReport {
    Metric metric = Metric::CPB;
    std::vector<std::string> class_names;
    std::vector<RankFeatureEntry> features; // descending avg_rank, ties by name
};

struct ConfidenceBin {
    double lo = 0.0;
    double hi = 0.0;
    size_t population = 0;
    double balanced_accuracy = 0.0; // over classes present in the bin
    bool ba_defined = false;        // false when the bin is empty
    size_t excluded_classes = 0;    // classes absent from the bin
};

struct CoverageThreshold {
    int percent = 0;          // population share to cover, e.g. 90
    double threshold = 0.0;   // smallest confidence with coverage <= percent
    double achieved_fraction = 0.0;
};

struct ConfidenceReport {
    Metric metric = Metric::CPB;
    std::vector<ConfidenceBin> bins; // [0,10), ..., [90,100]
    std::vector<double> cum_population_fraction; // at each bin's upper edge
    std::vector<double> cum_weighted_ba;         // BA over all samples up to the edge
    std::vector<CoverageThreshold> coverage;     // p = 90, 80, 70, 60, 50
    double chance_line = 0.0;                    // 1/K
    size_t total = 0;
};

/// Mean absolute significance spread of one flip over unordered class pairs.
double flip_rank(const SignificanceProfile& profile, Metric metric, int flip);

/// Mean flip_rank over the feature's flips.
double feature_rank(const SignificanceProfile& profile, const AbstractionMap& map,
                    Metric metric, size_t feature_pos);

/// Report restricted to the top_k features by average rank.
RankReport rank_report(const SignificanceProfile& profile, const AbstractionMap& map,
                       const std::vector<std::string>& class_names, Metric metric,
                       size_t top_k);

/// Average rank for every feature (used by filtering).
FeatureRanks all_feature_ranks(const SignificanceProfile& profile, const AbstractionMap& map,
                               Metric metric);

ConfidenceReport confidence_analysis(const std::vector<ClassificationResult>& results,
                                     const std::vector<int>& labels, Metric metric,
                                     int bin_count = 10);

std::string rank_report_to_json(const RankReport& report);
std::string rank_report_to_csv(const RankReport& report);
std::string rank_report_to_svg(const RankReport& report);
std::string confidence_report_to_csv(const ConfidenceReport& report);
std::string confidence_report_to_svg(const ConfidenceReport& report);

/// Writes ranks_<metric>.{json,csv,svg} and confidence_<metric>.{csv,svg}
/// into out_dir; byte-deterministic given the inputs.
void emit_reports(const std::vector<RankReport>& ranks,
                  const std::vector<ConfidenceReport>& confidences,
                  const std::string& out_dir);

} // namespace cactus
