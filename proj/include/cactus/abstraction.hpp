#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cactus/tabular.hpp"

namespace cactus {

/// A discrete feature state: "U"/"D" around a learned cut-off for continuous
/// features, one token per observed level for categorical ones.
struct Flip {
    std::string feature;
    std::string level;

    std::string name() const { return feature + "_" + level; }
    bool operator==(const Flip& o) const { return feature == o.feature && level == o.level; }
};

/// Learned cut-off for one continuous feature. `partition` is a bitmask over
/// the K classes (bit set = class in group 1; class 0 is always in group 0).
struct Cutoff {
    std::string feature;
    double threshold = 0.0;
    uint32_t partition = 0;
    double achieved_ba = 0.0; // after direction symmetrisation, in [0.5, 1]
};

/// The trained abstraction: cut-offs, categorical level sets, and the flip
/// universe with dense indices. Immutable once built.
struct AbstractionMap {
    std::vector<FeatureSchema> schema;                 // features in training order
    std::map<std::string, Cutoff> cutoffs;             // continuous features
    std::map<std::string, std::vector<std::string>> categorical_levels;
    std::vector<Flip> flips;                           // index -> flip
    std::vector<int> flip_feature;                     // index -> schema position
    std::vector<std::string> warnings;                 // dropped features etc.

    size_t size() const { return flips.size(); }
    int flip_index(const std::string& feature, const std::string& level) const;
    const std::vector<int>& flips_of_feature(size_t feature_pos) const;

    void rebuild_lookup();

private:
    std::unordered_map<std::string, int> index_;       // "feature\x1flevel" -> flip index
    std::vector<std::vector<int>> feature_flips_;      // schema position -> flip indices
};

/// Discrete encoding of every sample: per row, the sorted set of flip
/// indices (at most one per feature; missing cells contribute none).
struct FlipTable {
    std::vector<std::vector<int>> rows;
    size_t universe_size = 0;
};

/// All 2^(K-1) - 1 non-trivial class bipartitions, deduplicated by fixing
/// class 0 in group 0, in ascending bitmask order. K > 20 is rejected.
std::vector<uint32_t> enumerate_bipartitions(int k_classes);

/// Exhaustive search over (bipartition, midpoint) pairs for the cut-off with
/// the highest direction-symmetrised balanced accuracy of the rule
/// "value <= threshold predicts group 0". Rows with missing cells must be
/// excluded beforehand. Ties: smallest partition mask, then smallest
/// threshold. Throws if fewer than 2 distinct values are observed or no
/// partition has both groups populated.
Cutoff best_cutoff(const std::vector<double>& values, const std::vector<int>& labels,
                   const std::vector<uint32_t>& partitions);

struct AbstractionResult {
    AbstractionMap map;
    FlipTable table;
};

/// Learns the abstraction for a labeled dataset and encodes every row.
/// Continuous features: _D iff value <= threshold, _U otherwise.
/// Categorical features: one flip per observed level, named "feature_level".
/// Constant/degenerate features are dropped with a warning.
AbstractionResult abstract_dataset(const Dataset& d);

struct EncodeOutcome {
    std::vector<int> flips; // sorted ascending
    std::vector<std::string> warnings;
};

/// Encodes one raw row (cells in map.schema order) against a trained map.
/// Unseen categorical levels produce no flip plus a warning record.
EncodeOutcome encode(const std::vector<Cell>& sample, const AbstractionMap& map);

/// Encodes a whole dataset whose schema must match the map's feature names.
FlipTable encode_dataset(const Dataset& d, const AbstractionMap& map,
                         std::vector<std::string>* warnings = nullptr);

std::string abstraction_to_json(const AbstractionMap& map);
AbstractionMap abstraction_from_json(const std::string& json_text);

} // namespace cactus
