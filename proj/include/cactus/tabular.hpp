#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cactus/common.hpp"

namespace cactus {

enum class FeatureKind { Continuous, Categorical };

inline const char* kind_name(FeatureKind k) {
    return k == FeatureKind::Continuous ? "continuous" : "categorical";
}

struct FeatureSchema {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    bool declared = false; // kind forced by config rather than auto-detected
};

/// One table cell. `text` is the canonical carrier (what load_csv read and
/// what save_csv writes back); numeric cells additionally carry the parsed
/// value. A missing cell has no text and no number.
struct Cell {
    bool missing = true;
    bool numeric = false;
    double number = 0.0;
    std::string text;

    static Cell make_missing() { return Cell{}; }

    static Cell make_number(double v) {
        Cell c;
        c.missing = false;
        c.numeric = true;
        c.number = v;
        c.text = fmt_double(v);
        return c;
    }

    static Cell make_text(std::string t) {
        Cell c;
        c.missing = false;
        c.text = std::move(t);
        if (auto v = parse_double(c.text)) {
            c.numeric = true;
            c.number = *v;
        }
        return c;
    }

    bool operator==(const Cell& o) const {
        if (missing != o.missing) return false;
        if (missing) return true;
        return text == o.text;
    }

    /// Canonical categorical level: shortest numeric form when the cell is
    /// numeric ("2", not "2.0"), raw text otherwise.
    std::string level() const { return numeric ? fmt_double(number) : text; }
};

/// Column-major table with explicit missing cells and (optionally) labels.
/// Immutable by convention after load; safe to share across readers.
struct Dataset {
    std::vector<FeatureSchema> schema;
    std::vector<std::vector<Cell>> columns; // [feature][row]
    std::vector<int> labels;                // empty when unlabeled
    std::vector<std::string> class_names;   // first-appearance order
    std::string label_column;

    size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
    size_t n_features() const { return schema.size(); }
    size_t n_classes() const { return class_names.size(); }
    bool labeled() const { return !labels.empty(); }

    int feature_index(const std::string& name) const;
    double missing_fraction(size_t feature) const;
    size_t observed_count(size_t feature) const;

    std::vector<Cell> row(size_t r) const;

    /// Checks the structural invariants; throws Error on violation.
    void validate() const;

    /// Row subset in the given order (labels follow when present).
    Dataset subset_rows(const std::vector<size_t>& rows) const;
};

struct SchemaConfig {
    std::string label_column;
    std::vector<std::string> missing_markers = {"", "NA", "NaN"}; // case-insensitive
    std::vector<std::string> categorical; // kind overrides
    std::vector<std::string> continuous;
    std::vector<std::string> excluded;    // dropped at load
};

/// Parses the JSON schema-config document (keys: label_column,
/// missing_markers, categorical, continuous, excluded).
SchemaConfig parse_schema_config(const std::string& json_text);
SchemaConfig load_schema_config(const std::string& path);
std::string schema_config_to_json(const SchemaConfig& config);

enum class LabelPolicy { Required, Optional };

/// Auto kind rule: categorical iff every observed value is an integer and
/// there are at most 10 distinct ones. Pure in the observed multiset.
/// Throws on zero observed values.
FeatureKind detect_kind(const std::vector<Cell>& column_values);

Dataset load_csv(const std::string& path, const SchemaConfig& config,
                 LabelPolicy labels = LabelPolicy::Required);
Dataset parse_csv(const std::string& content, const SchemaConfig& config,
                  LabelPolicy labels = LabelPolicy::Required);

/// RFC-4180 output; missing cells become the first configured marker.
void save_csv(const Dataset& d, const std::string& path, const std::string& missing_marker = "");
std::string dataset_to_csv(const Dataset& d, const std::string& missing_marker = "");

struct FilterSpec {
    std::vector<std::string> excluded;
    double max_missing_fraction = 1.0;
    std::optional<size_t> keep_top_k_by_rank;
};

/// Feature -> average rank, as produced by the explain module.
using FeatureRanks = std::map<std::string, double>;

/// Drops excluded features, features with missing fraction above the
/// threshold, and features with zero observed values; optionally keeps only
/// the top-k features by average rank. Rows and labels are untouched.
Dataset apply_filter(const Dataset& d, const FilterSpec& f,
                     const FeatureRanks* ranks = nullptr);

} // namespace cactus
