#include "cactus/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace cactus {

int Dataset::feature_index(const std::string& name) const {
    for (size_t i = 0; i < schema.size(); ++i)
        if (schema[i].name == name) return static_cast<int>(i);
    return -1;
}

double Dataset::missing_fraction(size_t feature) const {
    const auto& col = columns.at(feature);
    if (col.empty()) return 1.0;
    size_t miss = 0;
    for (const Cell& c : col) miss += c.missing ? 1 : 0;
    return static_cast<double>(miss) / static_cast<double>(col.size());
}

size_t Dataset::observed_count(size_t feature) const {
    const auto& col = columns.at(feature);
    size_t n = 0;
    for (const Cell& c : col) n += c.missing ? 0 : 1;
    return n;
}

std::vector<Cell> Dataset::row(size_t r) const {
    std::vector<Cell> out;
    out.reserve(columns.size());
    for (const auto& col : columns) out.push_back(col.at(r));
    return out;
}

void Dataset::validate() const {
    if (schema.size() != columns.size())
        throw Error("dataset: schema/column count mismatch");
    std::unordered_set<std::string> names;
    for (const auto& f : schema)
        if (!names.insert(f.name).second)
            throw Error("dataset: duplicate feature name '" + f.name + "'");
    const size_t n = n_rows();
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i].size() != n)
            throw Error("dataset: column '" + schema[i].name + "' has " +
                        std::to_string(columns[i].size()) + " cells, expected " + std::to_string(n));
    if (labeled()) {
        if (labels.size() != n)
            throw Error("dataset: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(n) + " rows");
        if (class_names.size() < 2) throw Error("dataset: needs at least 2 classes");
        std::vector<bool> seen(class_names.size(), false);
        for (int y : labels) {
            if (y < 0 || static_cast<size_t>(y) >= class_names.size())
                throw Error("dataset: label index " + std::to_string(y) + " out of range");
            seen[static_cast<size_t>(y)] = true;
        }
        for (size_t k = 0; k < seen.size(); ++k)
            if (!seen[k]) throw Error("dataset: class '" + class_names[k] + "' has no rows");
    }
    if (n == 0) throw Error("dataset: empty (no rows)");
}

Dataset Dataset::subset_rows(const std::vector<size_t>& rows) const {
    Dataset out;
    out.schema = schema;
    out.class_names = class_names;
    out.label_column = label_column;
    out.columns.resize(columns.size());
    for (size_t f = 0; f < columns.size(); ++f) {
        out.columns[f].reserve(rows.size());
        for (size_t r : rows) out.columns[f].push_back(columns[f].at(r));
    }
    if (labeled()) {
        out.labels.reserve(rows.size());
        for (size_t r : rows) out.labels.push_back(labels.at(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schema config
// ---------------------------------------------------------------------------

SchemaConfig parse_schema_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw Error(std::string("schema config: invalid JSON: ") + e.what());
    }
    SchemaConfig config;
    if (j.contains("label_column")) config.label_column = j.at("label_column").get<std::string>();
    if (j.contains("missing_markers"))
        config.missing_markers = j.at("missing_markers").get<std::vector<std::string>>();
    if (j.contains("categorical"))
        config.categorical = j.at("categorical").get<std::vector<std::string>>();
    if (j.contains("continuous"))
        config.continuous = j.at("continuous").get<std::vector<std::string>>();
    if (j.contains("excluded")) config.excluded = j.at("excluded").get<std::vector<std::string>>();
    for (const auto& name : config.categorical)
        if (std::find(config.continuous.begin(), config.continuous.end(), name) !=
            config.continuous.end())
            throw Error("schema config: feature '" + name + "' is both categorical and continuous");
    return config;
}

SchemaConfig load_schema_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("schema config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_schema_config(ss.str());
}

std::string schema_config_to_json(const SchemaConfig& config) {
    nlohmann::json j;
    j["label_column"] = config.label_column;
    j["missing_markers"] = config.missing_markers;
    j["categorical"] = config.categorical;
    j["continuous"] = config.continuous;
    j["excluded"] = config.excluded;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// CSV parsing (RFC 4180: quoted fields, "" escapes, CR LF and LF rows)
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    size_t i = 0;
    // Skip a UTF-8 BOM if present.
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            field_started = true; // next field exists even if empty
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
            break;
        case '\n':
            end_record();
            break;
        default:
            field += c;
            field_started = true;
            break;
        }
    }
    if (in_quotes) throw Error("csv: unterminated quoted field at end of input");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

bool is_integer_value(double v) {
    return std::isfinite(v) && std::floor(v) == v;
}

} // namespace

FeatureKind detect_kind(const std::vector<Cell>& column_values) {
    std::set<double> distinct;
    size_t observed = 0;
    bool all_integer = true;
    for (const Cell& c : column_values) {
        if (c.missing) continue;
        ++observed;
        if (!c.numeric || !is_integer_value(c.number)) {
            all_integer = false;
        } else {
            distinct.insert(c.number);
        }
    }
    if (observed == 0) throw Error("detect_kind: no observed values");
    if (all_integer && distinct.size() <= 10) return FeatureKind::Categorical;
    return FeatureKind::Continuous;
}

Dataset parse_csv(const std::string& content, const SchemaConfig& config, LabelPolicy policy) {
    auto records = parse_csv_records(content);
    if (records.empty()) throw Error("csv: empty input (no header row)");

    const auto& header = records.front();
    std::unordered_map<std::string, size_t> col_of;
    for (size_t i = 0; i < header.size(); ++i) {
        if (!col_of.emplace(header[i], i).second)
            throw Error("csv: duplicate column name '" + header[i] + "'");
    }

    int label_col = -1;
    if (!config.label_column.empty()) {
        auto it = col_of.find(config.label_column);
        if (it != col_of.end()) label_col = static_cast<int>(it->second);
    }
    if (label_col < 0 && policy == LabelPolicy::Required)
        throw Error("csv: label column '" + config.label_column + "' not found in header");

    std::unordered_set<std::string> markers;
    for (const auto& m : config.missing_markers) markers.insert(lowercase(m));
    std::unordered_set<std::string> excluded(config.excluded.begin(), config.excluded.end());

    Dataset d;
    d.label_column = config.label_column;
    std::vector<size_t> feature_cols;
    for (size_t i = 0; i < header.size(); ++i) {
        if (static_cast<int>(i) == label_col) continue;
        if (excluded.count(header[i])) continue;
        feature_cols.push_back(i);
        d.schema.push_back(FeatureSchema{header[i], FeatureKind::Continuous, false});
    }
    d.columns.resize(feature_cols.size());

    const size_t n_rows = records.size() - 1;
    std::unordered_map<std::string, int> class_index;
    for (size_t r = 0; r < n_rows; ++r) {
        const auto& rec = records[r + 1];
        if (rec.size() != header.size())
            throw Error("csv: row " + std::to_string(r + 2) + " has " +
                        std::to_string(rec.size()) + " fields, expected " +
                        std::to_string(header.size()));
        for (size_t f = 0; f < feature_cols.size(); ++f) {
            const std::string& raw = rec[feature_cols[f]];
            if (markers.count(lowercase(raw)))
                d.columns[f].push_back(Cell::make_missing());
            else
                d.columns[f].push_back(Cell::make_text(raw));
        }
        if (label_col >= 0) {
            const std::string& raw = rec[static_cast<size_t>(label_col)];
            if (markers.count(lowercase(raw)))
                throw Error("csv: missing label at row " + std::to_string(r + 2));
            auto it = class_index.find(raw);
            if (it == class_index.end()) {
                it = class_index.emplace(raw, static_cast<int>(d.class_names.size())).first;
                d.class_names.push_back(raw);
            }
            d.labels.push_back(it->second);
        }
    }
    if (n_rows == 0) throw Error("csv: no data rows");

    // Kind resolution: config override wins, otherwise auto-detect.
    std::unordered_set<std::string> force_cat(config.categorical.begin(), config.categorical.end());
    std::unordered_set<std::string> force_cont(config.continuous.begin(), config.continuous.end());
    for (size_t f = 0; f < d.schema.size(); ++f) {
        auto& fs = d.schema[f];
        if (force_cat.count(fs.name)) {
            fs.kind = FeatureKind::Categorical;
            fs.declared = true;
        } else if (force_cont.count(fs.name)) {
            fs.kind = FeatureKind::Continuous;
            fs.declared = true;
        } else if (d.observed_count(f) > 0) {
            fs.kind = detect_kind(d.columns[f]);
        } else {
            fs.kind = FeatureKind::Continuous; // degenerate; dropped at filter time
        }
    }

    // Continuous columns must parse numerically.
    for (size_t f = 0; f < d.schema.size(); ++f) {
        if (d.schema[f].kind != FeatureKind::Continuous) continue;
        for (size_t r = 0; r < n_rows; ++r) {
            const Cell& c = d.columns[f][r];
            if (!c.missing && !c.numeric)
                throw Error("csv: non-numeric value '" + c.text + "' in continuous column '" +
                            d.schema[f].name + "' at row " + std::to_string(r + 2));
        }
    }

    if (label_col >= 0 && d.class_names.size() < 2)
        throw Error("csv: label column '" + config.label_column + "' has fewer than 2 classes");
    d.validate();
    return d;
}

Dataset load_csv(const std::string& path, const SchemaConfig& config, LabelPolicy policy) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("csv: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), config, policy);
}

std::string dataset_to_csv(const Dataset& d, const std::string& missing_marker) {
    std::string out;
    for (size_t f = 0; f < d.schema.size(); ++f) {
        if (f) out += ',';
        out += csv_quote(d.schema[f].name);
    }
    if (d.labeled()) {
        if (!d.schema.empty()) out += ',';
        out += csv_quote(d.label_column.empty() ? "class" : d.label_column);
    }
    out += '\n';
    for (size_t r = 0; r < d.n_rows(); ++r) {
        for (size_t f = 0; f < d.columns.size(); ++f) {
            if (f) out += ',';
            const Cell& c = d.columns[f][r];
            out += csv_quote(c.missing ? missing_marker : c.text);
        }
        if (d.labeled()) {
            if (!d.columns.empty()) out += ',';
            out += csv_quote(d.class_names.at(static_cast<size_t>(d.labels[r])));
        }
        out += '\n';
    }
    return out;
}

void save_csv(const Dataset& d, const std::string& path, const std::string& missing_marker) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("csv: cannot write '" + path + "'");
    out << dataset_to_csv(d, missing_marker);
    if (!out) throw Error("csv: write failed for '" + path + "'");
}

Dataset apply_filter(const Dataset& d, const FilterSpec& f, const FeatureRanks* ranks) {
    if (f.max_missing_fraction < 0.0 || f.max_missing_fraction > 1.0)
        throw Error("filter: max_missing_fraction must be in [0,1]");
    std::unordered_set<std::string> excluded(f.excluded.begin(), f.excluded.end());
    for (const auto& name : f.excluded)
        if (d.feature_index(name) < 0)
            throw Error("filter: excluded feature '" + name + "' not in dataset");

    std::vector<size_t> keep;
    std::string last_constraint = "exclusion list";
    for (size_t i = 0; i < d.schema.size(); ++i) {
        if (excluded.count(d.schema[i].name)) continue;
        if (d.observed_count(i) == 0) {
            last_constraint = "zero observed values";
            continue;
        }
        if (d.missing_fraction(i) > f.max_missing_fraction) {
            last_constraint = "max_missing_fraction " + fmt_double(f.max_missing_fraction);
            continue;
        }
        keep.push_back(i);
    }

    if (f.keep_top_k_by_rank) {
        if (!ranks) throw Error("filter: keep_top_k_by_rank requires feature ranks");
        const size_t k = *f.keep_top_k_by_rank;
        // Highest average rank first; ties resolved by feature name.
        std::vector<size_t> order = keep;
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            auto ra = ranks->find(d.schema[a].name);
            auto rb = ranks->find(d.schema[b].name);
            double va = ra == ranks->end() ? 0.0 : ra->second;
            double vb = rb == ranks->end() ? 0.0 : rb->second;
            if (va != vb) return va > vb;
            return d.schema[a].name < d.schema[b].name;
        });
        if (order.size() > k) order.resize(k);
        std::sort(order.begin(), order.end()); // keep schema order
        keep = std::move(order);
        last_constraint = "keep_top_k_by_rank " + std::to_string(k);
    }

    if (keep.empty())
        throw Error("filter: no features survive (last constraint applied: " + last_constraint + ")");

    Dataset out;
    out.labels = d.labels;
    out.class_names = d.class_names;
    out.label_column = d.label_column;
    for (size_t i : keep) {
        out.schema.push_back(d.schema[i]);
        out.columns.push_back(d.columns[i]);
    }
    return out;
}

} // namespace cactus
