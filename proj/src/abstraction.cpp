#include "cactus/abstraction.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cactus/parallel.hpp"

namespace cactus {

int AbstractionMap::flip_index(const std::string& feature, const std::string& level) const {
    auto it = index_.find(feature + '\x1f' + level);
    return it == index_.end() ? -1 : it->second;
}

const std::vector<int>& AbstractionMap::flips_of_feature(size_t feature_pos) const {
    return feature_flips_.at(feature_pos);
}

void AbstractionMap::rebuild_lookup() {
    index_.clear();
    feature_flips_.assign(schema.size(), {});
    for (size_t i = 0; i < flips.size(); ++i) {
        index_[flips[i].feature + '\x1f' + flips[i].level] = static_cast<int>(i);
        feature_flips_.at(static_cast<size_t>(flip_feature[i])).push_back(static_cast<int>(i));
    }
}

std::vector<uint32_t> enumerate_bipartitions(int k_classes) {
    if (k_classes < 2) throw Error("bipartitions: need at least 2 classes");
    if (k_classes > 20) throw Error("bipartitions: K > 20 not supported (2^(K-1) partitions)");
    // Class 0 stays in group 0, so masks range over the remaining K-1 bits.
    const uint32_t count = (1u << (k_classes - 1)) - 1;
    std::vector<uint32_t> masks;
    masks.reserve(count);
    for (uint32_t m = 1; m <= count; ++m) masks.push_back(m << 1);
    return masks;
}

Cutoff best_cutoff(const std::vector<double>& values, const std::vector<int>& labels,
                   const std::vector<uint32_t>& partitions) {
    if (values.size() != labels.size()) throw Error("best_cutoff: values/labels size mismatch");
    const size_t n = values.size();

    // Sort rows by value once; every partition is then a single sweep.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });

    std::vector<double> sorted_values;
    sorted_values.reserve(n);
    for (size_t i : order) sorted_values.push_back(values[i]);

    size_t distinct = n ? 1 : 0;
    for (size_t i = 1; i < n; ++i)
        if (sorted_values[i] != sorted_values[i - 1]) ++distinct;
    if (distinct < 2) throw Error("best_cutoff: fewer than 2 distinct observed values");

    bool found = false;
    Cutoff best;
    for (uint32_t mask : partitions) {
        size_t total0 = 0, total1 = 0;
        for (int y : labels) ((mask >> y) & 1u ? total1 : total0) += 1;
        if (total0 == 0 || total1 == 0) continue; // partition not represented here

        // cum0/cum1 = rows with value <= current candidate, per group.
        size_t cum0 = 0, cum1 = 0;
        for (size_t i = 0; i < n; ++i) {
            int y = labels[order[i]];
            ((mask >> y) & 1u ? cum1 : cum0) += 1;
            if (i + 1 >= n || sorted_values[i + 1] == sorted_values[i]) continue;
            const double threshold = (sorted_values[i] + sorted_values[i + 1]) / 2.0;
            const double recall0 = static_cast<double>(cum0) / static_cast<double>(total0);
            const double recall1 =
                static_cast<double>(total1 - cum1) / static_cast<double>(total1);
            const double ba = (recall0 + recall1) / 2.0;
            const double symmetrized = std::max(ba, 1.0 - ba);
            // Strict improvement keeps the first (smallest mask, smallest
            // threshold) maximiser, which is the documented tie rule.
            if (!found || symmetrized > best.achieved_ba) {
                found = true;
                best.threshold = threshold;
                best.partition = mask;
                best.achieved_ba = symmetrized;
            }
        }
    }
    if (!found) throw Error("best_cutoff: no partition has both groups populated");
    return best;
}

namespace {

bool level_less(const std::string& a, const std::string& b) {
    auto na = parse_double(a);
    auto nb = parse_double(b);
    if (na && nb) {
        if (*na != *nb) return *na < *nb;
        return a < b;
    }
    if (na != nb) return static_cast<bool>(na); // numeric levels before text ones
    return a < b;
}

} // namespace

AbstractionResult abstract_dataset(const Dataset& d) {
    d.validate();
    if (!d.labeled()) throw Error("abstract: dataset has no labels");

    const size_t n_features = d.n_features();
    const auto partitions = enumerate_bipartitions(static_cast<int>(d.n_classes()));

    struct PerFeature {
        bool dropped = false;
        std::string warning;
        Cutoff cutoff;                    // continuous only
        std::vector<std::string> levels;  // categorical only
    };
    std::vector<PerFeature> results(n_features);

    parallel_for(n_features, [&](size_t f) {
        PerFeature& out = results[f];
        const auto& col = d.columns[f];
        if (d.schema[f].kind == FeatureKind::Continuous) {
            std::vector<double> values;
            std::vector<int> labels;
            for (size_t r = 0; r < col.size(); ++r) {
                if (col[r].missing) continue;
                values.push_back(col[r].number);
                labels.push_back(d.labels[r]);
            }
            size_t distinct = 0;
            std::vector<double> sorted = values;
            std::sort(sorted.begin(), sorted.end());
            for (size_t i = 0; i < sorted.size(); ++i)
                if (i == 0 || sorted[i] != sorted[i - 1]) ++distinct;
            if (distinct < 2) {
                out.dropped = true;
                out.warning = "feature '" + d.schema[f].name +
                              "' dropped: constant over observed values";
                return;
            }
            try {
                out.cutoff = best_cutoff(values, labels, partitions);
                out.cutoff.feature = d.schema[f].name;
            } catch (const Error& e) {
                out.dropped = true;
                out.warning = "feature '" + d.schema[f].name + "' dropped: " + e.what();
            }
        } else {
            std::vector<std::string> levels;
            for (const Cell& c : col)
                if (!c.missing) levels.push_back(c.level());
            std::sort(levels.begin(), levels.end(), level_less);
            levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
            if (levels.empty()) {
                out.dropped = true;
                out.warning =
                    "feature '" + d.schema[f].name + "' dropped: no observed values";
                return;
            }
            out.levels = std::move(levels);
        }
    });

    AbstractionResult res;
    AbstractionMap& map = res.map;
    for (size_t f = 0; f < n_features; ++f) {
        const PerFeature& pf = results[f];
        if (pf.dropped) {
            map.warnings.push_back(pf.warning);
            continue;
        }
        const int pos = static_cast<int>(map.schema.size());
        map.schema.push_back(d.schema[f]);
        if (d.schema[f].kind == FeatureKind::Continuous) {
            map.cutoffs[d.schema[f].name] = pf.cutoff;
            map.flips.push_back(Flip{d.schema[f].name, "D"});
            map.flip_feature.push_back(pos);
            map.flips.push_back(Flip{d.schema[f].name, "U"});
            map.flip_feature.push_back(pos);
        } else {
            map.categorical_levels[d.schema[f].name] = pf.levels;
            for (const auto& level : pf.levels) {
                map.flips.push_back(Flip{d.schema[f].name, level});
                map.flip_feature.push_back(pos);
            }
        }
    }
    if (map.flips.empty()) throw Error("abstract: no usable features left");
    map.rebuild_lookup();

    // Encode the training rows against the retained features.
    res.table = encode_dataset(d, map, nullptr);
    return res;
}

EncodeOutcome encode(const std::vector<Cell>& sample, const AbstractionMap& map) {
    if (sample.size() != map.schema.size())
        throw Error("encode: sample has " + std::to_string(sample.size()) +
                    " cells, map expects " + std::to_string(map.schema.size()));
    EncodeOutcome out;
    for (size_t f = 0; f < map.schema.size(); ++f) {
        const Cell& c = sample[f];
        if (c.missing) continue;
        const auto& fs = map.schema[f];
        if (fs.kind == FeatureKind::Continuous) {
            const Cutoff& cut = map.cutoffs.at(fs.name);
            const char* level = c.number <= cut.threshold ? "D" : "U";
            out.flips.push_back(map.flip_index(fs.name, level));
        } else {
            int idx = map.flip_index(fs.name, c.level());
            if (idx < 0) {
                out.warnings.push_back("feature '" + fs.name + "': unseen level '" +
                                       c.level() + "' skipped");
                continue;
            }
            out.flips.push_back(idx);
        }
    }
    std::sort(out.flips.begin(), out.flips.end());
    return out;
}

FlipTable encode_dataset(const Dataset& d, const AbstractionMap& map,
                         std::vector<std::string>* warnings) {
    // The dataset may carry extra features (e.g. untrained ones); match by name.
    std::vector<int> source_col(map.schema.size(), -1);
    for (size_t f = 0; f < map.schema.size(); ++f) {
        source_col[f] = d.feature_index(map.schema[f].name);
        if (source_col[f] < 0)
            throw Error("encode: dataset is missing feature '" + map.schema[f].name + "'");
    }
    FlipTable table;
    table.universe_size = map.size();
    table.rows.resize(d.n_rows());
    std::vector<std::vector<std::string>> row_warnings(warnings ? d.n_rows() : 0);
    parallel_for(d.n_rows(), [&](size_t r) {
        std::vector<Cell> sample;
        sample.reserve(map.schema.size());
        for (size_t f = 0; f < map.schema.size(); ++f)
            sample.push_back(d.columns[static_cast<size_t>(source_col[f])][r]);
        EncodeOutcome out = encode(sample, map);
        table.rows[r] = std::move(out.flips);
        if (warnings && !out.warnings.empty()) row_warnings[r] = std::move(out.warnings);
    });
    if (warnings)
        for (size_t r = 0; r < row_warnings.size(); ++r)
            for (auto& w : row_warnings[r])
                warnings->push_back("row " + std::to_string(r) + ": " + w);
    return table;
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

std::string abstraction_to_json(const AbstractionMap& map) {
    nlohmann::json features = nlohmann::json::object();
    nlohmann::json feature_order = nlohmann::json::array();
    for (const auto& fs : map.schema) {
        feature_order.push_back(fs.name);
        nlohmann::json entry;
        entry["kind"] = kind_name(fs.kind);
        entry["declared"] = fs.declared;
        if (fs.kind == FeatureKind::Continuous) {
            const Cutoff& c = map.cutoffs.at(fs.name);
            entry["threshold"] = c.threshold;
            entry["partition"] = c.partition;
            entry["achieved_ba"] = c.achieved_ba;
        } else {
            entry["levels"] = map.categorical_levels.at(fs.name);
        }
        features[fs.name] = entry;
    }
    nlohmann::json j;
    j["feature_order"] = feature_order;
    j["features"] = features;
    j["warnings"] = map.warnings;
    return j.dump(2) + "\n";
}

AbstractionMap abstraction_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw Error(std::string("abstraction: invalid JSON: ") + e.what());
    }
    AbstractionMap map;
    for (const auto& name_json : j.at("feature_order")) {
        const std::string name = name_json.get<std::string>();
        const auto& entry = j.at("features").at(name);
        FeatureSchema fs;
        fs.name = name;
        fs.declared = entry.value("declared", false);
        const int pos = static_cast<int>(map.schema.size());
        if (entry.at("kind").get<std::string>() == "continuous") {
            fs.kind = FeatureKind::Continuous;
            Cutoff c;
            c.feature = name;
            c.threshold = entry.at("threshold").get<double>();
            c.partition = entry.at("partition").get<uint32_t>();
            c.achieved_ba = entry.at("achieved_ba").get<double>();
            map.cutoffs[name] = c;
            map.schema.push_back(fs);
            map.flips.push_back(Flip{name, "D"});
            map.flip_feature.push_back(pos);
            map.flips.push_back(Flip{name, "U"});
            map.flip_feature.push_back(pos);
        } else {
            fs.kind = FeatureKind::Categorical;
            auto levels = entry.at("levels").get<std::vector<std::string>>();
            map.categorical_levels[name] = levels;
            map.schema.push_back(fs);
            for (const auto& level : levels) {
                map.flips.push_back(Flip{name, level});
                map.flip_feature.push_back(pos);
            }
        }
    }
    if (j.contains("warnings")) map.warnings = j.at("warnings").get<std::vector<std::string>>();
    map.rebuild_lookup();
    return map;
}

} // namespace cactus
