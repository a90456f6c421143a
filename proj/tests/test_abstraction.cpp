#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cactus/abstraction.hpp"
#include "cactus/harness.hpp"
#include "cactus/rng.hpp"
#include "oracles.hpp"

using namespace cactus;

namespace {

Dataset two_class_dataset(const std::vector<double>& values, const std::vector<int>& labels) {
    Dataset d;
    d.schema.push_back(FeatureSchema{"x", FeatureKind::Continuous, false});
    d.label_column = "class";
    std::vector<Cell> col;
    for (double v : values) col.push_back(Cell::make_number(v));
    d.columns.push_back(col);
    d.labels = labels;
    int k = *std::max_element(labels.begin(), labels.end()) + 1;
    for (int c = 0; c < k; ++c) d.class_names.push_back(std::to_string(c));
    return d;
}

} // namespace

TEST_CASE("enumerate_bipartitions") {
    SUBCASE("K=2 has the single partition {class 1}") {
        auto masks = enumerate_bipartitions(2);
        REQUIRE(masks.size() == 1);
        CHECK(masks[0] == 0b10u);
    }
    SUBCASE("K=3 gives {1},{2},{1,2} ascending") {
        auto masks = enumerate_bipartitions(3);
        CHECK(masks == std::vector<uint32_t>{0b010, 0b100, 0b110});
    }
    SUBCASE("K=5 gives 15 partitions") { CHECK(enumerate_bipartitions(5).size() == 15); }
    SUBCASE("class 0 is never in group 1") {
        for (uint32_t mask : enumerate_bipartitions(6)) CHECK((mask & 1u) == 0u);
    }
    SUBCASE("guards") {
        CHECK_THROWS_AS(enumerate_bipartitions(1), Error);
        CHECK_THROWS_AS(enumerate_bipartitions(21), Error);
    }
}

TEST_CASE("best_cutoff on perfectly separable data") {
    // Group-0 rows at <= 5, group-1 rows at >= 6: midpoint 5.5, BA 1.
    std::vector<double> values = {1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> labels = {0, 0, 0, 0, 0, 1, 1, 1};
    Cutoff c = best_cutoff(values, labels, enumerate_bipartitions(2));
    CHECK(c.threshold == doctest::Approx(5.5));
    CHECK(c.achieved_ba == doctest::Approx(1.0));
    CHECK(c.partition == 0b10u);
}

TEST_CASE("age-style cutoff: at most the threshold flips down, above flips up") {
    // Observed 58 and 62 straddle the gap, so the midpoint lands on 60.
    std::vector<double> values = {50, 54, 58, 62, 66, 70};
    std::vector<int> labels = {0, 0, 0, 1, 1, 1};
    Dataset d = two_class_dataset(values, labels);
    d.schema[0].name = "Age";
    auto [map, table] = abstract_dataset(d);
    CHECK(map.cutoffs.at("Age").threshold == doctest::Approx(60.0));

    std::vector<Cell> at_60 = {Cell::make_number(60)};
    std::vector<Cell> at_61 = {Cell::make_number(61)};
    CHECK(encode(at_60, map).flips == std::vector<int>{map.flip_index("Age", "D")});
    CHECK(encode(at_61, map).flips == std::vector<int>{map.flip_index("Age", "U")});
}

TEST_CASE("best_cutoff matches the brute-force oracle on random instances") {
    Rng rng(8881);
    for (int trial = 0; trial < 30; ++trial) {
        const int k = 2 + static_cast<int>(rng.bounded(3)); // 2..4 classes
        const size_t n = 20 + rng.bounded(60);
        std::vector<double> values;
        std::vector<int> labels;
        for (size_t i = 0; i < n; ++i) {
            // Coarse grid so ties between candidates actually happen.
            values.push_back(std::floor(rng.uniform() * 12.0) / 2.0);
            labels.push_back(static_cast<int>(rng.bounded(static_cast<uint64_t>(k))));
        }
        for (int c = 0; c < k; ++c) labels[static_cast<size_t>(c)] = c; // every class present
        std::vector<double> distinct = values;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() < 2) continue;

        auto partitions = enumerate_bipartitions(k);
        Cutoff ours = best_cutoff(values, labels, partitions);
        Cutoff expected = oracle::brute_force_cutoff(values, labels, partitions);
        CHECK(ours.partition == expected.partition);
        CHECK(ours.threshold == expected.threshold);
        CHECK(ours.achieved_ba == expected.achieved_ba);
    }
}

TEST_CASE("best_cutoff properties") {
    Rng rng(512);
    std::vector<double> values;
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) {
        values.push_back(rng.normal());
        labels.push_back(static_cast<int>(rng.bounded(3)));
    }
    for (int c = 0; c < 3; ++c) labels[static_cast<size_t>(c)] = c;
    auto partitions = enumerate_bipartitions(3);
    Cutoff base = best_cutoff(values, labels, partitions);

    SUBCASE("row permutation leaves the result unchanged") {
        std::vector<size_t> perm(values.size());
        for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        rng.shuffle(perm);
        std::vector<double> pv;
        std::vector<int> pl;
        for (size_t i : perm) {
            pv.push_back(values[i]);
            pl.push_back(labels[i]);
        }
        Cutoff permuted = best_cutoff(pv, pl, partitions);
        CHECK(permuted.partition == base.partition);
        CHECK(permuted.threshold == base.threshold);
        CHECK(permuted.achieved_ba == base.achieved_ba);
    }

    SUBCASE("strictly increasing transform preserves partition and BA") {
        std::vector<double> tv;
        for (double v : values) tv.push_back(std::exp(v));
        Cutoff transformed = best_cutoff(tv, labels, partitions);
        CHECK(transformed.partition == base.partition);
        CHECK(transformed.achieved_ba == base.achieved_ba);
        // The threshold maps into the transformed gap between the same rows.
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        auto above = std::upper_bound(sorted.begin(), sorted.end(), base.threshold);
        REQUIRE(above != sorted.begin());
        REQUIRE(above != sorted.end());
        CHECK(transformed.threshold > std::exp(*(above - 1)));
        CHECK(transformed.threshold < std::exp(*above));
    }

    SUBCASE("errors on constant input") {
        std::vector<double> flat(10, 3.25);
        std::vector<int> fl(10, 0);
        fl[1] = 1;
        CHECK_THROWS_AS(best_cutoff(flat, fl, enumerate_bipartitions(2)), Error);
    }
}

TEST_CASE("abstract_dataset formats categorical flips like the SNP example") {
    Dataset d;
    d.schema.push_back(FeatureSchema{"ARMS2_rs3750846", FeatureKind::Categorical, true});
    d.label_column = "class";
    std::vector<Cell> col;
    for (int r = 0; r < 9; ++r) col.push_back(Cell::make_number(r % 3));
    d.columns.push_back(col);
    for (int r = 0; r < 9; ++r) d.labels.push_back(r % 2);
    d.class_names = {"0", "1"};

    auto [map, table] = abstract_dataset(d);
    REQUIRE(map.flips.size() == 3);
    CHECK(map.flips[0].name() == "ARMS2_rs3750846_0");
    CHECK(map.flips[1].name() == "ARMS2_rs3750846_1");
    CHECK(map.flips[2].name() == "ARMS2_rs3750846_2");

    std::vector<Cell> two = {Cell::make_number(2)};
    CHECK(encode(two, map).flips == std::vector<int>{2});
}

TEST_CASE("missing cells produce no flip and per-row flip counts match observed cells") {
    SyntheticSpec spec;
    spec.n_rows = 200;
    spec.n_continuous = 5;
    spec.n_categorical = 3;
    spec.n_informative = 4;
    spec.base_missing_fraction = 0.35;
    spec.seed = 99;
    Dataset d = synthesize(spec);
    auto [map, table] = abstract_dataset(d);
    REQUIRE(map.schema.size() == d.n_features()); // nothing constant at this size

    for (size_t r = 0; r < d.n_rows(); ++r) {
        size_t observed = 0;
        for (size_t f = 0; f < d.n_features(); ++f)
            observed += d.columns[f][r].missing ? 0 : 1;
        CHECK(table.rows[r].size() == observed);
    }
}

TEST_CASE("encode consistency, all-missing rows, and unseen levels") {
    Dataset d;
    d.schema.push_back(FeatureSchema{"num", FeatureKind::Continuous, false});
    d.schema.push_back(FeatureSchema{"cat", FeatureKind::Categorical, true});
    d.label_column = "class";
    std::vector<Cell> num, cat;
    for (int r = 0; r < 8; ++r) {
        num.push_back(Cell::make_number(r));
        cat.push_back(Cell::make_number(r % 2));
    }
    d.columns = {num, cat};
    for (int r = 0; r < 8; ++r) d.labels.push_back(r < 4 ? 0 : 1);
    d.class_names = {"0", "1"};
    auto [map, table] = abstract_dataset(d);

    SUBCASE("training row encodes to its flip-table row") {
        for (size_t r = 0; r < d.n_rows(); ++r)
            CHECK(encode(d.row(r), map).flips == table.rows[r]);
    }
    SUBCASE("all-missing row gives the empty set") {
        std::vector<Cell> blank = {Cell::make_missing(), Cell::make_missing()};
        CHECK(encode(blank, map).flips.empty());
    }
    SUBCASE("unseen categorical level warns and is skipped") {
        std::vector<Cell> row = {Cell::make_number(1), Cell::make_number(7)};
        EncodeOutcome out = encode(row, map);
        CHECK(out.flips.size() == 1);
        REQUIRE(out.warnings.size() == 1);
        CHECK(out.warnings[0].find("unseen level") != std::string::npos);
    }
    SUBCASE("feature count mismatch throws") {
        std::vector<Cell> row = {Cell::make_number(1)};
        CHECK_THROWS_AS(encode(row, map), Error);
    }
}

TEST_CASE("continuous flip assignment is monotone in the value") {
    Rng rng(4242);
    std::vector<double> values;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        values.push_back(rng.normal() * 2.0);
        labels.push_back(static_cast<int>(rng.bounded(2)));
    }
    labels[0] = 0;
    labels[1] = 1;
    Dataset d = two_class_dataset(values, labels);
    auto [map, table] = abstract_dataset(d);
    const double t = map.cutoffs.at("x").threshold;
    for (double probe : {-3.0, t - 1e-9, t, t + 1e-9, 3.0}) {
        std::vector<Cell> row = {Cell::make_number(probe)};
        auto flips = encode(row, map).flips;
        REQUIRE(flips.size() == 1);
        CHECK(map.flips[static_cast<size_t>(flips[0])].level == (probe <= t ? "D" : "U"));
    }
}

TEST_CASE("flip indices are stable across reruns and ordered deterministically") {
    SyntheticSpec spec;
    spec.n_rows = 80;
    spec.n_continuous = 3;
    spec.n_categorical = 2;
    spec.n_informative = 2;
    spec.seed = 5;
    Dataset d = synthesize(spec);
    auto first = abstract_dataset(d);
    auto second = abstract_dataset(d);
    REQUIRE(first.map.flips.size() == second.map.flips.size());
    for (size_t i = 0; i < first.map.flips.size(); ++i)
        CHECK(first.map.flips[i].name() == second.map.flips[i].name());

    // Schema order, D before U, categorical levels sorted.
    CHECK(first.map.flips[0].feature == "cont_00");
    CHECK(first.map.flips[0].level == "D");
    CHECK(first.map.flips[1].level == "U");
    const auto& levels = first.map.categorical_levels.at("cat_00");
    CHECK(std::is_sorted(levels.begin(), levels.end(), [](const auto& a, const auto& b) {
        return std::stod(a) < std::stod(b);
    }));
}

TEST_CASE("constant features are dropped with a warning") {
    Dataset d;
    d.schema.push_back(FeatureSchema{"flat", FeatureKind::Continuous, false});
    d.schema.push_back(FeatureSchema{"ok", FeatureKind::Continuous, false});
    d.label_column = "class";
    std::vector<Cell> flat, ok;
    for (int r = 0; r < 6; ++r) {
        flat.push_back(Cell::make_number(1.0));
        ok.push_back(Cell::make_number(r));
    }
    d.columns = {flat, ok};
    d.labels = {0, 0, 0, 1, 1, 1};
    d.class_names = {"0", "1"};
    auto [map, table] = abstract_dataset(d);
    CHECK(map.schema.size() == 1);
    REQUIRE(map.warnings.size() == 1);
    CHECK(map.warnings[0].find("flat") != std::string::npos);
}

TEST_CASE("abstraction map JSON round-trip") {
    SyntheticSpec spec;
    spec.n_rows = 100;
    spec.n_continuous = 3;
    spec.n_categorical = 2;
    spec.n_informative = 3;
    spec.seed = 11;
    Dataset d = synthesize(spec);
    auto [map, table] = abstract_dataset(d);
    AbstractionMap back = abstraction_from_json(abstraction_to_json(map));
    REQUIRE(back.flips.size() == map.flips.size());
    for (size_t i = 0; i < map.flips.size(); ++i) {
        CHECK(back.flips[i].name() == map.flips[i].name());
        CHECK(back.flip_feature[i] == map.flip_feature[i]);
    }
    for (const auto& [name, cutoff] : map.cutoffs) {
        CHECK(back.cutoffs.at(name).threshold == cutoff.threshold);
        CHECK(back.cutoffs.at(name).partition == cutoff.partition);
        CHECK(back.cutoffs.at(name).achieved_ba == cutoff.achieved_ba);
    }
    // Re-encoding with the reloaded map gives identical rows.
    FlipTable t2 = encode_dataset(d, back, nullptr);
    CHECK(t2.rows == table.rows);
}
