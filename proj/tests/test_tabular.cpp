#include <doctest.h>

#include "cactus/harness.hpp"
#include "cactus/tabular.hpp"

using namespace cactus;

namespace {

SchemaConfig basic_config(const std::string& label = "class") {
    SchemaConfig c;
    c.label_column = label;
    return c;
}

} // namespace

TEST_CASE("load_csv turns configured markers into missing cells") {
    const std::string csv = "a,b,c,class\n1.5,,2,0\n2.5,1,3,1\n3.5,2,4,0\n";
    Dataset d = parse_csv(csv, basic_config());
    CHECK(d.n_rows() == 3);
    CHECK(d.n_features() == 3);
    CHECK(d.columns[1][0].missing);
    CHECK_FALSE(d.columns[0][0].missing);
    CHECK(d.columns[0][0].number == doctest::Approx(1.5));
}

TEST_CASE("load_csv maps label values to dense indices in first-appearance order") {
    std::string csv = "x,amd_stage\n";
    for (int stage = 0; stage <= 4; ++stage)
        for (int r = 0; r < 2; ++r)
            csv += std::to_string(stage) + ".5," + std::to_string(stage) + "\n";
    Dataset d = parse_csv(csv, basic_config("amd_stage"));
    CHECK(d.n_classes() == 5);
    CHECK(d.class_names == std::vector<std::string>{"0", "1", "2", "3", "4"});
    CHECK(d.labels[0] == 0);
    CHECK(d.labels[9] == 4);
}

TEST_CASE("columns holding few integer values auto-detect as categorical") {
    std::string csv = "ARMS2_rs3750846,class\n";
    for (int r = 0; r < 12; ++r)
        csv += std::to_string(r % 3) + "," + std::to_string(r % 2) + "\n";
    Dataset d = parse_csv(csv, basic_config());
    CHECK(d.schema[0].kind == FeatureKind::Categorical);
    CHECK_FALSE(d.schema[0].declared);
}

TEST_CASE("detect_kind") {
    auto cells = [](std::vector<std::string> raw) {
        std::vector<Cell> out;
        for (auto& s : raw) out.push_back(Cell::make_text(s));
        return out;
    };
    CHECK(detect_kind(cells({"0", "1", "2"})) == FeatureKind::Categorical);
    CHECK(detect_kind(cells({"0.5", "1.5"})) == FeatureKind::Continuous);

    // Exactly 10 distinct integers is still categorical; 11 is not.
    std::vector<std::string> ten, eleven;
    for (int i = 0; i < 10; ++i) ten.push_back(std::to_string(i));
    for (int i = 0; i < 11; ++i) eleven.push_back(std::to_string(i));
    CHECK(detect_kind(cells(ten)) == FeatureKind::Categorical);
    CHECK(detect_kind(cells(eleven)) == FeatureKind::Continuous);

    // Order-insensitive.
    CHECK(detect_kind(cells({"2", "0", "1", "1"})) == detect_kind(cells({"1", "1", "0", "2"})));

    std::vector<Cell> empty{Cell::make_missing()};
    CHECK_THROWS_AS(detect_kind(empty), Error);
}

TEST_CASE("config kind override beats auto-detection") {
    std::string csv = "snp,class\n0,0\n1,1\n2,0\n1,1\n";
    SchemaConfig config = basic_config();
    config.continuous = {"snp"};
    Dataset d = parse_csv(csv, config);
    CHECK(d.schema[0].kind == FeatureKind::Continuous);
    CHECK(d.schema[0].declared);
}

TEST_CASE("load_csv error positions") {
    SUBCASE("label column absent") {
        CHECK_THROWS_WITH_AS(parse_csv("a,b\n1,2\n", basic_config()),
                             doctest::Contains("label column"), Error);
    }
    SUBCASE("row length mismatch names the row") {
        CHECK_THROWS_WITH_AS(parse_csv("a,class\n1,0\n1,0,9\n", basic_config()),
                             doctest::Contains("row 3"), Error);
    }
    SUBCASE("non-numeric cell in continuous column") {
        // 11+ distinct values force the continuous auto-kind.
        std::string csv = "v,class\n";
        for (int i = 0; i < 11; ++i) csv += std::to_string(i) + "." + "25,0\n";
        csv += "oops,1\n";
        CHECK_THROWS_WITH_AS(parse_csv(csv, basic_config()), doctest::Contains("non-numeric"),
                             Error);
    }
    SUBCASE("single class rejected") {
        CHECK_THROWS_AS(parse_csv("a,class\n1,0\n2,0\n", basic_config()), Error);
    }
}

TEST_CASE("rfc4180 quoting round-trips") {
    const std::string csv =
        "name,\"with,comma\",class\n\"a\"\"b\",\"line\nbreak\",0\nplain,x,1\n";
    SchemaConfig config = basic_config();
    config.categorical = {"name", "with,comma"};
    Dataset d = parse_csv(csv, config);
    CHECK(d.columns[0][0].text == "a\"b");
    CHECK(d.columns[1][0].text == "line\nbreak");
    Dataset again = parse_csv(dataset_to_csv(d), config);
    CHECK(again.columns[0][0] == d.columns[0][0]);
    CHECK(again.columns[1][0] == d.columns[1][0]);
}

TEST_CASE("dataset round-trips through CSV including missing positions") {
    SyntheticSpec spec;
    spec.n_rows = 120;
    spec.n_continuous = 4;
    spec.n_categorical = 3;
    spec.n_informative = 3;
    spec.base_missing_fraction = 0.3;
    spec.seed = 7;
    Dataset d = synthesize(spec);

    SchemaConfig config = basic_config();
    for (const auto& fs : d.schema)
        (fs.kind == FeatureKind::Categorical ? config.categorical : config.continuous)
            .push_back(fs.name);
    Dataset back = parse_csv(dataset_to_csv(d), config);

    REQUIRE(back.n_rows() == d.n_rows());
    REQUIRE(back.n_features() == d.n_features());
    for (size_t f = 0; f < d.n_features(); ++f)
        for (size_t r = 0; r < d.n_rows(); ++r)
            CHECK(back.columns[f][r] == d.columns[f][r]);
    // Class indices follow first-appearance order, so compare label strings.
    for (size_t r = 0; r < d.n_rows(); ++r)
        CHECK(back.class_names[static_cast<size_t>(back.labels[r])] ==
              d.class_names[static_cast<size_t>(d.labels[r])]);
}

TEST_CASE("apply_filter missing-fraction boundary") {
    // Feature observed in 40% of rows (60% missing) is dropped at 0.5;
    // feature with 40% missing is kept.
    std::string csv = "mostly_missing,somewhat_missing,full,class\n";
    for (int r = 0; r < 10; ++r) {
        csv += (r < 4 ? std::to_string(r) + ".5" : "");
        csv += ",";
        csv += (r < 6 ? std::to_string(r) + ".5" : "");
        csv += "," + std::to_string(r) + ".1," + std::to_string(r % 2) + "\n";
    }
    Dataset d = parse_csv(csv, basic_config());
    FilterSpec f;
    f.max_missing_fraction = 0.5;
    Dataset filtered = apply_filter(d, f);
    CHECK(filtered.n_features() == 2);
    CHECK(filtered.feature_index("mostly_missing") == -1);
    CHECK(filtered.feature_index("somewhat_missing") != -1);
}

TEST_CASE("apply_filter keeps exactly k features by rank") {
    SyntheticSpec spec;
    spec.n_rows = 60;
    spec.n_continuous = 112;
    spec.n_categorical = 0;
    spec.n_informative = 0;
    spec.seed = 3;
    Dataset d = synthesize(spec);
    FeatureRanks ranks;
    for (size_t i = 0; i < d.n_features(); ++i)
        ranks[d.schema[i].name] = static_cast<double>(i % 17);
    FilterSpec f;
    f.keep_top_k_by_rank = 9;
    Dataset filtered = apply_filter(d, f, &ranks);
    CHECK(filtered.n_features() == 9);
    CHECK_THROWS_AS(apply_filter(d, f, nullptr), Error);
}

TEST_CASE("empty FilterSpec is the identity and filtering is idempotent") {
    std::string csv = "a,b,class\n1.5,2.5,0\n2.5,,1\n3.5,4.5,0\n";
    Dataset d = parse_csv(csv, basic_config());
    FilterSpec empty;
    Dataset once = apply_filter(d, empty);
    CHECK(once.n_features() == d.n_features());
    CHECK(dataset_to_csv(once) == dataset_to_csv(d));

    FilterSpec f;
    f.max_missing_fraction = 0.4;
    Dataset first = apply_filter(d, f);
    Dataset second = apply_filter(first, f);
    CHECK(dataset_to_csv(first) == dataset_to_csv(second));
}

TEST_CASE("filter that removes everything names the last constraint") {
    std::string csv = "a,class\n1.5,0\n2.5,1\n";
    Dataset d = parse_csv(csv, basic_config());
    FilterSpec f;
    f.excluded = {"a"};
    CHECK_THROWS_WITH_AS(apply_filter(d, f), doctest::Contains("no features survive"), Error);
}

TEST_CASE("all-missing features are dropped by the filter, not at load") {
    std::string csv = "ghost,real,class\n,1.5,0\n,2.5,1\n,3.5,0\n";
    Dataset d = parse_csv(csv, basic_config());
    CHECK(d.n_features() == 2); // load keeps the degenerate column
    FilterSpec f;
    Dataset filtered = apply_filter(d, f);
    CHECK(filtered.n_features() == 1);
    CHECK(filtered.schema[0].name == "real");
}
