#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cactus/explain.hpp"
#include "cactus/harness.hpp"
#include "cactus/rng.hpp"
#include "oracles.hpp"

using namespace cactus;

namespace {

SignificanceProfile profile_from_sigma(const std::vector<std::vector<double>>& sigma_by_class) {
    SignificanceProfile p;
    p.n_classes = static_cast<int>(sigma_by_class.size());
    p.n_flips = sigma_by_class.front().size();
    for (auto& tensor : p.sigma) {
        tensor.assign(static_cast<size_t>(p.n_classes) * p.n_flips, 0.0);
        for (int c = 0; c < p.n_classes; ++c)
            for (size_t f = 0; f < p.n_flips; ++f)
                tensor[static_cast<size_t>(c) * p.n_flips + f] =
                    sigma_by_class[static_cast<size_t>(c)][f];
    }
    for (auto& b : p.confidence_bounds) b = {0.0, 1.0};
    return p;
}

ClassificationResult result_with(double confidence, int label, int k) {
    ClassificationResult r;
    r.label = label;
    r.confidence = confidence;
    r.scores.cost.assign(static_cast<size_t>(k), 0.0);
    return r;
}

struct TrainedFixture {
    Model model;
    Dataset data;
    std::vector<ClassificationResult> results;
};

TrainedFixture trained_fixture(uint64_t seed = 13) {
    SyntheticSpec spec;
    spec.n_rows = 400;
    spec.n_continuous = 6;
    spec.n_categorical = 2;
    spec.n_informative = 5;
    spec.class_separation = 2.0;
    spec.seed = seed;
    TrainedFixture fx;
    fx.data = synthesize(spec);
    fx.model = train_pipeline(fx.data, PageRankParams{});
    FlipTable t = encode_dataset(fx.data, fx.model.abstraction, nullptr);
    fx.results = classify_dataset(t, fx.model.profile, Metric::CPR);
    return fx;
}

} // namespace

TEST_CASE("flip_rank direct evaluations") {
    SUBCASE("constant sigma across classes ranks 0") {
        auto p = profile_from_sigma({{0.4}, {0.4}, {0.4}});
        CHECK(flip_rank(p, Metric::CPB, 0) == 0.0);
    }
    SUBCASE("K=3 spread (0.1, 0.4, 0.7) ranks 0.4") {
        auto p = profile_from_sigma({{0.1}, {0.4}, {0.7}});
        CHECK(flip_rank(p, Metric::CPB, 0) == doctest::Approx(0.4));
    }
    SUBCASE("invariant under class relabeling") {
        auto p = profile_from_sigma({{0.1}, {0.7}, {0.2}});
        auto q = profile_from_sigma({{0.7}, {0.2}, {0.1}});
        CHECK(flip_rank(p, Metric::CPB, 0) == doctest::Approx(flip_rank(q, Metric::CPB, 0)));
    }
}

TEST_CASE("flip_rank matches the naive pairwise oracle on random vectors") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.bounded(6));
        std::vector<std::vector<double>> sigma;
        std::vector<double> flat;
        for (int c = 0; c < k; ++c) {
            const double v = rng.uniform();
            sigma.push_back({v});
            flat.push_back(v);
        }
        auto p = profile_from_sigma(sigma);
        CHECK(flip_rank(p, Metric::CPB, 0) ==
              doctest::Approx(oracle::naive_flip_rank(flat)).epsilon(1e-12));
    }
}

TEST_CASE("feature_rank averages flip ranks") {
    AbstractionMap map;
    map.schema = {FeatureSchema{"x", FeatureKind::Continuous, false},
                  FeatureSchema{"g", FeatureKind::Categorical, false}};
    map.flips = {Flip{"x", "D"}, Flip{"x", "U"}, Flip{"g", "only"}};
    map.flip_feature = {0, 0, 1};
    map.rebuild_lookup();
    // Two classes; flip ranks are |a-b| directly.
    auto p = profile_from_sigma({{0.2, 0.5, 0.9}, {0.4, 0.1, 0.3}});
    CHECK(flip_rank(p, Metric::CPB, 0) == doctest::Approx(0.2));
    CHECK(flip_rank(p, Metric::CPB, 1) == doctest::Approx(0.4));
    CHECK(feature_rank(p, map, Metric::CPB, 0) == doctest::Approx(0.3));
    // Single-flip categorical equals its flip rank.
    CHECK(feature_rank(p, map, Metric::CPB, 1) == doctest::Approx(0.6));
}

TEST_CASE("rank_report structure and normalization") {
    auto fx = trained_fixture();
    const size_t top_k = std::min<size_t>(9, fx.model.abstraction.schema.size());
    RankReport report = rank_report(fx.model.profile, fx.model.abstraction,
                                    fx.model.class_names, Metric::CPR, top_k);
    CHECK(report.features.size() == top_k);

    SUBCASE("ordering is descending by avg_rank") {
        for (size_t i = 1; i < report.features.size(); ++i)
            CHECK(report.features[i - 1].avg_rank >= report.features[i].avg_rank);
    }
    SUBCASE("normalized significances sum to 1 (or all zero) per class") {
        for (const auto& feat : report.features)
            for (size_t c = 0; c < report.class_names.size(); ++c) {
                double sum = 0.0;
                bool any = false;
                for (const auto& flip : feat.flips) {
                    sum += flip.normalized_by_class[c];
                    any = any || flip.normalized_by_class[c] != 0.0;
                }
                if (any) CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            }
    }
    SUBCASE("zero-sigma feature normalizes to all zeros") {
        auto p = profile_from_sigma({{0.0, 0.0}, {0.0, 0.0}});
        AbstractionMap map;
        map.schema = {FeatureSchema{"x", FeatureKind::Continuous, false}};
        map.flips = {Flip{"x", "D"}, Flip{"x", "U"}};
        map.flip_feature = {0, 0};
        map.rebuild_lookup();
        RankReport r = rank_report(p, map, {"0", "1"}, Metric::CPB, 1);
        for (const auto& flip : r.features[0].flips)
            for (double v : flip.normalized_by_class) CHECK(v == 0.0);
    }
    SUBCASE("top_k beyond feature count throws") {
        CHECK_THROWS_AS(rank_report(fx.model.profile, fx.model.abstraction,
                                    fx.model.class_names, Metric::CPR, 99),
                        Error);
    }
}

TEST_CASE("top-k set is invariant under positive common scaling (ranks on raw sigma)") {
    auto fx = trained_fixture();
    RankReport base = rank_report(fx.model.profile, fx.model.abstraction, fx.model.class_names,
                                  Metric::CPB, 5);
    SignificanceProfile scaled = fx.model.profile;
    for (double& v : scaled.sigma[static_cast<size_t>(Metric::CPB)]) v *= 17.0;
    RankReport after = rank_report(scaled, fx.model.abstraction, fx.model.class_names,
                                   Metric::CPB, 5);
    for (size_t i = 0; i < base.features.size(); ++i) {
        CHECK(after.features[i].feature == base.features[i].feature);
        CHECK(after.features[i].avg_rank == doctest::Approx(base.features[i].avg_rank * 17.0));
    }
}

TEST_CASE("confidence_analysis bins, curves, coverage") {
    SUBCASE("all samples at confidence 100 occupy one bin; thresholds stay at 100") {
        std::vector<ClassificationResult> results;
        std::vector<int> labels;
        for (int i = 0; i < 20; ++i) {
            results.push_back(result_with(100.0, i % 2, 2));
            labels.push_back(i % 2);
        }
        auto report = confidence_analysis(results, labels, Metric::CPB);
        CHECK(report.bins.back().population == 20);
        for (size_t b = 0; b + 1 < report.bins.size(); ++b) CHECK(report.bins[b].population == 0);
        for (const auto& cov : report.coverage) {
            CHECK(cov.threshold == 100.0);
            CHECK(cov.achieved_fraction == 1.0);
        }
    }
    SUBCASE("uniform confidences put the 50% threshold near 50") {
        std::vector<ClassificationResult> results;
        std::vector<int> labels;
        for (int i = 0; i <= 100; ++i) {
            results.push_back(result_with(static_cast<double>(i), 0, 2));
            labels.push_back(i % 2);
        }
        auto report = confidence_analysis(results, labels, Metric::CPB);
        const auto& cov50 = report.coverage.back();
        REQUIRE(cov50.percent == 50);
        CHECK(cov50.threshold >= 40.0);
        CHECK(cov50.threshold <= 60.0);
    }
    SUBCASE("chance line is 1/K") {
        std::vector<ClassificationResult> results = {result_with(10, 0, 5),
                                                     result_with(20, 1, 5)};
        std::vector<int> labels = {0, 1};
        auto report = confidence_analysis(results, labels, Metric::CPB);
        CHECK(report.chance_line == doctest::Approx(0.2));
    }
    SUBCASE("empty cohort throws") {
        std::vector<ClassificationResult> none;
        std::vector<int> labels;
        CHECK_THROWS_AS(confidence_analysis(none, labels, Metric::CPB), Error);
    }
}

TEST_CASE("confidence_analysis on a trained cohort satisfies the cumulative invariants") {
    auto fx = trained_fixture();
    std::vector<int> labels = fx.data.labels;
    auto report = confidence_analysis(fx.results, labels, Metric::CPR);

    CHECK(report.cum_population_fraction.back() == 1.0);
    for (size_t b = 1; b < report.cum_population_fraction.size(); ++b)
        CHECK(report.cum_population_fraction[b] >= report.cum_population_fraction[b - 1]);

    // The final cumulative weighted BA is the plain cohort BA.
    std::vector<int> predicted;
    for (const auto& r : fx.results) predicted.push_back(r.label);
    const double cohort = balanced_accuracy(predicted, labels,
                                            static_cast<int>(fx.data.n_classes()));
    CHECK(std::fabs(report.cum_weighted_ba.back() - cohort) < 1e-12);

    // Coverage thresholds do not increase as the covered share grows.
    for (size_t i = 1; i < report.coverage.size(); ++i) {
        CHECK(report.coverage[i - 1].percent > report.coverage[i].percent);
        CHECK(report.coverage[i].threshold >= report.coverage[i - 1].threshold);
    }
}

TEST_CASE("emitted artifacts are deterministic and structurally sound") {
    namespace fs = std::filesystem;
    auto fx = trained_fixture();
    RankReport rank = rank_report(fx.model.profile, fx.model.abstraction, fx.model.class_names,
                                  Metric::CPR, 4);
    auto conf = confidence_analysis(fx.results, fx.data.labels, Metric::CPR);

    const std::string dir = (fs::temp_directory_path() / "cactus_explain_test").string();
    fs::remove_all(dir);
    emit_reports({rank}, {conf}, dir);
    auto slurp = [&](const std::string& name) {
        std::ifstream in(fs::path(dir) / name, std::ios::binary);
        REQUIRE(in);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string csv1 = slurp("ranks_CPR.csv");
    const std::string conf_csv1 = slurp("confidence_CPR.csv");
    const std::string svg1 = slurp("confidence_CPR.svg");

    emit_reports({rank}, {conf}, dir); // second run, same bytes
    CHECK(slurp("ranks_CPR.csv") == csv1);
    CHECK(slurp("confidence_CPR.csv") == conf_csv1);
    CHECK(slurp("confidence_CPR.svg") == svg1);

    SUBCASE("confidence SVG carries one histogram series and one polyline per panel") {
        size_t bins = 0, curves = 0, pos = 0;
        while ((pos = svg1.find("class=\"bin\"", pos)) != std::string::npos) {
            ++bins;
            pos += 10;
        }
        pos = 0;
        while ((pos = svg1.find("class=\"cumulative\"", pos)) != std::string::npos) {
            ++curves;
            pos += 10;
        }
        CHECK(bins == 2 * conf.bins.size());
        CHECK(curves == 2);
    }
    SUBCASE("coverage block lands in the confidence CSV") {
        CHECK(conf_csv1.find("coverage_percent") != std::string::npos);
        CHECK(conf_csv1.find("\n90,") != std::string::npos);
        CHECK(conf_csv1.find("\n50,") != std::string::npos);
    }
    SUBCASE("empty rank report still writes valid headers") {
        RankReport empty = rank_report(fx.model.profile, fx.model.abstraction,
                                       fx.model.class_names, Metric::CPB, 0);
        emit_reports({empty}, {}, dir);
        const std::string csv = slurp("ranks_CPB.csv");
        CHECK(csv == "feature,flip,class,sigma,normalized_sigma,flip_rank,avg_rank\n");
    }
    fs::remove_all(dir);
}
