#include "cactus/explain.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "cactus/svg.hpp"

namespace cactus {

double flip_rank(const SignificanceProfile& profile, Metric metric, int flip) {
    const int k = profile.n_classes;
    if (k < 2) throw Error("flip_rank: needs at least 2 classes");
    double sum = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            sum += std::fabs(profile.sig(metric, i, flip) - profile.sig(metric, j, flip));
    const double pairs = static_cast<double>(k) * static_cast<double>(k - 1) / 2.0;
    return sum / pairs;
}

double feature_rank(const SignificanceProfile& profile, const AbstractionMap& map,
                    Metric metric, size_t feature_pos) {
    const auto& flips = map.flips_of_feature(feature_pos);
    if (flips.empty()) throw Error("feature_rank: feature has no flips");
    double sum = 0.0;
    for (int f : flips) sum += flip_rank(profile, metric, f);
    return sum / static_cast<double>(flips.size());
}

FeatureRanks all_feature_ranks(const SignificanceProfile& profile, const AbstractionMap& map,
                               Metric metric) {
    FeatureRanks ranks;
    for (size_t p = 0; p < map.schema.size(); ++p)
        ranks[map.schema[p].name] = feature_rank(profile, map, metric, p);
    return ranks;
}

RankReport rank_report(const SignificanceProfile& profile, const AbstractionMap& map,
                       const std::vector<std::string>& class_names, Metric metric,
                       size_t top_k) {
    if (top_k > map.schema.size())
        throw Error("rank_report: top_k " + std::to_string(top_k) + " exceeds feature count " +
                    std::to_string(map.schema.size()));
    RankReport report;
    report.metric = metric;
    report.class_names = class_names;

    std::vector<size_t> order(map.schema.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> avg(map.schema.size());
    for (size_t p = 0; p < map.schema.size(); ++p)
        avg[p] = feature_rank(profile, map, metric, p);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (avg[a] != avg[b]) return avg[a] > avg[b];
        return map.schema[a].name < map.schema[b].name;
    });
    order.resize(top_k);

    const int k = profile.n_classes;
    for (size_t p : order) {
        RankFeatureEntry feat;
        feat.feature = map.schema[p].name;
        feat.avg_rank = avg[p];
        for (int f : map.flips_of_feature(p)) {
            RankFlipEntry entry;
            entry.flip = map.flips[static_cast<size_t>(f)].name();
            entry.level = map.flips[static_cast<size_t>(f)].level;
            entry.flip_rank = flip_rank(profile, metric, f);
            entry.sigma_by_class.resize(static_cast<size_t>(k));
            for (int c = 0; c < k; ++c)
                entry.sigma_by_class[static_cast<size_t>(c)] = profile.sig(metric, c, f);
            feat.flips.push_back(std::move(entry));
        }
        // Presentation normalisation: per class, the feature's flips sum to 1
        // (or stay all-zero). Never fed back into ranking or classification.
        for (int c = 0; c < k; ++c) {
            double total = 0.0;
            for (const auto& e : feat.flips) total += e.sigma_by_class[static_cast<size_t>(c)];
            for (auto& e : feat.flips)
                e.normalized_by_class.push_back(
                    total > 0.0 ? e.sigma_by_class[static_cast<size_t>(c)] / total : 0.0);
        }
        report.features.push_back(std::move(feat));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Confidence analysis
// ---------------------------------------------------------------------------

namespace {

/// Balanced accuracy over the classes present in `actual`; the number of
/// classes in [0,K) that were absent is reported through `excluded`.
double ba_over_present(const std::vector<int>& predicted, const std::vector<int>& actual,
                       int k, size_t* excluded) {
    std::vector<size_t> count(static_cast<size_t>(k), 0), hit(static_cast<size_t>(k), 0);
    for (size_t i = 0; i < actual.size(); ++i) {
        count[static_cast<size_t>(actual[i])] += 1;
        if (predicted[i] == actual[i]) hit[static_cast<size_t>(actual[i])] += 1;
    }
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < k; ++c) {
        if (count[static_cast<size_t>(c)] == 0) continue;
        ++present;
        sum += static_cast<double>(hit[static_cast<size_t>(c)]) /
               static_cast<double>(count[static_cast<size_t>(c)]);
    }
    if (excluded) *excluded = static_cast<size_t>(k - present);
    if (present == 0) return 0.0;
    return sum / static_cast<double>(present);
}

} // namespace

ConfidenceReport confidence_analysis(const std::vector<ClassificationResult>& results,
                                     const std::vector<int>& labels, Metric metric,
                                     int bin_count) {
    if (results.empty()) throw Error("confidence_analysis: empty cohort");
    if (results.size() != labels.size())
        throw Error("confidence_analysis: results/labels size mismatch");
    const int k = static_cast<int>(results.front().scores.cost.size());

    ConfidenceReport report;
    report.metric = metric;
    report.total = results.size();
    report.chance_line = 1.0 / static_cast<double>(k);

    const double width = 100.0 / static_cast<double>(bin_count);
    std::vector<std::vector<size_t>> members(static_cast<size_t>(bin_count));
    for (size_t i = 0; i < results.size(); ++i) {
        int b = static_cast<int>(std::floor(results[i].confidence / width));
        b = std::clamp(b, 0, bin_count - 1); // confidence 100 joins the last bin
        members[static_cast<size_t>(b)].push_back(i);
    }

    std::vector<int> cum_pred, cum_actual;
    size_t cum_count = 0;
    for (int b = 0; b < bin_count; ++b) {
        ConfidenceBin bin;
        bin.lo = width * b;
        bin.hi = width * (b + 1);
        bin.population = members[static_cast<size_t>(b)].size();
        if (bin.population > 0) {
            std::vector<int> pred, actual;
            for (size_t i : members[static_cast<size_t>(b)]) {
                pred.push_back(results[i].label);
                actual.push_back(labels[i]);
            }
            bin.balanced_accuracy = ba_over_present(pred, actual, k, &bin.excluded_classes);
            bin.ba_defined = true;
            cum_pred.insert(cum_pred.end(), pred.begin(), pred.end());
            cum_actual.insert(cum_actual.end(), actual.begin(), actual.end());
        } else {
            bin.excluded_classes = static_cast<size_t>(k);
        }
        cum_count += bin.population;
        report.bins.push_back(bin);
        report.cum_population_fraction.push_back(static_cast<double>(cum_count) /
                                                 static_cast<double>(results.size()));
        // Population-weighted cumulative BA: balanced accuracy of everyone in
        // bins up to this edge, so the final value is the cohort-wide BA.
        report.cum_weighted_ba.push_back(
            cum_pred.empty() ? 0.0 : ba_over_present(cum_pred, cum_actual, k, nullptr));
    }

    // Coverage thresholds: the smallest observed confidence c whose
    // high-confidence tail {confidence >= c} holds at most p% of the cohort.
    // When even the largest confidence fails (everyone shares it) the
    // largest one is reported together with the achieved fraction.
    std::vector<double> sorted_conf;
    sorted_conf.reserve(results.size());
    for (const auto& r : results) sorted_conf.push_back(r.confidence);
    std::sort(sorted_conf.begin(), sorted_conf.end());
    std::vector<double> candidates = sorted_conf;
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    auto tail_fraction = [&](double c) {
        size_t below = static_cast<size_t>(
            std::lower_bound(sorted_conf.begin(), sorted_conf.end(), c) - sorted_conf.begin());
        return static_cast<double>(sorted_conf.size() - below) /
               static_cast<double>(sorted_conf.size());
    };
    for (int p : {90, 80, 70, 60, 50}) {
        CoverageThreshold entry;
        entry.percent = p;
        entry.threshold = candidates.back();
        entry.achieved_fraction = tail_fraction(candidates.back());
        for (double c : candidates) {
            if (tail_fraction(c) <= static_cast<double>(p) / 100.0) {
                entry.threshold = c;
                entry.achieved_fraction = tail_fraction(c);
                break;
            }
        }
        report.coverage.push_back(entry);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

std::string rank_report_to_json(const RankReport& report) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& feat : report.features) {
        nlohmann::json flips = nlohmann::json::array();
        for (const auto& e : feat.flips) {
            flips.push_back({{"flip", e.flip},
                             {"level", e.level},
                             {"flip_rank", e.flip_rank},
                             {"sigma", e.sigma_by_class},
                             {"normalized_sigma", e.normalized_by_class}});
        }
        features.push_back(
            {{"feature", feat.feature}, {"avg_rank", feat.avg_rank}, {"flips", flips}});
    }
    nlohmann::json j;
    j["metric"] = metric_name(report.metric);
    j["class_names"] = report.class_names;
    j["features"] = features;
    return j.dump(2) + "\n";
}

std::string rank_report_to_csv(const RankReport& report) {
    std::string out = "feature,flip,class,sigma,normalized_sigma,flip_rank,avg_rank\n";
    for (const auto& feat : report.features) {
        for (const auto& e : feat.flips) {
            for (size_t c = 0; c < report.class_names.size(); ++c) {
                out += feat.feature;
                out += ',';
                out += e.flip;
                out += ',';
                out += report.class_names[c];
                out += ',';
                out += fmt_double(e.sigma_by_class[c]);
                out += ',';
                out += fmt_double(e.normalized_by_class[c]);
                out += ',';
                out += fmt_double(e.flip_rank);
                out += ',';
                out += fmt_double(feat.avg_rank);
                out += '\n';
            }
        }
    }
    return out;
}

namespace {

const char* flip_color(const std::string& level, size_t index) {
    if (level == "D") return "#4472c4"; // down: blue
    if (level == "U") return "#e377c2"; // up: pink
    static const char* palette[] = {"#59a14f", "#edc948", "#b07aa1", "#76b7b2",
                                    "#ff9da7", "#9c755f", "#bab0ac", "#f28e2b"};
    return palette[index % 8];
}

} // namespace

std::string rank_report_to_svg(const RankReport& report) {
    const size_t n = report.features.size();
    const int cols = 3;
    const int rows = n == 0 ? 1 : static_cast<int>((n + cols - 1) / cols);
    const double panel_w = 240, panel_h = 170, margin = 18;
    SvgCanvas svg(cols * (panel_w + margin) + margin,
                  rows * (panel_h + margin) + margin + 16);
    svg.text(margin, 14, std::string("Feature ranks (") + metric_name(report.metric) +
                             "), normalized flip significance per class", 12.0);
    for (size_t i = 0; i < n; ++i) {
        const auto& feat = report.features[i];
        const double ox = margin + (panel_w + margin) * (i % cols);
        const double oy = margin + 16 + (panel_h + margin) * (i / cols);
        const double plot_h = panel_h - 42;
        const double plot_w = panel_w - 20;
        svg.text(ox + panel_w / 2, oy + 12, feat.feature + " (" + std::to_string(i) + ")", 11.0,
                 "middle");
        svg.line(ox + 10, oy + 20 + plot_h, ox + 10 + plot_w, oy + 20 + plot_h, "#555555");
        const size_t k = report.class_names.size();
        const double group_w = plot_w / static_cast<double>(k);
        const size_t flips = feat.flips.size();
        for (size_t c = 0; c < k; ++c) {
            const double gx = ox + 10 + group_w * c;
            svg.text(gx + group_w / 2, oy + 20 + plot_h + 12, report.class_names[c], 9.0,
                     "middle");
            const double bar_w = group_w / static_cast<double>(flips + 1);
            for (size_t f = 0; f < flips; ++f) {
                const double v = feat.flips[f].normalized_by_class[c];
                const double h = plot_h * v;
                svg.rect(gx + bar_w * (f + 0.5), oy + 20 + plot_h - h, bar_w, h,
                         flip_color(feat.flips[f].level, f), "sig-bar");
            }
        }
    }
    return svg.finish();
}

std::string confidence_report_to_csv(const ConfidenceReport& report) {
    std::string out =
        "bin_lo,bin_hi,population,balanced_accuracy,classes_excluded,cum_population_fraction,"
        "cum_weighted_ba\n";
    for (size_t b = 0; b < report.bins.size(); ++b) {
        const auto& bin = report.bins[b];
        out += fmt_double(bin.lo);
        out += ',';
        out += fmt_double(bin.hi);
        out += ',';
        out += std::to_string(bin.population);
        out += ',';
        out += bin.ba_defined ? fmt_double(bin.balanced_accuracy) : std::string("");
        out += ',';
        out += std::to_string(bin.excluded_classes);
        out += ',';
        out += fmt_double(report.cum_population_fraction[b]);
        out += ',';
        out += fmt_double(report.cum_weighted_ba[b]);
        out += '\n';
    }
    out += "\ncoverage_percent,threshold,achieved_fraction\n";
    for (const auto& cov : report.coverage) {
        out += std::to_string(cov.percent);
        out += ',';
        out += fmt_double(cov.threshold);
        out += ',';
        out += fmt_double(cov.achieved_fraction);
        out += '\n';
    }
    out += "\nchance_line," + fmt_double(report.chance_line) + "\n";
    out += "total," + std::to_string(report.total) + "\n";
    return out;
}

std::string confidence_report_to_svg(const ConfidenceReport& report) {
    // Two panels: balanced accuracy per bin, population per bin. Each carries
    // its histogram, the cumulative polyline, and the coverage verticals.
    const double panel_w = 320, panel_h = 220, margin = 40;
    SvgCanvas svg(2 * panel_w + 3 * margin, panel_h + 2 * margin + 20);
    const double plot_h = panel_h - 40;

    size_t max_pop = 1;
    for (const auto& bin : report.bins) max_pop = std::max(max_pop, bin.population);

    for (int panel = 0; panel < 2; ++panel) {
        const double ox = margin + panel * (panel_w + margin);
        const double oy = margin;
        const bool ba_panel = panel == 0;
        svg.text(ox + panel_w / 2, oy - 8,
                 std::string(metric_name(report.metric)) +
                     (ba_panel ? " balanced accuracy vs confidence" : " population vs confidence"),
                 11.0, "middle");
        svg.line(ox, oy + plot_h, ox + panel_w, oy + plot_h, "#555555");
        svg.line(ox, oy, ox, oy + plot_h, "#555555");
        const double bin_w = panel_w / static_cast<double>(report.bins.size());
        std::vector<std::pair<double, double>> curve;
        for (size_t b = 0; b < report.bins.size(); ++b) {
            const auto& bin = report.bins[b];
            double v = 0.0;
            if (ba_panel)
                v = bin.ba_defined ? bin.balanced_accuracy : 0.0;
            else
                v = static_cast<double>(bin.population) / static_cast<double>(max_pop);
            svg.rect(ox + bin_w * b + 1, oy + plot_h * (1 - v), bin_w - 2, plot_h * v,
                     "#edc948", "bin");
            svg.text(ox + bin_w * b + bin_w / 2, oy + plot_h + 12, fmt_double(bin.lo), 8.0,
                     "middle");
            const double cum = ba_panel ? report.cum_weighted_ba[b]
                                        : report.cum_population_fraction[b];
            curve.emplace_back(ox + bin_w * (b + 1), oy + plot_h * (1 - cum));
        }
        svg.polyline(curve, "#1f77b4", 1.8, "cumulative");
        for (const auto& cov : report.coverage) {
            const double x = ox + panel_w * cov.threshold / 100.0;
            svg.line(x, oy, x, oy + plot_h, "#8c564b", 1.0, "4,3");
        }
        if (ba_panel) {
            const double y = oy + plot_h * (1 - report.chance_line);
            svg.line(ox, y, ox + panel_w, y, "#ff7f0e", 1.2, "6,3");
        }
    }
    return svg.finish();
}

void emit_reports(const std::vector<RankReport>& ranks,
                  const std::vector<ConfidenceReport>& confidences,
                  const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    auto write = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("emit_reports: cannot write '" + path + "'");
        out << content;
        if (!out) throw Error("emit_reports: write failed for '" + path + "'");
    };
    for (const auto& report : ranks) {
        const std::string base = std::string("ranks_") + metric_name(report.metric);
        write(base + ".json", rank_report_to_json(report));
        write(base + ".csv", rank_report_to_csv(report));
        write(base + ".svg", rank_report_to_svg(report));
    }
    for (const auto& report : confidences) {
        const std::string base = std::string("confidence_") + metric_name(report.metric);
        write(base + ".csv", confidence_report_to_csv(report));
        write(base + ".svg", confidence_report_to_svg(report));
    }
}

} // namespace cactus
