#include "cactus/knowledge_graph.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cactus/parallel.hpp"

namespace cactus {

double class_conditional_prob(const FlipTable& ft, const std::vector<int>& labels,
                              int class_id, int flip) {
    size_t class_rows = 0, with_flip = 0;
    for (size_t r = 0; r < ft.rows.size(); ++r) {
        if (labels[r] != class_id) continue;
        ++class_rows;
        const auto& row = ft.rows[r];
        if (std::binary_search(row.begin(), row.end(), flip)) ++with_flip;
    }
    if (class_rows == 0) throw Error("class " + std::to_string(class_id) + " has no rows");
    return static_cast<double>(with_flip) / static_cast<double>(class_rows);
}

std::optional<double> conditional_edge_prob(const FlipTable& ft, const AbstractionMap& map,
                                            const std::vector<int>& labels, int class_id,
                                            int from, int to) {
    if (map.flip_feature.at(from) == map.flip_feature.at(to))
        throw Error("edge probability: flips '" + map.flips[from].name() + "' and '" +
                    map.flips[to].name() + "' belong to the same feature");
    size_t from_rows = 0, both_rows = 0;
    for (size_t r = 0; r < ft.rows.size(); ++r) {
        if (labels[r] != class_id) continue;
        const auto& row = ft.rows[r];
        if (!std::binary_search(row.begin(), row.end(), from)) continue;
        ++from_rows;
        if (std::binary_search(row.begin(), row.end(), to)) ++both_rows;
    }
    if (from_rows == 0) return std::nullopt;
    return static_cast<double>(both_rows) / static_cast<double>(from_rows);
}

ClassGraph build_class_graph(const FlipTable& ft, const AbstractionMap& map,
                             const std::vector<int>& labels, int class_id) {
    const size_t n = ft.universe_size;
    ClassGraph g;
    g.class_id = class_id;
    g.n_flips = n;

    std::vector<size_t> present(n, 0);
    std::vector<size_t> cooc(n * n, 0);
    size_t class_rows = 0;
    for (size_t r = 0; r < ft.rows.size(); ++r) {
        if (labels[r] != class_id) continue;
        ++class_rows;
        const auto& row = ft.rows[r];
        for (int a : row) {
            present[static_cast<size_t>(a)] += 1;
            for (int b : row) cooc[static_cast<size_t>(a) * n + static_cast<size_t>(b)] += 1;
        }
    }
    if (class_rows == 0) throw Error("class " + std::to_string(class_id) + " has no rows");

    g.flip_class_prob.resize(n);
    for (size_t f = 0; f < n; ++f)
        g.flip_class_prob[f] =
            static_cast<double>(present[f]) / static_cast<double>(class_rows);

    for (size_t u = 0; u < n; ++u) {
        if (present[u] == 0) continue; // P(. | u) undefined, edges omitted
        for (size_t v = 0; v < n; ++v) {
            if (map.flip_feature[u] == map.flip_feature[v]) continue;
            const double p = static_cast<double>(cooc[u * n + v]) /
                             static_cast<double>(present[u]);
            g.edges.push_back(Edge{static_cast<int>(u), static_cast<int>(v),
                                   std::fabs(p - 0.5)});
        }
    }
    return g;
}

std::vector<double> pagerank(const ClassGraph& g, const PageRankParams& params) {
    if (params.damping <= 0.0 || params.damping >= 1.0)
        throw Error("pagerank: damping must be in (0,1)");
    if (params.tol <= 0.0) throw Error("pagerank: tol must be positive");
    const size_t n = g.n_flips;
    if (n == 0) throw Error("pagerank: empty graph");

    std::vector<double> out_weight(n, 0.0);
    for (const Edge& e : g.edges) out_weight[static_cast<size_t>(e.from)] += e.weight;

    const double d = params.damping;
    const double teleport = (1.0 - d) / static_cast<double>(n);
    std::vector<double> rank(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);

    double residual = 0.0;
    for (int iter = 0; iter < params.max_iter; ++iter) {
        double dangling = 0.0;
        for (size_t u = 0; u < n; ++u)
            if (out_weight[u] == 0.0) dangling += rank[u];
        const double base = teleport + d * dangling / static_cast<double>(n);
        std::fill(next.begin(), next.end(), base);
        for (const Edge& e : g.edges) {
            if (e.weight == 0.0) continue;
            next[static_cast<size_t>(e.to)] +=
                d * rank[static_cast<size_t>(e.from)] * e.weight /
                out_weight[static_cast<size_t>(e.from)];
        }
        residual = 0.0;
        for (size_t v = 0; v < n; ++v) residual += std::fabs(next[v] - rank[v]);
        rank.swap(next);
        if (residual < params.tol) return rank;
    }
    throw Error("pagerank: no convergence after " + std::to_string(params.max_iter) +
                " iterations (residual " + fmt_double(residual) + ")");
}

std::vector<double> total_degree(const ClassGraph& g) {
    std::vector<double> degree(g.n_flips, 0.0);
    for (const Edge& e : g.edges) {
        degree[static_cast<size_t>(e.from)] += e.weight;
        degree[static_cast<size_t>(e.to)] += e.weight;
    }
    return degree;
}

std::vector<ClassGraph> build_all_class_graphs(const FlipTable& ft, const AbstractionMap& map,
                                               const std::vector<int>& labels, int n_classes) {
    std::vector<ClassGraph> graphs(static_cast<size_t>(n_classes));
    parallel_for(static_cast<size_t>(n_classes), [&](size_t c) {
        graphs[c] = build_class_graph(ft, map, labels, static_cast<int>(c));
    });
    return graphs;
}

CentralityTable compute_centralities(const std::vector<ClassGraph>& graphs,
                                     const PageRankParams& params) {
    CentralityTable table;
    table.pagerank.resize(graphs.size());
    table.degree.resize(graphs.size());
    parallel_for(graphs.size(), [&](size_t c) {
        table.pagerank[c] = pagerank(graphs[c], params);
        table.degree[c] = total_degree(graphs[c]);
    });
    return table;
}

std::string graph_edges_csv(const ClassGraph& g, const AbstractionMap& map) {
    std::string out = "from_flip,to_flip,weight\n";
    for (const Edge& e : g.edges) {
        out += map.flips[static_cast<size_t>(e.from)].name();
        out += ',';
        out += map.flips[static_cast<size_t>(e.to)].name();
        out += ',';
        out += fmt_double(e.weight);
        out += '\n';
    }
    return out;
}

std::string graph_nodes_json(const ClassGraph& g, const AbstractionMap& map,
                             const std::vector<double>& pagerank_scores,
                             const std::vector<double>& degree_scores) {
    nlohmann::json nodes = nlohmann::json::array();
    for (size_t f = 0; f < g.n_flips; ++f) {
        nlohmann::json node;
        node["flip"] = map.flips[f].name();
        node["class_prob"] = g.flip_class_prob[f];
        node["pagerank"] = pagerank_scores.at(f);
        node["degree"] = degree_scores.at(f);
        nodes.push_back(node);
    }
    nlohmann::json j;
    j["class_id"] = g.class_id;
    j["nodes"] = nodes;
    return j.dump(2) + "\n";
}

} // namespace cactus
