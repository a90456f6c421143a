#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cactus/abstraction.hpp"

namespace cactus {

struct Edge {
    int from = 0;
    int to = 0;
    double weight = 0.0; // |P(to | from, class) - 0.5|, in [0, 0.5]
};

/// Weighted directed graph over the flip universe for one class. Edges join
/// flips of different features only; zero-weight edges are kept in the
/// structure but contribute nothing to any centrality sum.
struct ClassGraph {
    int class_id = 0;
    size_t n_flips = 0;
    std::vector<Edge> edges;
    std::vector<double> flip_class_prob; // P(flip | class), denominator = all class rows
};

struct CentralityTable {
    std::vector<std::vector<double>> pagerank; // [class][flip]
    std::vector<std::vector<double>> degree;   // [class][flip]
};

struct PageRankParams {
    double damping = 0.85;
    double tol = 1e-12;
    int max_iter = 10000;
};

/// P(flip | class): rows of the class carrying the flip over all rows of the
/// class, missing cells included in the denominator.
double class_conditional_prob(const FlipTable& ft, const std::vector<int>& labels,
                              int class_id, int flip);

/// Eq-style conditional P(to | from, class); empty when no class row carries
/// the from-flip. Flips of the same feature are rejected.
std::optional<double> conditional_edge_prob(const FlipTable& ft, const AbstractionMap& map,
                                            const std::vector<int>& labels, int class_id,
                                            int from, int to);

ClassGraph build_class_graph(const FlipTable& ft, const AbstractionMap& map,
                             const std::vector<int>& labels, int class_id);

/// Weighted PageRank by power iteration. Transition u->v is
/// weight(u,v) / sum of u's out-weights; nodes with zero out-weight
/// redistribute uniformly. Iterates until the L1 change drops below tol;
/// throws (with the final residual) if max_iter is exhausted first.
std::vector<double> pagerank(const ClassGraph& g, const PageRankParams& params = {});

/// Sum of incoming and outgoing edge weights per flip.
std::vector<double> total_degree(const ClassGraph& g);

std::vector<ClassGraph> build_all_class_graphs(const FlipTable& ft, const AbstractionMap& map,
                                               const std::vector<int>& labels, int n_classes);

CentralityTable compute_centralities(const std::vector<ClassGraph>& graphs,
                                     const PageRankParams& params = {});

/// Edge-list CSV (from_flip, to_flip, weight) for external visualisation.
std::string graph_edges_csv(const ClassGraph& g, const AbstractionMap& map);

/// Node table JSON (flip, class_prob, pagerank, degree).
std::string graph_nodes_json(const ClassGraph& g, const AbstractionMap& map,
                             const std::vector<double>& pagerank_scores,
                             const std::vector<double>& degree_scores);

} // namespace cactus
