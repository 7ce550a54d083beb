#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sheafcd/dynamics.hpp"
#include "sheafcd/graph.hpp"
#include "sheafcd/rng.hpp"
#include "sheafcd/sheaf.hpp"

namespace sheafcd {

/// Uniform sample from the closed Euclidean ball of the given radius in R^n.
inline Eigen::VectorXd sample_ball(int n, double radius, SplitMix64& rng) {
    if (n <= 0) throw std::invalid_argument("sample_ball: dimension must be positive");
    if (!(radius > 0.0)) throw std::invalid_argument("sample_ball: radius must be positive");
    Eigen::VectorXd direction(n);
    double norm = 0.0;
    do {
        for (int i = 0; i < n; ++i) direction[i] = rng.gaussian();
        norm = direction.norm();
    } while (norm == 0.0);
    double scale = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(n));
    return direction * (scale / norm);
}

/// One Step-4 merge: vertex moved into the given cluster of the input labeling.
struct Merge {
    Vertex vertex;
    int cluster;
};

/**
 * Removes single-vertex clusters by merging each singleton {v} into the
 * adjacent cluster C maximizing 2|E| k_C - deg(v) * sum_{w in C} deg(w),
 * where k_C counts v's neighbors in C. Singletons are processed in
 * ascending vertex order, re-scanning after each merge; score ties break
 * toward the lowest cluster id. Every merge strictly increases modularity.
 *
 * Cluster ids in the returned merge list refer to the canonical labeling of
 * the input partition. Throws when the graph has no edges or when a vertex
 * has no neighbor to merge toward (isolated vertex).
 */
inline std::pair<Partition, std::vector<Merge>> resolve_singletons(const Graph& g,
                                                                   const Partition& p) {
    if (g.edge_count() == 0)
        throw std::invalid_argument("resolve_singletons: graph has no edges");
    if (p.size() != g.vertex_count())
        throw std::invalid_argument("resolve_singletons: partition must cover all vertices");
    if (g.has_isolated_vertex())
        throw std::invalid_argument("resolve_singletons: isolated vertex cannot be resolved");

    const Partition canon = Partition::from_cluster_ids(p.cluster_ids());
    std::vector<int> cluster(canon.cluster_ids());
    std::vector<int> size(static_cast<std::size_t>(canon.cluster_count()), 0);
    std::vector<double> degsum(static_cast<std::size_t>(canon.cluster_count()), 0.0);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        ++size[static_cast<std::size_t>(cluster[static_cast<std::size_t>(v)])];
        degsum[static_cast<std::size_t>(cluster[static_cast<std::size_t>(v)])] +=
            static_cast<double>(g.degree(v));
    }

    const double two_m = 2.0 * static_cast<double>(g.edge_count());
    std::vector<Merge> merges;
    std::vector<int> neighbor_count(static_cast<std::size_t>(canon.cluster_count()), 0);

    for (;;) {
        Vertex singleton = -1;
        for (Vertex v = 0; v < g.vertex_count(); ++v)
            if (size[static_cast<std::size_t>(cluster[static_cast<std::size_t>(v)])] == 1) {
                singleton = v;
                break;
            }
        if (singleton < 0) break;

        const Vertex v = singleton;
        std::vector<int> adjacent;
        for (Vertex w : g.neighbors(v)) {
            int c = cluster[static_cast<std::size_t>(w)];
            if (neighbor_count[static_cast<std::size_t>(c)] == 0) adjacent.push_back(c);
            ++neighbor_count[static_cast<std::size_t>(c)];
        }
        int best = -1;
        double best_score = 0.0;
        for (int c : adjacent) {
            double score = two_m * static_cast<double>(neighbor_count[static_cast<std::size_t>(c)]) -
                           static_cast<double>(g.degree(v)) * degsum[static_cast<std::size_t>(c)];
            if (best < 0 || score > best_score || (score == best_score && c < best)) {
                best = c;
                best_score = score;
            }
        }
        for (int c : adjacent) neighbor_count[static_cast<std::size_t>(c)] = 0;

        int old = cluster[static_cast<std::size_t>(v)];
        cluster[static_cast<std::size_t>(v)] = best;
        --size[static_cast<std::size_t>(old)];
        ++size[static_cast<std::size_t>(best)];
        degsum[static_cast<std::size_t>(old)] -= static_cast<double>(g.degree(v));
        degsum[static_cast<std::size_t>(best)] += static_cast<double>(g.degree(v));
        merges.push_back({v, best});
    }
    return {Partition::from_cluster_ids(cluster), std::move(merges)};
}

/// Inputs of the constant-sheaf detection.
struct ConstantSheafParams {
    int n = 1;               // stalk dimension
    double d = 1.0;          // diameter of the initial opinion distribution
    BumpFunction phi{};      // decay profile, threshold fixed at 1
    double eps = 0.0033;     // consensus stopping width
    double t_max = 1000.0;   // abort horizon in ODE time units
    double dt = 0.01;        // Euler step
};

enum class DetectStatus { converged, aborted };

struct DetectionResult {
    std::optional<Partition> partition;  // empty iff aborted
    DetectStatus status = DetectStatus::converged;
    int primary_cluster_count = 0;       // before singleton resolution
    std::vector<Merge> merges;           // Step-4 moves applied
};

namespace detail {
inline void require_no_isolated(const Graph& g, const char* who) {
    if (g.edge_count() == 0)
        throw std::invalid_argument(std::string(who) + ": graph has no edges");
    if (g.has_isolated_vertex())
        throw std::invalid_argument(std::string(who) + ": isolated vertices are not supported");
}

inline DetectionResult partition_from_mask(const Graph& g, const std::vector<bool>& keep) {
    Partition primary = connected_components(g, keep);
    auto [resolved, merges] = resolve_singletons(g, primary);
    DetectionResult result;
    result.partition = std::move(resolved);
    result.status = DetectStatus::converged;
    result.primary_cluster_count = primary.cluster_count();
    result.merges = std::move(merges);
    return result;
}
} // namespace detail

/**
 * Opinion-dynamics detection on an explicit sheaf and initial state:
 * evolve, take connected components of the consensus edges, resolve
 * singletons. Returns an aborted result (no partition) when the evolution
 * hits t_max.
 */
inline DetectionResult detect_with_dynamics(const CellularSheaf& s, const BumpFunction& phi,
                                            const OpinionState& x0, double eps,
                                            double t_max = 1000.0, double dt = 0.01) {
    const Graph& g = s.graph();
    detail::require_no_isolated(g, "detect_with_dynamics");
    EvolutionOutcome outcome = evolve(s, phi, x0, eps, t_max, dt);
    if (outcome.status == EvolveStatus::aborted) {
        DetectionResult result;
        result.partition.reset();
        result.status = DetectStatus::aborted;
        return result;
    }
    std::vector<bool> keep(static_cast<std::size_t>(g.edge_count()), false);
    for (EdgeIndex e : outcome.consensus_edges) keep[static_cast<std::size_t>(e)] = true;
    return detail::partition_from_mask(g, keep);
}

/**
 * Constant-sheaf detection: random opinions drawn uniformly from the ball
 * B(0, d/2) in R^n per vertex, bounded-confidence evolution, consensus
 * components, singleton resolution.
 */
inline DetectionResult detect_constant(const Graph& g, const ConstantSheafParams& params,
                                       SplitMix64& rng) {
    detail::require_no_isolated(g, "detect_constant");
    if (!(params.d > 0.0))
        throw std::invalid_argument("detect_constant: diameter d must be positive");
    CellularSheaf sheaf = constant_sheaf(g, params.n);
    OpinionState x0;
    x0.x.reserve(static_cast<std::size_t>(g.vertex_count()));
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        x0.x.push_back(sample_ball(params.n, params.d / 2.0, rng));
    return detect_with_dynamics(sheaf, params.phi, x0, params.eps, params.t_max, params.dt);
}

/**
 * Non-constant-sheaf detection, collapsed to its edge-percolation form:
 * each edge survives independently with probability p, then components and
 * singleton resolution.
 */
inline DetectionResult detect_nonconstant(const Graph& g, double p, SplitMix64& rng) {
    detail::require_no_isolated(g, "detect_nonconstant");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("detect_nonconstant: p must lie in [0, 1]");
    std::vector<bool> keep(static_cast<std::size_t>(g.edge_count()));
    for (EdgeIndex e = 0; e < g.edge_count(); ++e)
        keep[static_cast<std::size_t>(e)] = rng.uniform01() < p;
    return detail::partition_from_mask(g, keep);
}

/**
 * Probability that an edge survives the non-constant-sheaf dynamics when
 * both endpoint coordinates are uniform on an interval of width d:
 * P(|U1 - U2| < 1) = 1 for d <= 1, else 1 - (1 - 1/d)^2.
 */
inline double edge_keep_probability(double d) {
    if (!(d > 0.0)) throw std::invalid_argument("edge_keep_probability: d must be positive");
    if (d <= 1.0) return 1.0;
    double miss = 1.0 - 1.0 / d;
    return 1.0 - miss * miss;
}

/**
 * Deterministic detection: edge e = {u, v} survives iff
 * a * (deg(u) + deg(v)) < b + N_{u,v} (strict), with N_{u,v} the number of
 * common neighbors; then components and singleton resolution.
 */
inline DetectionResult detect_deterministic(const Graph& g, double a, double b) {
    detail::require_no_isolated(g, "detect_deterministic");
    if (!(a >= 0.0 && a <= 1.0))
        throw std::invalid_argument("detect_deterministic: a must lie in [0, 1]");
    std::vector<bool> keep(static_cast<std::size_t>(g.edge_count()));
    for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        double lhs = a * static_cast<double>(g.degree(ed.u) + g.degree(ed.v));
        double rhs = b + static_cast<double>(common_neighbors(g, ed.u, ed.v));
        keep[static_cast<std::size_t>(e)] = lhs < rhs;
    }
    return detail::partition_from_mask(g, keep);
}

} // namespace sheafcd
