#pragma once

#include <algorithm>
#include <array>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sheafcd {

using Vertex = int;
using EdgeIndex = int;

/// Undirected edge stored with a fixed orientation: u is the first endpoint.
struct Edge {
    Vertex u;
    Vertex v;
};

/**
 * Undirected simple graph: no loops, no multi-edges, dense vertex ids
 * 0..V-1. Edges carry a stored orientation (an ordered pair); sheaf
 * constructions depend on it only through signs that cancel in every
 * derived quantity. Immutable after construction, safe to share across
 * threads.
 */
class Graph {
public:
    /// Builds a graph normalizing every edge to (smaller id, larger id).
    static Graph from_edges(int vertex_count, const std::vector<std::pair<Vertex, Vertex>>& edges) {
        std::vector<Edge> oriented;
        oriented.reserve(edges.size());
        for (const auto& [a, b] : edges)
            oriented.push_back({std::min(a, b), std::max(a, b)});
        return Graph(vertex_count, std::move(oriented));
    }

    /// Builds a graph keeping the given orientation of each edge.
    static Graph from_oriented_edges(int vertex_count, const std::vector<std::pair<Vertex, Vertex>>& edges) {
        std::vector<Edge> oriented;
        oriented.reserve(edges.size());
        for (const auto& [a, b] : edges)
            oriented.push_back({a, b});
        return Graph(vertex_count, std::move(oriented));
    }

    int vertex_count() const { return vertex_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(EdgeIndex e) const { return edges_[static_cast<std::size_t>(e)]; }

    /// Number of incident edges. Throws std::out_of_range on a bad vertex.
    int degree(Vertex v) const {
        check_vertex(v);
        return static_cast<int>(adjacency_[static_cast<std::size_t>(v)].size());
    }

    /// Neighbors of v in ascending order.
    const std::vector<Vertex>& neighbors(Vertex v) const {
        check_vertex(v);
        return adjacency_[static_cast<std::size_t>(v)];
    }

    /// Indices of the edges incident to v, ascending.
    const std::vector<EdgeIndex>& incident_edges(Vertex v) const {
        check_vertex(v);
        return incident_[static_cast<std::size_t>(v)];
    }

    bool has_isolated_vertex() const {
        for (const auto& adj : adjacency_)
            if (adj.empty()) return true;
        return false;
    }

private:
    Graph(int vertex_count, std::vector<Edge> edges)
        : vertex_count_(vertex_count), edges_(std::move(edges)) {
        if (vertex_count_ < 0)
            throw std::invalid_argument("graph: vertex count must be non-negative");
        std::set<std::pair<Vertex, Vertex>> seen;
        for (const Edge& e : edges_) {
            if (e.u < 0 || e.u >= vertex_count_ || e.v < 0 || e.v >= vertex_count_)
                throw std::invalid_argument("graph: edge endpoint out of range");
            if (e.u == e.v)
                throw std::invalid_argument("graph: self-loops are not allowed");
            auto key = std::minmax(e.u, e.v);
            if (!seen.insert(key).second)
                throw std::invalid_argument("graph: duplicate edge {" + std::to_string(e.u) +
                                            "," + std::to_string(e.v) + "}");
        }
        adjacency_.resize(static_cast<std::size_t>(vertex_count_));
        incident_.resize(static_cast<std::size_t>(vertex_count_));
        for (EdgeIndex i = 0; i < edge_count(); ++i) {
            const Edge& e = edges_[static_cast<std::size_t>(i)];
            adjacency_[static_cast<std::size_t>(e.u)].push_back(e.v);
            adjacency_[static_cast<std::size_t>(e.v)].push_back(e.u);
            incident_[static_cast<std::size_t>(e.u)].push_back(i);
            incident_[static_cast<std::size_t>(e.v)].push_back(i);
        }
        for (auto& adj : adjacency_)
            std::sort(adj.begin(), adj.end());
    }

    void check_vertex(Vertex v) const {
        if (v < 0 || v >= vertex_count_)
            throw std::out_of_range("graph: vertex " + std::to_string(v) + " out of range");
    }

    int vertex_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Vertex>> adjacency_;
    std::vector<std::vector<EdgeIndex>> incident_;
};

/**
 * Partition of the full vertex set. Cluster ids are contiguous from 0 and
 * canonical: clusters are numbered by their smallest member, so two
 * partitions are equal as set partitions iff their id vectors are equal.
 */
class Partition {
public:
    /// Canonicalizes arbitrary (non-negative) labels by first occurrence.
    static Partition from_cluster_ids(const std::vector<int>& raw) {
        std::vector<int> canon(raw.size());
        std::vector<int> relabel;
        int next = 0;
        for (std::size_t v = 0; v < raw.size(); ++v) {
            int c = raw[v];
            if (c < 0)
                throw std::invalid_argument("partition: negative cluster id");
            if (c >= static_cast<int>(relabel.size()))
                relabel.resize(static_cast<std::size_t>(c) + 1, -1);
            if (relabel[static_cast<std::size_t>(c)] < 0)
                relabel[static_cast<std::size_t>(c)] = next++;
            canon[v] = relabel[static_cast<std::size_t>(c)];
        }
        return Partition(std::move(canon), next);
    }

    /// Everything in one cluster.
    static Partition single_cluster(int vertex_count) {
        return Partition(std::vector<int>(static_cast<std::size_t>(vertex_count), 0),
                         vertex_count > 0 ? 1 : 0);
    }

    /// Every vertex its own cluster.
    static Partition singletons(int vertex_count) {
        std::vector<int> ids(static_cast<std::size_t>(vertex_count));
        std::iota(ids.begin(), ids.end(), 0);
        return Partition(std::move(ids), vertex_count);
    }

    int size() const { return static_cast<int>(cluster_of_.size()); }
    int cluster_count() const { return cluster_count_; }
    int cluster_of(Vertex v) const { return cluster_of_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& cluster_ids() const { return cluster_of_; }

    std::vector<int> cluster_sizes() const {
        std::vector<int> sizes(static_cast<std::size_t>(cluster_count_), 0);
        for (int c : cluster_of_) ++sizes[static_cast<std::size_t>(c)];
        return sizes;
    }

    /// Members of cluster c in ascending vertex order.
    std::vector<Vertex> members(int c) const {
        std::vector<Vertex> out;
        for (Vertex v = 0; v < size(); ++v)
            if (cluster_of_[static_cast<std::size_t>(v)] == c) out.push_back(v);
        return out;
    }

    friend bool operator==(const Partition& a, const Partition& b) {
        return a.cluster_of_ == b.cluster_of_;
    }

private:
    Partition(std::vector<int> canon, int count)
        : cluster_of_(std::move(canon)), cluster_count_(count) {}

    std::vector<int> cluster_of_;
    int cluster_count_;
};

/**
 * Connected components of (V, active_edges) as a canonical Partition.
 * Vertices touching no active edge become singletons.
 */
inline Partition connected_components(const Graph& g, const std::vector<bool>& active_edges) {
    if (static_cast<int>(active_edges.size()) != g.edge_count())
        throw std::invalid_argument("connected_components: mask size must equal edge count");
    std::vector<int> parent(static_cast<std::size_t>(g.vertex_count()));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (EdgeIndex i = 0; i < g.edge_count(); ++i) {
        if (!active_edges[static_cast<std::size_t>(i)]) continue;
        int ru = find(g.edge(i).u);
        int rv = find(g.edge(i).v);
        if (ru != rv) parent[static_cast<std::size_t>(std::max(ru, rv))] = std::min(ru, rv);
    }
    std::vector<int> ids(static_cast<std::size_t>(g.vertex_count()));
    for (Vertex v = 0; v < g.vertex_count(); ++v) ids[static_cast<std::size_t>(v)] = find(v);
    return Partition::from_cluster_ids(ids);
}

/// Components of the whole graph.
inline Partition connected_components(const Graph& g) {
    return connected_components(g, std::vector<bool>(static_cast<std::size_t>(g.edge_count()), true));
}

/**
 * Modularity of a partition:
 *   Q = sum_c [ |E_c|/|E| - (sum_{v in V_c} deg(v) / (2|E|))^2 ],
 * where E_c are the edges with both ends in cluster c. Throws
 * std::domain_error when the graph has no edges.
 */
inline double modularity(const Graph& g, const Partition& p) {
    if (g.edge_count() == 0)
        throw std::domain_error("modularity: undefined for an empty edge set");
    if (p.size() != g.vertex_count())
        throw std::invalid_argument("modularity: partition must cover all vertices");
    const double m = static_cast<double>(g.edge_count());
    std::vector<int> intra(static_cast<std::size_t>(p.cluster_count()), 0);
    std::vector<double> degsum(static_cast<std::size_t>(p.cluster_count()), 0.0);
    for (const Edge& e : g.edges())
        if (p.cluster_of(e.u) == p.cluster_of(e.v))
            ++intra[static_cast<std::size_t>(p.cluster_of(e.u))];
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        degsum[static_cast<std::size_t>(p.cluster_of(v))] += static_cast<double>(g.degree(v));
    double q = 0.0;
    for (int c = 0; c < p.cluster_count(); ++c) {
        double frac = degsum[static_cast<std::size_t>(c)] / (2.0 * m);
        q += static_cast<double>(intra[static_cast<std::size_t>(c)]) / m - frac * frac;
    }
    return q;
}

/// |N(u) ∩ N(v)|. Requires u != v.
inline int common_neighbors(const Graph& g, Vertex u, Vertex v) {
    if (u == v)
        throw std::invalid_argument("common_neighbors: vertices must be distinct");
    const auto& a = g.neighbors(u);
    const auto& b = g.neighbors(v);
    int count = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (a[i] > b[j]) ++j;
        else { ++count; ++i; ++j; }
    }
    return count;
}

/**
 * Parses a whitespace-separated edge list: one "u v" pair per line,
 * '#'-prefixed comment lines ignored, optional "V <count>" header for
 * trailing isolated vertices. Vertex ids are 0-based. Throws
 * std::runtime_error with the line number on malformed input and
 * std::invalid_argument on self-loops or duplicate edges.
 */
inline Graph load_edge_list(std::istream& in) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    std::set<std::pair<Vertex, Vertex>> seen;
    int declared_vertices = 0;
    int max_id = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        std::istringstream ls(line.substr(start));
        if (line[start] == 'V') {
            char tag;
            long long n = -1;
            ls >> tag >> n;
            std::string extra;
            if (ls.fail() || n < 0 || (ls >> extra))
                throw std::runtime_error("edge list line " + std::to_string(line_no) +
                                         ": malformed header, expected 'V <count>'");
            declared_vertices = std::max(declared_vertices, static_cast<int>(n));
            continue;
        }
        long long a = -1, b = -1;
        ls >> a >> b;
        std::string extra;
        if (ls.fail() || (ls >> extra))
            throw std::runtime_error("edge list line " + std::to_string(line_no) +
                                     ": expected two vertex ids");
        if (a < 0 || b < 0)
            throw std::runtime_error("edge list line " + std::to_string(line_no) +
                                     ": vertex ids must be non-negative");
        Vertex u = static_cast<Vertex>(a), v = static_cast<Vertex>(b);
        if (u == v)
            throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                        ": self-loop " + std::to_string(u));
        auto key = std::minmax(u, v);
        if (!seen.insert(key).second)
            throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                        ": duplicate edge {" + std::to_string(u) + "," +
                                        std::to_string(v) + "}");
        edges.emplace_back(u, v);
        max_id = std::max({max_id, u, v});
    }
    int vertex_count = std::max(max_id + 1, declared_vertices);
    return Graph::from_edges(vertex_count, edges);
}

/**
 * Zachary's karate club: 34 members, 78 social ties, embedded as constant
 * data (0-based ids).
 */
inline Graph karate_club() {
    static const std::array<std::pair<Vertex, Vertex>, 78> ties = {{
        {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},
        {0, 8},   {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},
        {0, 21},  {0, 31},  {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},
        {1, 19},  {1, 21},  {1, 30},  {2, 3},   {2, 7},   {2, 8},   {2, 9},
        {2, 13},  {2, 27},  {2, 28},  {2, 32},  {3, 7},   {3, 12},  {3, 13},
        {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},  {6, 16},  {8, 30},
        {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33}, {15, 32},
        {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
        {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25},
        {24, 27}, {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31},
        {28, 33}, {29, 32}, {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33},
        {32, 33},
    }};
    return Graph::from_edges(34, std::vector<std::pair<Vertex, Vertex>>(ties.begin(), ties.end()));
}

} // namespace sheafcd
