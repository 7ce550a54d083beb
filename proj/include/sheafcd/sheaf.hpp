#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sheafcd/graph.hpp"

namespace sheafcd {

/**
 * Cellular sheaf of finite-dimensional real vector spaces on a graph:
 * a stalk R^{n_v} per vertex, a stalk R^{n_e} per edge, and a restriction
 * map F_{v⊂e} (an n_e x n_v matrix) per incidence. Immutable after
 * construction.
 *
 * Stalk coordinates are packed into C0 = ⊕_v F(v) and C1 = ⊕_e F(e) by
 * ascending vertex/edge index, then stalk coordinate; vertex_offset and
 * edge_offset give the block starts.
 */
class CellularSheaf {
public:
    CellularSheaf(Graph graph,
                  std::vector<int> vertex_dims,
                  std::vector<int> edge_dims,
                  std::vector<Eigen::MatrixXd> restriction_first,
                  std::vector<Eigen::MatrixXd> restriction_second)
        : graph_(std::move(graph)),
          vertex_dim_(std::move(vertex_dims)),
          edge_dim_(std::move(edge_dims)),
          restriction_first_(std::move(restriction_first)),
          restriction_second_(std::move(restriction_second)) {
        const std::size_t nv = static_cast<std::size_t>(graph_.vertex_count());
        const std::size_t ne = static_cast<std::size_t>(graph_.edge_count());
        if (vertex_dim_.size() != nv || edge_dim_.size() != ne ||
            restriction_first_.size() != ne || restriction_second_.size() != ne)
            throw std::invalid_argument("sheaf: per-vertex/per-edge data sizes do not match the graph");
        for (int d : vertex_dim_)
            if (d <= 0) throw std::invalid_argument("sheaf: vertex stalk dimensions must be positive");
        for (int d : edge_dim_)
            if (d <= 0) throw std::invalid_argument("sheaf: edge stalk dimensions must be positive");
        for (EdgeIndex e = 0; e < graph_.edge_count(); ++e) {
            const Edge& ed = graph_.edge(e);
            const auto& fu = restriction_first_[static_cast<std::size_t>(e)];
            const auto& fv = restriction_second_[static_cast<std::size_t>(e)];
            if (fu.rows() != edge_dim(e) || fu.cols() != vertex_dim(ed.u) ||
                fv.rows() != edge_dim(e) || fv.cols() != vertex_dim(ed.v))
                throw std::invalid_argument("sheaf: restriction shape mismatch on edge " +
                                            std::to_string(e));
        }
        vertex_offset_.resize(nv + 1, 0);
        for (std::size_t v = 0; v < nv; ++v)
            vertex_offset_[v + 1] = vertex_offset_[v] + vertex_dim_[v];
        edge_offset_.resize(ne + 1, 0);
        for (std::size_t e = 0; e < ne; ++e)
            edge_offset_[e + 1] = edge_offset_[e] + edge_dim_[e];
    }

    const Graph& graph() const { return graph_; }
    int vertex_dim(Vertex v) const { return vertex_dim_[static_cast<std::size_t>(v)]; }
    int edge_dim(EdgeIndex e) const { return edge_dim_[static_cast<std::size_t>(e)]; }

    /// Restriction attached to the first (resp. second) endpoint of the stored orientation.
    const Eigen::MatrixXd& restriction_first(EdgeIndex e) const {
        return restriction_first_[static_cast<std::size_t>(e)];
    }
    const Eigen::MatrixXd& restriction_second(EdgeIndex e) const {
        return restriction_second_[static_cast<std::size_t>(e)];
    }

    /// Restriction F_{v⊂e}; v must be an endpoint of e.
    const Eigen::MatrixXd& restriction(EdgeIndex e, Vertex v) const {
        const Edge& ed = graph_.edge(e);
        if (v == ed.u) return restriction_first(e);
        if (v == ed.v) return restriction_second(e);
        throw std::invalid_argument("sheaf: vertex " + std::to_string(v) +
                                    " is not incident to edge " + std::to_string(e));
    }

    int dim_c0() const { return vertex_offset_.back(); }
    int dim_c1() const { return edge_offset_.back(); }
    int vertex_offset(Vertex v) const { return vertex_offset_[static_cast<std::size_t>(v)]; }
    int edge_offset(EdgeIndex e) const { return edge_offset_[static_cast<std::size_t>(e)]; }

private:
    Graph graph_;
    std::vector<int> vertex_dim_;
    std::vector<int> edge_dim_;
    std::vector<Eigen::MatrixXd> restriction_first_;
    std::vector<Eigen::MatrixXd> restriction_second_;
    std::vector<int> vertex_offset_;
    std::vector<int> edge_offset_;
};

/// Constant sheaf R^n: all stalks R^n, all restrictions the identity.
inline CellularSheaf constant_sheaf(const Graph& g, int n) {
    if (n <= 0)
        throw std::domain_error("constant_sheaf: stalk dimension must be positive");
    std::vector<int> vdims(static_cast<std::size_t>(g.vertex_count()), n);
    std::vector<int> edims(static_cast<std::size_t>(g.edge_count()), n);
    std::vector<Eigen::MatrixXd> first(static_cast<std::size_t>(g.edge_count()),
                                       Eigen::MatrixXd::Identity(n, n));
    std::vector<Eigen::MatrixXd> second = first;
    return CellularSheaf(g, std::move(vdims), std::move(edims), std::move(first), std::move(second));
}

/**
 * Non-constant sheaf with F(v) = R^{deg(v)} (one coordinate per incident
 * edge, in incident-edge order), F(e) = R, and restrictions projecting a
 * vertex stalk onto the coordinate of the shared edge.
 */
inline CellularSheaf edge_projection_sheaf(const Graph& g) {
    std::vector<int> vdims(static_cast<std::size_t>(g.vertex_count()));
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        vdims[static_cast<std::size_t>(v)] = std::max(g.degree(v), 1);
    std::vector<int> edims(static_cast<std::size_t>(g.edge_count()), 1);
    std::vector<Eigen::MatrixXd> first, second;
    first.reserve(static_cast<std::size_t>(g.edge_count()));
    second.reserve(static_cast<std::size_t>(g.edge_count()));
    auto projection = [&](Vertex v, EdgeIndex e) {
        const auto& inc = g.incident_edges(v);
        Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, vdims[static_cast<std::size_t>(v)]);
        for (std::size_t k = 0; k < inc.size(); ++k)
            if (inc[k] == e) {
                row(0, static_cast<Eigen::Index>(k)) = 1.0;
                return row;
            }
        throw std::logic_error("edge_projection_sheaf: incidence lookup failed");
    };
    for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
        first.push_back(projection(g.edge(e).u, e));
        second.push_back(projection(g.edge(e).v, e));
    }
    return CellularSheaf(g, std::move(vdims), std::move(edims), std::move(first), std::move(second));
}

/**
 * Signed incidence matrix, V x E: B[v,e] = +1 when v is the first endpoint
 * of the stored orientation, -1 when the second, 0 otherwise.
 */
inline Eigen::MatrixXd signed_incidence(const Graph& g) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(g.vertex_count(), g.edge_count());
    for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
        b(g.edge(e).u, e) = 1.0;
        b(g.edge(e).v, e) = -1.0;
    }
    return b;
}

/**
 * Coboundary matrix, dim C1 x dim C0. Block (e, v) is +F_{v⊂e} when v is
 * the second endpoint of the stored orientation of e and -F_{v⊂e} when the
 * first, so on edge e = (u, v) the map sends x to F_{v⊂e} x_v - F_{u⊂e} x_u.
 * For the constant sheaf R^1 this equals the transpose of the signed
 * incidence matrix up to the per-edge sign fixed by the orientation.
 */
inline Eigen::MatrixXd coboundary(const CellularSheaf& s) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(s.dim_c1(), s.dim_c0());
    const Graph& g = s.graph();
    for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        d.block(s.edge_offset(e), s.vertex_offset(ed.u), s.edge_dim(e), s.vertex_dim(ed.u)) =
            -s.restriction_first(e);
        d.block(s.edge_offset(e), s.vertex_offset(ed.v), s.edge_dim(e), s.vertex_dim(ed.v)) =
            s.restriction_second(e);
    }
    return d;
}

/// Sheaf Laplacian L_F = δᵀδ (symmetric positive semidefinite, dim C0 square).
inline Eigen::MatrixXd sheaf_laplacian(const CellularSheaf& s) {
    Eigen::MatrixXd d = coboundary(s);
    return d.transpose() * d;
}

namespace detail {
inline std::pair<int, int> cohomology_from_rank(const CellularSheaf& s, int rank) {
    return {s.dim_c0() - rank, s.dim_c1() - rank};
}

inline int numerical_rank(const Eigen::MatrixXd& m, double tolerance) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    double tol = tolerance;
    if (tol <= 0.0)
        tol = 1e-9 * sv(0) * static_cast<double>(std::max(m.rows(), m.cols()));
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) >= tol && sv(i) > 0.0) ++rank;
    return rank;
}
} // namespace detail

/**
 * (h0, h1) = (dim ker δ, dim coker δ) via the numerical rank of the
 * coboundary: singular values below rank_tolerance count as zero.
 */
inline std::pair<int, int> cohomology_dims(const CellularSheaf& s, double rank_tolerance) {
    if (rank_tolerance <= 0.0)
        throw std::invalid_argument("cohomology_dims: rank tolerance must be positive");
    return detail::cohomology_from_rank(s, detail::numerical_rank(coboundary(s), rank_tolerance));
}

/// Same with the default tolerance 1e-9 * (largest singular value) * max(dims).
inline std::pair<int, int> cohomology_dims(const CellularSheaf& s) {
    return detail::cohomology_from_rank(s, detail::numerical_rank(coboundary(s), 0.0));
}

} // namespace sheafcd
