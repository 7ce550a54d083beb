#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sheafcd/sheaf.hpp"

namespace sheafcd {

/// Decay profiles for the bounded-confidence dynamics.
enum class Phi { phi1 = 1, phi2 = 2, phi3 = 3, phi4 = 4, constant_one = 5 };

/**
 * Bump function phi: [0,inf) -> [0,1], monotone non-increasing, zero at and
 * beyond the confidence threshold. constant_one is the exception (identically
 * 1, giving the plain consensus flow dx/dt = -L_F x).
 */
struct BumpFunction {
    Phi id = Phi::phi1;
    double threshold = 1.0;
};

inline BumpFunction bump_from_index(int index, double threshold = 1.0) {
    if (index < 1 || index > 4)
        throw std::invalid_argument("bump_from_index: phi index must be 1..4");
    return BumpFunction{static_cast<Phi>(index), threshold};
}

namespace detail {
// Unit-threshold profiles on [0,1); all vanish for y >= 1.
inline double bump_eval_unit(Phi id, double y) {
    if (id == Phi::constant_one) return 1.0;
    if (y >= 1.0) return 0.0;
    switch (id) {
        case Phi::phi1: return 1.0 - y;
        case Phi::phi2: return 1.0 - y * y;
        case Phi::phi3: return (1.0 - y) * (1.0 - y);
        case Phi::phi4: return 1.0 - y - std::sin(6.283185307179586476925286766559 * y) / 7.0;
        default: return 1.0;
    }
}
} // namespace detail

/// phi(x) for x >= 0; negative arguments are a domain error.
inline double bump_eval(const BumpFunction& phi, double x) {
    if (x < 0.0)
        throw std::domain_error("bump_eval: argument must be non-negative");
    return detail::bump_eval_unit(phi.id, x / phi.threshold);
}

/// One opinion vector per vertex stalk plus the ODE time.
struct OpinionState {
    std::vector<Eigen::VectorXd> x;
    double t = 0.0;
};

enum class EvolveStatus { converged, aborted };

struct EvolutionOutcome {
    OpinionState state;
    EvolveStatus status = EvolveStatus::converged;
    /// Edges whose restricted difference is <= eps in the final state.
    std::vector<EdgeIndex> consensus_edges;
};

namespace detail {
inline void check_state(const CellularSheaf& s, const OpinionState& state) {
    if (static_cast<int>(state.x.size()) != s.graph().vertex_count())
        throw std::invalid_argument("opinion state: one vector per vertex required");
    for (Vertex v = 0; v < s.graph().vertex_count(); ++v)
        if (state.x[static_cast<std::size_t>(v)].size() != s.vertex_dim(v))
            throw std::invalid_argument("opinion state: dimension mismatch at vertex " +
                                        std::to_string(v));
}

inline Eigen::VectorXd flatten(const CellularSheaf& s, const OpinionState& state) {
    Eigen::VectorXd flat(s.dim_c0());
    for (Vertex v = 0; v < s.graph().vertex_count(); ++v)
        flat.segment(s.vertex_offset(v), s.vertex_dim(v)) = state.x[static_cast<std::size_t>(v)];
    return flat;
}

inline OpinionState unflatten(const CellularSheaf& s, const Eigen::VectorXd& flat, double t) {
    OpinionState state;
    state.t = t;
    state.x.reserve(static_cast<std::size_t>(s.graph().vertex_count()));
    for (Vertex v = 0; v < s.graph().vertex_count(); ++v)
        state.x.push_back(flat.segment(s.vertex_offset(v), s.vertex_dim(v)));
    return state;
}

inline bool all_stalks_scalar(const CellularSheaf& s) {
    for (Vertex v = 0; v < s.graph().vertex_count(); ++v)
        if (s.vertex_dim(v) != 1) return false;
    for (EdgeIndex e = 0; e < s.graph().edge_count(); ++e)
        if (s.edge_dim(e) != 1) return false;
    return true;
}
} // namespace detail

/// Norm of the restricted difference ||F_{u⊂e} x_u - F_{v⊂e} x_v|| along e.
inline double edge_difference(const CellularSheaf& s, const OpinionState& state, EdgeIndex e) {
    detail::check_state(s, state);
    const Edge& ed = s.graph().edge(e);
    return (s.restriction_first(e) * state.x[static_cast<std::size_t>(ed.u)] -
            s.restriction_second(e) * state.x[static_cast<std::size_t>(ed.v)])
        .norm();
}

/**
 * Right-hand side of the bounded-confidence dynamics: for each vertex v,
 *   dx_v = sum over edges e = {u, v}:
 *            phi(||F_{u⊂e} x_u - F_{v⊂e} x_v||) F_{v⊂e}^T (F_{u⊂e} x_u - F_{v⊂e} x_v).
 * With phi == constant_one this is exactly -L_F x.
 */
inline std::vector<Eigen::VectorXd> derivative(const CellularSheaf& s, const BumpFunction& phi,
                                               const OpinionState& state) {
    detail::check_state(s, state);
    const Graph& g = s.graph();
    std::vector<Eigen::VectorXd> dx;
    dx.reserve(static_cast<std::size_t>(g.vertex_count()));
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        dx.push_back(Eigen::VectorXd::Zero(s.vertex_dim(v)));
    for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        // r points from u's restricted opinion toward v's.
        Eigen::VectorXd r = s.restriction_second(e) * state.x[static_cast<std::size_t>(ed.v)] -
                            s.restriction_first(e) * state.x[static_cast<std::size_t>(ed.u)];
        double w = bump_eval(phi, r.norm());
        if (w == 0.0) continue;
        dx[static_cast<std::size_t>(ed.u)].noalias() += w * (s.restriction_first(e).transpose() * r);
        dx[static_cast<std::size_t>(ed.v)].noalias() -= w * (s.restriction_second(e).transpose() * r);
    }
    return dx;
}

/**
 * Integrates the bounded-confidence flow with fixed-step explicit Euler
 * until every edge difference leaves the open window (eps, threshold), or
 * aborts once t exceeds t_max. The stopping check runs before every step,
 * so an initially stable state converges at t = 0.
 *
 * Throws std::invalid_argument on bad parameters and std::runtime_error if
 * the state stops being finite.
 */
inline EvolutionOutcome evolve(const CellularSheaf& s, const BumpFunction& phi,
                               const OpinionState& x0, double eps, double t_max = 1000.0,
                               double dt = 0.01) {
    const double D = phi.threshold;
    if (!(eps > 0.0) || !(eps < D))
        throw std::invalid_argument("evolve: eps must lie in (0, threshold)");
    if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("evolve: t_max must be positive");
    detail::check_state(s, x0);

    const Graph& g = s.graph();
    const int edge_count = g.edge_count();
    const long max_steps = static_cast<long>(std::ceil(t_max / dt - 1e-12));

    Eigen::VectorXd x = detail::flatten(s, x0);
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(s.dim_c0());
    Eigen::VectorXd r_flat(std::max(s.dim_c1(), 1));
    std::vector<double> norms(static_cast<std::size_t>(edge_count), 0.0);

    const bool scalar = detail::all_stalks_scalar(s);
    // Scalar fast path data: endpoint offsets and restriction coefficients.
    std::vector<int> off_u, off_v;
    std::vector<double> cu, cv;
    if (scalar) {
        off_u.reserve(static_cast<std::size_t>(edge_count));
        off_v.reserve(static_cast<std::size_t>(edge_count));
        cu.reserve(static_cast<std::size_t>(edge_count));
        cv.reserve(static_cast<std::size_t>(edge_count));
        for (EdgeIndex e = 0; e < edge_count; ++e) {
            off_u.push_back(s.vertex_offset(g.edge(e).u));
            off_v.push_back(s.vertex_offset(g.edge(e).v));
            cu.push_back(s.restriction_first(e)(0, 0));
            cv.push_back(s.restriction_second(e)(0, 0));
        }
    }

    const Phi phi_id = phi.id;
    const double inv_threshold = 1.0 / D;
    long steps = 0;
    EvolveStatus status;

    for (;;) {
        bool all_outside = true;
        bool finite = true;
        if (scalar) {
            for (int e = 0; e < edge_count; ++e) {
                double r = cv[static_cast<std::size_t>(e)] * x[off_v[static_cast<std::size_t>(e)]] -
                           cu[static_cast<std::size_t>(e)] * x[off_u[static_cast<std::size_t>(e)]];
                r_flat[e] = r;
                double n = std::abs(r);
                norms[static_cast<std::size_t>(e)] = n;
                finite = finite && std::isfinite(n);
                if (n > eps && n < D) all_outside = false;
            }
        } else {
            for (EdgeIndex e = 0; e < edge_count; ++e) {
                const Edge& ed = g.edge(e);
                auto r = r_flat.segment(s.edge_offset(e), s.edge_dim(e));
                r.noalias() = s.restriction_second(e) * x.segment(s.vertex_offset(ed.v), s.vertex_dim(ed.v));
                r.noalias() -= s.restriction_first(e) * x.segment(s.vertex_offset(ed.u), s.vertex_dim(ed.u));
                double n = r.norm();
                norms[static_cast<std::size_t>(e)] = n;
                finite = finite && std::isfinite(n);
                if (n > eps && n < D) all_outside = false;
            }
        }
        if (!finite)
            throw std::runtime_error("evolve: state diverged to non-finite values");
        if (all_outside) {
            status = EvolveStatus::converged;
            break;
        }
        if (steps >= max_steps) {
            status = EvolveStatus::aborted;
            break;
        }

        dx.setZero();
        if (scalar) {
            for (int e = 0; e < edge_count; ++e) {
                double w = detail::bump_eval_unit(phi_id, norms[static_cast<std::size_t>(e)] * inv_threshold);
                if (w == 0.0) continue;
                double wr = w * r_flat[e];
                dx[off_u[static_cast<std::size_t>(e)]] += cu[static_cast<std::size_t>(e)] * wr;
                dx[off_v[static_cast<std::size_t>(e)]] -= cv[static_cast<std::size_t>(e)] * wr;
            }
        } else {
            for (EdgeIndex e = 0; e < edge_count; ++e) {
                double w = detail::bump_eval_unit(phi_id, norms[static_cast<std::size_t>(e)] * inv_threshold);
                if (w == 0.0) continue;
                const Edge& ed = g.edge(e);
                auto r = r_flat.segment(s.edge_offset(e), s.edge_dim(e));
                dx.segment(s.vertex_offset(ed.u), s.vertex_dim(ed.u)).noalias() +=
                    w * (s.restriction_first(e).transpose() * r);
                dx.segment(s.vertex_offset(ed.v), s.vertex_dim(ed.v)).noalias() -=
                    w * (s.restriction_second(e).transpose() * r);
            }
        }
        x += dt * dx;
        ++steps;
    }

    EvolutionOutcome out;
    out.status = status;
    out.state = detail::unflatten(s, x, static_cast<double>(steps) * dt);
    for (EdgeIndex e = 0; e < edge_count; ++e)
        if (norms[static_cast<std::size_t>(e)] <= eps) out.consensus_edges.push_back(e);
    return out;
}

/**
 * Closed-form trajectory of the 6-vertex non-convergence example: leaves at
 * a(t) and 1+b(t), hubs at b(t) and 1+a(t), valid while 1 + a0 > b0 > a0.
 * Returns (a(t), b(t)).
 */
inline std::pair<double, double> fig5_closed_form(double a0, double b0, double t) {
    if (!(1.0 + a0 > b0) || !(b0 > a0))
        throw std::domain_error("fig5_closed_form: requires 1 + a0 > b0 > a0");
    const double c = std::log(1.0 / (b0 - a0) - 1.0);
    const double gap = 1.0 / (std::exp(2.0 * t + c) + 1.0);
    return {0.5 * (a0 + b0 - gap), 0.5 * (a0 + b0 + gap)};
}

} // namespace sheafcd
