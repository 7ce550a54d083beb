#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sheafcd/algorithms.hpp"
#include "sheafcd/graph.hpp"
#include "sheafcd/rng.hpp"

namespace sheafcd {

enum class Algo { constant, nonconstant, deterministic };

/**
 * Monte Carlo sweep configuration. The grid depends on the algorithm:
 * constant sweeps enumerate phi x n x d (d innermost), nonconstant sweeps
 * enumerate p, deterministic sweeps enumerate a x b (b innermost). Per-run
 * seeds derive from (master_seed, point index, run index), so results are
 * independent of scheduling.
 */
struct SweepConfig {
    Algo algorithm = Algo::constant;
    std::vector<double> d_values;
    std::vector<Phi> phi_values;
    std::vector<int> n_values;
    std::vector<double> p_values;
    std::vector<double> a_values;
    std::vector<double> b_values;
    int runs_per_point = 1000;
    std::uint64_t master_seed = 0;
    double eps = 0.0033;
    double t_max = 1000.0;
    double dt = 0.01;
    int threads = 0;  // 0 = hardware concurrency
};

/// One detection run inside a sweep.
struct RunRecord {
    bool aborted = false;
    int clusters = 0;
    double q = 0.0;
    std::vector<int> partition;  // canonical cluster ids, empty when aborted
};

/// Statistics of one grid point. Aborted runs are counted but excluded
/// from every mean; has_stats is false when every run aborted.
struct PointStats {
    std::vector<double> params;
    int runs = 0;
    int aborts = 0;
    bool has_stats = false;
    double num_mean = std::numeric_limits<double>::quiet_NaN();
    double num_err = std::numeric_limits<double>::quiet_NaN();
    double q_mean = std::numeric_limits<double>::quiet_NaN();
    double q_err = std::numeric_limits<double>::quiet_NaN();
    double pmax = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> modal_partition;
    std::vector<RunRecord> raw;
};

struct SweepResult {
    Algo algorithm = Algo::constant;
    std::vector<std::string> param_names;
    std::vector<PointStats> points;
};

/// Error-bar radius sigma + (aborts/N) * mean.
inline double error_radius(double mean, double sigma, int aborts, int n) {
    if (n < 1 || aborts < 0 || aborts > n)
        throw std::invalid_argument("error_radius: need 0 <= aborts <= N, N >= 1");
    return sigma + (static_cast<double>(aborts) / static_cast<double>(n)) * mean;
}

/**
 * Modal partition (up to relabeling; Partition ids are already canonical)
 * and its relative frequency. Ties break toward the lexicographically
 * smallest id vector.
 */
inline std::pair<Partition, double> most_likely_partition_frequency(
    const std::vector<Partition>& results) {
    if (results.empty())
        throw std::invalid_argument("most_likely_partition_frequency: empty input");
    std::map<std::vector<int>, int> counts;
    for (const Partition& p : results) ++counts[p.cluster_ids()];
    const std::vector<int>* best = nullptr;
    int best_count = 0;
    for (const auto& [ids, count] : counts)
        if (count > best_count) {
            best = &ids;
            best_count = count;
        }
    return {Partition::from_cluster_ids(*best),
            static_cast<double>(best_count) / static_cast<double>(results.size())};
}

inline std::vector<double> default_d_grid() {
    std::vector<double> v;
    for (int i = 1; i <= 12; ++i) v.push_back(static_cast<double>(i) / 2.0);
    return v;
}

inline std::vector<double> default_p_grid() {
    std::vector<double> v;
    for (int i = 0; i <= 35; ++i) v.push_back(static_cast<double>(i) / 50.0);
    return v;
}

inline std::vector<double> default_a_grid() {
    std::vector<double> v;
    for (int i = 0; i <= 20; ++i) v.push_back(static_cast<double>(i) / 20.0);
    return v;
}

inline std::vector<double> default_b_grid() {
    std::vector<double> v;
    for (int i = 0; i <= 28; ++i) v.push_back(-2.0 + static_cast<double>(i) / 4.0);
    return v;
}

namespace detail {

struct PointSpec {
    std::vector<double> params;
};

inline std::vector<PointSpec> enumerate_points(const SweepConfig& cfg) {
    std::vector<PointSpec> points;
    switch (cfg.algorithm) {
        case Algo::constant:
            if (cfg.d_values.empty() || cfg.phi_values.empty() || cfg.n_values.empty())
                throw std::invalid_argument("run_sweep: constant sweep needs d, phi and n grids");
            for (Phi phi : cfg.phi_values)
                for (int n : cfg.n_values)
                    for (double d : cfg.d_values)
                        points.push_back({{d, static_cast<double>(static_cast<int>(phi)),
                                           static_cast<double>(n)}});
            break;
        case Algo::nonconstant:
            if (cfg.p_values.empty())
                throw std::invalid_argument("run_sweep: nonconstant sweep needs a p grid");
            for (double p : cfg.p_values) points.push_back({{p}});
            break;
        case Algo::deterministic:
            if (cfg.a_values.empty() || cfg.b_values.empty())
                throw std::invalid_argument("run_sweep: deterministic sweep needs a and b grids");
            for (double a : cfg.a_values)
                for (double b : cfg.b_values) points.push_back({{a, b}});
            break;
    }
    return points;
}

inline std::vector<std::string> param_names(Algo algorithm) {
    switch (algorithm) {
        case Algo::constant: return {"d", "phi", "n"};
        case Algo::nonconstant: return {"p"};
        case Algo::deterministic: return {"a", "b"};
    }
    return {};
}

inline RunRecord execute_run(const Graph& g, const SweepConfig& cfg, const PointSpec& point,
                             std::uint64_t seed) {
    DetectionResult det;
    SplitMix64 rng(seed);
    switch (cfg.algorithm) {
        case Algo::constant: {
            ConstantSheafParams params;
            params.d = point.params[0];
            params.phi = BumpFunction{static_cast<Phi>(static_cast<int>(point.params[1])), 1.0};
            params.n = static_cast<int>(point.params[2]);
            params.eps = cfg.eps;
            params.t_max = cfg.t_max;
            params.dt = cfg.dt;
            det = detect_constant(g, params, rng);
            break;
        }
        case Algo::nonconstant:
            det = detect_nonconstant(g, point.params[0], rng);
            break;
        case Algo::deterministic:
            det = detect_deterministic(g, point.params[0], point.params[1]);
            break;
    }
    RunRecord rec;
    if (det.status == DetectStatus::aborted) {
        rec.aborted = true;
        return rec;
    }
    rec.clusters = det.partition->cluster_count();
    rec.q = modularity(g, *det.partition);
    rec.partition = det.partition->cluster_ids();
    return rec;
}

} // namespace detail

/**
 * Runs the configured sweep: runs_per_point seeded detections per grid
 * point (forced to 1 for the deterministic algorithm), executed across a
 * thread pool; aggregation order is fixed by grid order, so the result is
 * bit-identical for identical configs regardless of thread count.
 */
inline SweepResult run_sweep(const Graph& g, const SweepConfig& cfg) {
    if (cfg.runs_per_point < 1)
        throw std::invalid_argument("run_sweep: runs_per_point must be at least 1");
    const std::vector<detail::PointSpec> points = detail::enumerate_points(cfg);
    const int runs = cfg.algorithm == Algo::deterministic ? 1 : cfg.runs_per_point;
    const long total = static_cast<long>(points.size()) * runs;

    std::vector<std::vector<RunRecord>> records(points.size(), std::vector<RunRecord>(
                                                                   static_cast<std::size_t>(runs)));
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            long task = next.fetch_add(1, std::memory_order_relaxed);
            if (task >= total) return;
            std::size_t point = static_cast<std::size_t>(task / runs);
            std::size_t run = static_cast<std::size_t>(task % runs);
            try {
                records[point][run] = detail::execute_run(
                    g, cfg, points[point],
                    derive_seed(cfg.master_seed, static_cast<std::uint64_t>(point),
                                static_cast<std::uint64_t>(run)));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(total, std::memory_order_relaxed);
                return;
            }
        }
    };
    unsigned hw = std::thread::hardware_concurrency();
    long want = cfg.threads > 0 ? cfg.threads : (hw > 0 ? static_cast<long>(hw) : 1);
    long nthreads = std::max(1L, std::min(want, total));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (long i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    SweepResult result;
    result.algorithm = cfg.algorithm;
    result.param_names = detail::param_names(cfg.algorithm);
    result.points.reserve(points.size());
    for (std::size_t pt = 0; pt < points.size(); ++pt) {
        PointStats st;
        st.params = points[pt].params;
        st.runs = runs;
        double num_sum = 0.0, q_sum = 0.0;
        int converged = 0;
        std::vector<Partition> parts;
        for (const RunRecord& rec : records[pt]) {
            if (rec.aborted) {
                ++st.aborts;
                continue;
            }
            ++converged;
            num_sum += static_cast<double>(rec.clusters);
            q_sum += rec.q;
            parts.push_back(Partition::from_cluster_ids(rec.partition));
        }
        if (converged > 0) {
            st.has_stats = true;
            st.num_mean = num_sum / converged;
            st.q_mean = q_sum / converged;
            double num_var = 0.0, q_var = 0.0;
            for (const RunRecord& rec : records[pt]) {
                if (rec.aborted) continue;
                num_var += (rec.clusters - st.num_mean) * (rec.clusters - st.num_mean);
                q_var += (rec.q - st.q_mean) * (rec.q - st.q_mean);
            }
            st.num_err = error_radius(st.num_mean, std::sqrt(num_var / converged), st.aborts, runs);
            st.q_err = error_radius(st.q_mean, std::sqrt(q_var / converged), st.aborts, runs);
            auto [modal, freq] = most_likely_partition_frequency(parts);
            st.pmax = freq;
            st.modal_partition = modal.cluster_ids();
        }
        st.raw = std::move(records[pt]);
        result.points.push_back(std::move(st));
    }
    return result;
}

namespace detail {
inline std::string format_number(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}
} // namespace detail

/**
 * CSV emission: one header line, one row per grid point, comma separator,
 * '.' decimal point. Columns: the grid parameters, then num, numerr, qav,
 * qaverr, aborts, pmax. Statistics of fully-aborted points print as nan.
 */
inline void write_csv(const SweepResult& result, std::ostream& out) {
    for (const auto& name : result.param_names) out << name << ',';
    out << "num,numerr,qav,qaverr,aborts,pmax\n";
    for (const PointStats& st : result.points) {
        for (double p : st.params) out << detail::format_number(p) << ',';
        out << detail::format_number(st.num_mean) << ',' << detail::format_number(st.num_err)
            << ',' << detail::format_number(st.q_mean) << ',' << detail::format_number(st.q_err)
            << ',' << st.aborts << ',' << detail::format_number(st.pmax) << '\n';
        if (!out) throw std::runtime_error("write_csv: write failure");
    }
    if (!out) throw std::runtime_error("write_csv: write failure");
}

inline std::string to_csv(const SweepResult& result) {
    std::ostringstream ss;
    write_csv(result, ss);
    return ss.str();
}

} // namespace sheafcd
