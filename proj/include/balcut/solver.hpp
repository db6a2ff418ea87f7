#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "balcut/common.hpp"
#include "balcut/functionals.hpp"
#include "balcut/graph.hpp"
#include "balcut/inner_solver.hpp"
#include "balcut/spectral.hpp"
#include "balcut/subgradient.hpp"

namespace balcut {

enum class CutType { Cheeger, Sparsest, CustomMu };
enum class InitKind { Spectral, RandomVector, Provided };

struct SolverConfig {
    CutType cut_type = CutType::Cheeger;
    int theta_rounds = 0;  // T_theta
    double theta_min = 0.3;
    double theta_max = 0.8;
    double eps_descent = 1e-12;
    int max_iters_per_phase = 1000;  // safety cap; theory terminates well below
    std::uint64_t seed = 1;
    SubgradientMode subgradient_mode = SubgradientMode::Boundary;
    InitKind init = InitKind::Spectral;
    SpectralVariant spectral_variant = SpectralVariant::Symmetric;
    double spectral_tol = 1e-8;
    int spectral_max_matvecs = 5000;
    std::vector<double> initial_vector;  // used when init == Provided

    void validate() const {
        if (!(theta_min > 0.0) || theta_min > theta_max || theta_max > 1.0)
            throw std::invalid_argument("need 0 < theta_min <= theta_max <= 1");
        if (theta_rounds < 0) throw std::invalid_argument("theta_rounds must be >= 0");
        if (max_iters_per_phase < 1) throw std::invalid_argument("bad iteration cap");
    }
};

enum class PhaseKind { Sip, SipTheta };

struct PhaseReport {
    PhaseKind kind;
    double theta;
    int iterations;              // inner solves performed
    std::vector<double> r_trace;  // strictly decreasing accepted values
    double final_value;
    bool cap_hit = false;
    bool contract_stop = false;  // Random-mode subgradient failed the inner contract
};

struct RunReport {
    std::vector<PhaseReport> phases;
    double best_value = 0.0;  // combinatorial value of best_partition
    std::vector<double> best_x;
    TernaryPartition best_partition;
    long iterations_total = 0;
    double wall_time_ms = 0.0;
    std::uint64_t seed = 0;
    bool cap_flagged = false;
    bool spectral_fallback = false;
};

/// Snapshot of one solver step, handed to observers (tests hook memberships
/// and descent invariants through this).
struct IterateContext {
    const Graph& g;
    double theta;
    int iteration;
    const std::vector<double>& x;
    double r;
    const SubgradientPipeline& pipe;
    const InnerInput& inner_input;
    const InnerResult& inner_result;
    const std::vector<double>& x_next;
    double r_next;
};

using IterateObserver = std::function<void(const IterateContext&)>;

/// V1 = {i : x_i > eps}, V2 = {i : x_i < -eps} for a nonconstant iterate.
inline TernaryPartition extract_partition(const std::vector<double>& x) {
    if (!is_nonconstant(x)) throw std::invalid_argument("constant vector has no partition");
    const double eps = 1e-12 * std::max(1.0, norm_inf(x));
    TernaryPartition p;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > eps) p.v1.push_back(static_cast<int>(i));
        if (x[i] < -eps) p.v2.push_back(static_cast<int>(i));
    }
    return p;
}

namespace detail {

/// One SIP / SIP_theta phase. Stops once the objective no longer decreases;
/// the returned iterate is the one at which the no-descent condition was
/// established (after hopping onto the ternary lattice if the start was a
/// continuous vector), so Theorem-level locality applies to the output.
inline std::pair<std::vector<double>, PhaseReport> run_phase(
    const Graph& g, std::vector<double> x, double theta, const SolverConfig& cfg,
    RandomStream& rng, const IterateObserver& observer) {
    if (!is_nonconstant(x)) throw std::invalid_argument("initial vector is constant");

    PhaseReport rep;
    rep.kind = theta == 1.0 ? PhaseKind::Sip : PhaseKind::SipTheta;
    rep.theta = theta;
    rep.iterations = 0;

    double r = objective_T(g, x, theta);
    rep.r_trace.push_back(r);

    for (;;) {
        if (rep.iterations >= cfg.max_iters_per_phase) {
            rep.cap_hit = true;
            break;
        }
        SubgradientPipeline pipe =
            make_subgradient(g, x, r, theta, cfg.subgradient_mode, rng);
        InnerInput in = build_l(g, pipe.bundle.s, theta);
        InnerResult inner;
        try {
            inner = solve_inner(in, rng);
        } catch (const contract_error&) {
            if (cfg.subgradient_mode == SubgradientMode::Random) {
                rep.contract_stop = true;
                break;
            }
            throw;
        }
        ++rep.iterations;
        const double r_next = objective_T(g, inner.x, theta);
        if (observer)
            observer(IterateContext{g, theta, rep.iterations - 1, x, r, pipe, in, inner,
                                    inner.x, r_next});
        if (r_next < r - cfg.eps_descent * std::max(1.0, std::abs(r))) {
            x = std::move(inner.x);
            r = r_next;
            rep.r_trace.push_back(r);
            continue;
        }
        if (!is_ternary_scaled(x)) {
            // Equal-value move from the continuous initializer onto the
            // ternary lattice; the next pass re-checks descent there.
            x = std::move(inner.x);
            r = std::min(r, r_next);
            continue;
        }
        break;
    }
    rep.final_value = r;
    return {std::move(x), std::move(rep)};
}

inline std::vector<double> random_init(int n, RandomStream& rng) {
    std::vector<double> x(n);
    do {
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
    } while (!is_nonconstant(x));
    return x;
}

}  // namespace detail

inline std::pair<std::vector<double>, PhaseReport> sip_run(
    const Graph& g, std::vector<double> x0, const SolverConfig& cfg, RandomStream& rng,
    const IterateObserver& observer = {}) {
    return detail::run_phase(g, std::move(x0), 1.0, cfg, rng, observer);
}

inline std::pair<std::vector<double>, PhaseReport> sip_theta_run(
    const Graph& g, std::vector<double> x0, double theta, const SolverConfig& cfg,
    RandomStream& rng, const IterateObserver& observer = {}) {
    if (!(theta > 0.0) || theta > 1.0)
        throw std::invalid_argument("theta must lie in (0, 1]");
    return detail::run_phase(g, std::move(x0), theta, cfg, rng, observer);
}

/// SIP-perturb: T_theta rounds of (SIP -> SIP_theta with theta drawn uniformly
/// from [theta_min, theta_max]) followed by a final SIP; reports the best of
/// the T_theta + 1 SIP outputs.
inline RunReport sip_perturb(const Graph& g, const SolverConfig& cfg, RandomStream& rng,
                             const IterateObserver& observer = {}) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.seed = cfg.seed;

    std::vector<double> x;
    switch (cfg.init) {
        case InitKind::Provided:
            x = cfg.initial_vector;
            break;
        case InitKind::RandomVector:
            x = detail::random_init(g.order(), rng);
            break;
        case InitKind::Spectral: {
            EigInitOptions opts;
            opts.tol = cfg.spectral_tol;
            opts.max_matvecs = cfg.spectral_max_matvecs;
            opts.variant = cfg.spectral_variant;
            EigInitResult eig = second_eigenvector(g, opts, rng);
            if (eig.converged && is_nonconstant(eig.vector)) {
                x = std::move(eig.vector);
            } else {
                report.spectral_fallback = true;
                x = detail::random_init(g.order(), rng);
            }
            break;
        }
    }

    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> best_x;
    auto consider = [&](const std::vector<double>& cand, double value) {
        if (value < best_value) {
            best_value = value;
            best_x = cand;
        }
    };

    for (int round = 0; round < cfg.theta_rounds; ++round) {
        auto [xs, rep] = detail::run_phase(g, std::move(x), 1.0, cfg, rng, observer);
        x = std::move(xs);
        consider(x, rep.final_value);
        report.cap_flagged |= rep.cap_hit;
        report.phases.push_back(std::move(rep));

        const double theta = rng.uniform(cfg.theta_min, cfg.theta_max);
        auto [xt, rep_t] = detail::run_phase(g, std::move(x), theta, cfg, rng, observer);
        x = std::move(xt);
        report.cap_flagged |= rep_t.cap_hit;
        report.phases.push_back(std::move(rep_t));
    }
    auto [xf, rep_f] = detail::run_phase(g, std::move(x), 1.0, cfg, rng, observer);
    consider(xf, rep_f.final_value);
    report.cap_flagged |= rep_f.cap_hit;
    report.phases.push_back(std::move(rep_f));

    report.best_x = std::move(best_x);
    report.best_partition = extract_partition(report.best_x);
    report.best_value = balanced_cut_value(g, BinaryCut{report.best_partition.v1});
    for (const auto& ph : report.phases) report.iterations_total += ph.iterations;
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

struct RunStats {
    RunReport report;
    double rel_err6 = 0.0;  // (B(x^6) - B(x*)) / B(x*) within the first SIP phase
    double rel_gain = 0.0;  // (B(x*) - B(y*)) / B(x*), y* the overall best
};

struct MultiRunReport {
    std::vector<RunStats> runs;
    double min_value = 0.0;
    double mean_value = 0.0;
    double max_value = 0.0;
    double mean_time_ms = 0.0;
};

inline unsigned max_run_threads() {
    if (const char* env = std::getenv("BALCUT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Independent seeded runs executed concurrently over the shared graph;
/// results land in per-run slots so scheduling cannot affect the report.
inline MultiRunReport multi_run(const Graph& g, const SolverConfig& cfg, int n_runs) {
    if (n_runs < 1) throw std::invalid_argument("need at least one run");
    cfg.validate();
    MultiRunReport agg;
    agg.runs.resize(n_runs);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n_runs) return;
            RandomStream rng = RandomStream::for_run(cfg.seed, k);
            RunStats stats;
            stats.report = sip_perturb(g, cfg, rng);
            const auto& first = stats.report.phases.front();
            const auto& tr = first.r_trace;
            const double r_star = tr.back();
            const double r6 = tr[std::min<std::size_t>(6, tr.size() - 1)];
            stats.rel_err6 = (r6 - r_star) / r_star;
            stats.rel_gain =
                (first.final_value - stats.report.best_value) / first.final_value;
            agg.runs[k] = std::move(stats);
        }
    };

    const unsigned threads =
        std::min<unsigned>(max_run_threads(), static_cast<unsigned>(n_runs));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    agg.min_value = std::numeric_limits<double>::infinity();
    agg.max_value = -std::numeric_limits<double>::infinity();
    KahanSum sum, time_sum;
    for (const auto& rs : agg.runs) {
        agg.min_value = std::min(agg.min_value, rs.report.best_value);
        agg.max_value = std::max(agg.max_value, rs.report.best_value);
        sum.add(rs.report.best_value);
        time_sum.add(rs.report.wall_time_ms);
    }
    agg.mean_value = sum.value() / n_runs;
    agg.mean_time_ms = time_sum.value() / n_runs;
    return agg;
}

}  // namespace balcut
