#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "balcut/common.hpp"
#include "balcut/functionals.hpp"
#include "balcut/graph.hpp"

namespace balcut {

enum class SubgradientMode { Boundary, Random };

/// Characterization of dN(x) around a chosen median point alpha.
struct NBoundsData {
    double alpha;
    std::vector<int> s_alpha;  // {i : x_i = alpha}
    double a_med;              // sum_{x<alpha} mu - sum_{x>alpha} mu
    double b_med;              // sum_{x=alpha} mu
    std::vector<double> a_lo;  // per-vertex interval of (dN(x))_i
    std::vector<double> a_hi;
};

/// Characterization of dI+(x): (dI+(x))_i = [p_i - q_i, p_i + q_i].
struct IPlusParts {
    std::vector<double> p;
    std::vector<double> q;
    std::vector<std::vector<int>> nen;  // negative equal neighbors per vertex
    std::vector<char> edge_is_nen;      // per edge id
};

/// Boundary indicator b plus the selection state derived from it.
struct BoundaryData {
    std::vector<double> a;        // selected point inside the dN bounds
    std::vector<double> b;
    std::vector<double> b_prime;  // (|b| + (theta-1) d) / e
    std::vector<int> chi;         // preferred sign, in {-1, 0, 1}
    std::vector<std::int8_t> side;  // +1 on S+, -1 on S-, 0 on S<
    double r;
    double theta;
};

struct SubgradientBundle {
    std::vector<double> u;  // in dI+(x)
    std::vector<double> v;  // in dN(x)
    std::vector<double> s;  // (u + r v) / e
    int istar = -1;         // chosen desired vertex, -1 when none
    std::vector<int> sigma_rank;     // ascending-|b| rank of each vertex
    std::vector<double> edge_coeff;  // z_ij per edge id
    bool candidates_empty = true;
};

/// Single point out of the median interval: the endpoint whose level set
/// carries more mass (tie -> lower endpoint).
inline double choose_alpha(const MedianResult& med, const std::vector<double>& x,
                           const std::vector<double>& mu) {
    if (med.c_lo == med.c_hi) return med.c_lo;
    double mass_lo = 0.0, mass_hi = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == med.c_lo) mass_lo += mu[i];
        if (x[i] == med.c_hi) mass_hi += mu[i];
    }
    return mass_hi > mass_lo ? med.c_hi : med.c_lo;
}

inline NBoundsData partial_n_bounds(const Graph& g, const std::vector<double>& x,
                                    double alpha) {
    const int n = g.order();
    const double eps = 1e-12 * std::max(1.0, norm_inf(x));
    NBoundsData nb;
    nb.alpha = alpha;
    KahanSum below, above, at;
    for (int i = 0; i < n; ++i) {
        if (std::abs(x[i] - alpha) <= eps) {
            nb.s_alpha.push_back(i);
            at.add(g.mu(i));
        } else if (x[i] < alpha) {
            below.add(g.mu(i));
        } else {
            above.add(g.mu(i));
        }
    }
    nb.a_med = below.value() - above.value();
    nb.b_med = at.value();
    nb.a_lo.resize(n);
    nb.a_hi.resize(n);
    std::vector<char> in_alpha(n, 0);
    for (int i : nb.s_alpha) in_alpha[i] = 1;
    const bool wide = nb.s_alpha.size() >= 2;
    for (int i = 0; i < n; ++i) {
        if (!in_alpha[i]) {
            const double v = g.mu(i) * sign_pos(x[i] - alpha);
            nb.a_lo[i] = nb.a_hi[i] = v;
        } else if (wide) {
            nb.a_lo[i] = std::max(nb.a_med - nb.b_med + g.mu(i), -g.mu(i));
            nb.a_hi[i] = std::min(nb.a_med + nb.b_med - g.mu(i), g.mu(i));
        } else {
            nb.a_lo[i] = nb.a_hi[i] = nb.a_med;
        }
    }
    return nb;
}

inline IPlusParts partial_iplus_parts(const Graph& g, const std::vector<double>& x) {
    const int n = g.order();
    const double eps = 1e-12 * norm_inf(x);
    IPlusParts ip;
    ip.p.assign(n, 0.0);
    ip.q.assign(n, 0.0);
    ip.nen.assign(n, {});
    ip.edge_is_nen.assign(g.edge_count(), 0);
    std::vector<KahanSum> p(n), q(n);
    for (std::size_t eid = 0; eid < g.edge_count(); ++eid) {
        const auto& e = g.edges()[eid];
        const double sum = x[e.u] + x[e.v];
        if (std::abs(sum) <= eps) {
            ip.edge_is_nen[eid] = 1;
            ip.nen[e.u].push_back(e.v);
            ip.nen[e.v].push_back(e.u);
            q[e.u].add(e.w);
            q[e.v].add(e.w);
        } else {
            const double sgn = sign_pos(sum);
            p[e.u].add(e.w * sgn);
            p[e.v].add(e.w * sgn);
        }
    }
    for (int i = 0; i < n; ++i) {
        ip.p[i] = p[i].value();
        ip.q[i] = q[i].value();
    }
    return ip;
}

inline BoundaryData boundary_indicator(const Graph& g, const std::vector<double>& x,
                                       double r, const NBoundsData& nb,
                                       const IPlusParts& ip, double theta) {
    const int n = g.order();
    const double m = norm_inf(x);
    const double eps_m = 1e-12 * std::max(1.0, m);
    BoundaryData bd;
    bd.r = r;
    bd.theta = theta;
    bd.side.resize(n);
    for (int i = 0; i < n; ++i) {
        if (x[i] >= m - eps_m)
            bd.side[i] = 1;
        else if (x[i] <= -m + eps_m)
            bd.side[i] = -1;
        else
            bd.side[i] = 0;
    }

    std::vector<char> in_alpha(n, 0);
    for (int i : nb.s_alpha) in_alpha[i] = 1;
    const bool wide = nb.s_alpha.size() >= 2;

    bd.a.resize(n);
    bd.chi.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        if (!in_alpha[i]) {
            bd.a[i] = g.mu(i) * sign_pos(x[i] - nb.alpha);
        } else if (!wide) {
            bd.a[i] = nb.a_med;
        } else if (bd.side[i] == 1) {
            bd.a[i] = nb.a_lo[i];
        } else if (bd.side[i] == -1) {
            bd.a[i] = nb.a_hi[i];
        } else {
            // Pick the dN endpoint that maximizes |p + r t|; ties go to the
            // upper endpoint so traces replay deterministically.
            const double at_lo = std::abs(ip.p[i] + r * nb.a_lo[i]);
            const double at_hi = std::abs(ip.p[i] + r * nb.a_hi[i]);
            bd.a[i] = (at_lo > at_hi) ? nb.a_lo[i] : nb.a_hi[i];
        }
        if (bd.side[i] != 0)
            bd.chi[i] = -bd.side[i];
        else
            bd.chi[i] = (bd.a[i] == nb.a_hi[i] ? 1 : 0) - (bd.a[i] == nb.a_lo[i] ? 1 : 0);
    }

    bd.b.resize(n);
    bd.b_prime.resize(n);
    for (int i = 0; i < n; ++i) {
        const double core = ip.p[i] + r * bd.a[i];
        if (bd.side[i] == 1)
            bd.b[i] = core - ip.q[i];
        else if (bd.side[i] == -1)
            bd.b[i] = core + ip.q[i];
        else
            bd.b[i] = core + sign_pos(core) * ip.q[i];
        bd.b_prime[i] = (std::abs(bd.b[i]) + (theta - 1.0) * g.degree(i)) /
                        g.total_degree();
    }
    return bd;
}

/// Desired-vertex candidate set V_b (theta = 1) / V_b' (theta < 1). The
/// theta < 1 form reduces to V_b exactly at theta = 1.
inline std::vector<int> candidate_set(const BoundaryData& bd,
                                      const std::vector<double>& x) {
    const int n = static_cast<int>(bd.b.size());
    const double eps_b = 1e-12 * std::max(1.0, norm_inf(bd.b));
    const double eps_bp = 1e-12 * std::max(1.0, norm_inf(bd.b_prime));
    const double eps_x = 1e-12 * std::max(1.0, norm_inf(x));

    std::vector<int> out;
    auto collect_argmax = [&](auto&& qualifies, auto&& magnitude, double tie_eps) {
        double best = -1.0;
        for (int i = 0; i < n; ++i)
            if (qualifies(i)) best = std::max(best, magnitude(i));
        if (best < 0.0) return;
        for (int i = 0; i < n; ++i)
            if (qualifies(i) && magnitude(i) >= best - tie_eps) out.push_back(i);
    };

    collect_argmax([&](int i) { return bd.side[i] == 1 && bd.b[i] < -eps_b; },
                   [&](int i) { return std::abs(bd.b[i]); }, eps_b);
    collect_argmax([&](int i) { return bd.side[i] == -1 && bd.b[i] > eps_b; },
                   [&](int i) { return std::abs(bd.b[i]); }, eps_b);
    collect_argmax([&](int i) { return bd.side[i] == 0 && bd.b_prime[i] > eps_bp; },
                   [&](int i) { return std::abs(bd.b_prime[i]); }, eps_bp);
    collect_argmax(
        [&](int i) {
            if (bd.side[i] != 0 || std::abs(bd.b_prime[i]) > eps_bp) return false;
            return (x[i] > eps_x && bd.b[i] < -eps_b) ||
                   (x[i] < -eps_x && bd.b[i] > eps_b);
        },
        [&](int i) { return std::abs(bd.b[i]); }, eps_b);

    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace detail {

inline std::vector<int> ascending_b_rank(const std::vector<double>& b) {
    const int n = static_cast<int>(b.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        const double ai = std::abs(b[i]), aj = std::abs(b[j]);
        if (ai != aj) return ai < aj;
        return i < j;
    });
    std::vector<int> rank(n);
    for (int pos = 0; pos < n; ++pos) rank[order[pos]] = pos;
    return rank;
}

inline std::vector<double> assemble_v(const Graph& g, const NBoundsData& nb,
                                      const BoundaryData& bd,
                                      const std::vector<int>& rank, int istar) {
    const int n = g.order();
    std::vector<double> v = bd.a;
    if (nb.s_alpha.size() < 2) return v;
    std::vector<char> in_alpha(n, 0);
    for (int i : nb.s_alpha) in_alpha[i] = 1;
    int jstar = -1;
    if (istar >= 0 && in_alpha[istar]) {
        jstar = istar;
    } else {
        for (int t : nb.s_alpha)
            if (jstar < 0 || rank[t] > rank[jstar]) jstar = t;
    }
    const double coef = (nb.a_med - bd.a[jstar]) / (nb.b_med - g.mu(jstar));
    for (int i : nb.s_alpha)
        if (i != jstar) v[i] = coef * g.mu(i);
    return v;
}

}  // namespace detail

/// Three-step boundary-detected construction of s = (u + r v)/e. When the
/// candidate set is empty the bundle is still a valid subgradient; the solver
/// uses that case as its equality exit.
inline SubgradientBundle select_subgradient(const Graph& g, const std::vector<double>& x,
                                            double r, double /*theta: carried by bd*/,
                                            const BoundaryData& bd, const NBoundsData& nb,
                                            const IPlusParts& ip, RandomStream& rng) {
    const int n = g.order();
    SubgradientBundle out;
    out.sigma_rank = detail::ascending_b_rank(bd.b);

    const std::vector<int> candidates = candidate_set(bd, x);
    out.candidates_empty = candidates.empty();
    if (!candidates.empty())
        out.istar = candidates[rng.uniform_index(candidates.size())];

    // chi of the selected vertex must put s_istar on the b boundary; on S< the
    // delta-based chi can vanish, so fall back to the sign b itself carries.
    int chi_star = 0;
    if (out.istar >= 0) {
        chi_star = bd.chi[out.istar];
        if (chi_star == 0)
            chi_star = static_cast<int>(sign_pos(ip.p[out.istar] + r * bd.a[out.istar]));
    }

    out.edge_coeff.resize(g.edge_count());
    for (std::size_t eid = 0; eid < g.edge_count(); ++eid) {
        const auto& e = g.edges()[eid];
        if (!ip.edge_is_nen[eid]) {
            out.edge_coeff[eid] = sign_pos(x[e.u] + x[e.v]);
        } else if (out.istar >= 0 && (e.u == out.istar || e.v == out.istar)) {
            out.edge_coeff[eid] = chi_star;
        } else {
            const int t = out.sigma_rank[e.u] > out.sigma_rank[e.v] ? e.u : e.v;
            out.edge_coeff[eid] = bd.chi[t];
        }
    }

    std::vector<KahanSum> u(n);
    for (std::size_t eid = 0; eid < g.edge_count(); ++eid) {
        const auto& e = g.edges()[eid];
        u[e.u].add(e.w * out.edge_coeff[eid]);
        u[e.v].add(e.w * out.edge_coeff[eid]);
    }
    out.u.resize(n);
    for (int i = 0; i < n; ++i) out.u[i] = u[i].value();

    out.v = detail::assemble_v(g, nb, bd, out.sigma_rank, out.istar);

    out.s.resize(n);
    for (int i = 0; i < n; ++i) out.s[i] = (out.u[i] + r * out.v[i]) / g.total_degree();
    return out;
}

/// Naive random selection baseline: independent draws inside the dN boxes and
/// symmetric uniform coefficients on zero-sum edges. Diagnostic only; its
/// outputs are usually not discrete local minima.
inline SubgradientBundle random_subgradient(const Graph& g, const std::vector<double>& x,
                                            double r, const NBoundsData& nb,
                                            const IPlusParts& ip, RandomStream& rng) {
    const int n = g.order();
    SubgradientBundle out;
    out.edge_coeff.resize(g.edge_count());
    for (std::size_t eid = 0; eid < g.edge_count(); ++eid) {
        const auto& e = g.edges()[eid];
        out.edge_coeff[eid] = ip.edge_is_nen[eid] ? rng.uniform(-1.0, 1.0)
                                                  : sign_pos(x[e.u] + x[e.v]);
    }
    std::vector<KahanSum> u(n);
    for (std::size_t eid = 0; eid < g.edge_count(); ++eid) {
        const auto& e = g.edges()[eid];
        u[e.u].add(e.w * out.edge_coeff[eid]);
        u[e.v].add(e.w * out.edge_coeff[eid]);
    }
    out.u.resize(n);
    out.v.resize(n);
    for (int i = 0; i < n; ++i) {
        out.u[i] = u[i].value();
        out.v[i] = rng.uniform(nb.a_lo[i], nb.a_hi[i]);
    }
    out.s.resize(n);
    for (int i = 0; i < n; ++i) out.s[i] = (out.u[i] + r * out.v[i]) / g.total_degree();
    return out;
}

/// All intermediates of one subgradient construction, for tests and tracing.
struct SubgradientPipeline {
    MedianResult med;
    NBoundsData nb;
    IPlusParts ip;
    BoundaryData bd;
    SubgradientBundle bundle;
};

inline SubgradientPipeline make_subgradient(const Graph& g, const std::vector<double>& x,
                                            double r, double theta, SubgradientMode mode,
                                            RandomStream& rng) {
    SubgradientPipeline pipe;
    pipe.med = weighted_median(g.mu(), x);
    const double alpha = choose_alpha(pipe.med, x, g.mu());
    pipe.nb = partial_n_bounds(g, x, alpha);
    pipe.ip = partial_iplus_parts(g, x);
    pipe.bd = boundary_indicator(g, x, r, pipe.nb, pipe.ip, theta);
    pipe.bundle = (mode == SubgradientMode::Boundary)
                      ? select_subgradient(g, x, r, theta, pipe.bd, pipe.nb, pipe.ip, rng)
                      : random_subgradient(g, x, r, pipe.nb, pipe.ip, rng);
    return pipe;
}

}  // namespace balcut
