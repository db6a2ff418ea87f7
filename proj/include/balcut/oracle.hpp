#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "balcut/common.hpp"
#include "balcut/graph.hpp"

namespace balcut {

struct BinaryOracleResult {
    double value;
    BinaryCut witness;
    std::uint64_t enumerated;
};

struct TernaryOracleResult {
    double value;
    TernaryPartition witness;
    std::uint64_t enumerated;
};

namespace detail {

inline std::vector<int> mask_to_set(std::uint32_t mask, int n) {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) out.push_back(i);
    return out;
}

}  // namespace detail

/// Exact h(G) by Gray-code enumeration of the 2^{n-1}-1 distinct binary cuts
/// (the last vertex stays outside S, which covers every cut up to
/// complementation). Cut weight and volume are updated incrementally and
/// periodically recomputed so long enumerations cannot drift.
inline BinaryOracleResult brute_force_h(const Graph& g) {
    const int n = g.order();
    if (n > 24)
        throw size_guard_error("brute_force_h: 2^(n-1) enumeration limited to n <= 24");
    if (n < 2) throw std::invalid_argument("need at least two vertices");

    const int bits = n - 1;
    std::vector<char> in_s(n, 0);
    double cut = 0.0, vol = 0.0;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_mask = 0;

    auto exact_eval = [&](std::uint32_t mask) {
        std::vector<char> mark(n, 0);
        for (int i = 0; i < bits; ++i)
            if (mask & (1u << i)) mark[i] = 1;
        KahanSum c, v;
        for (const auto& e : g.edges())
            if (mark[e.u] != mark[e.v]) c.add(e.w);
        for (int i = 0; i < n; ++i)
            if (mark[i]) v.add(g.mu(i));
        return c.value() / std::min(v.value(), g.mu_total() - v.value());
    };

    const std::uint64_t total = (1ull << bits) - 1;
    for (std::uint64_t k = 1; k <= total; ++k) {
        const int i = std::countr_zero(k);
        const bool entering = !in_s[i];
        double delta = 0.0;
        for (const auto& nb : g.neighbors(i))
            delta += in_s[nb.vertex] ? -nb.weight : nb.weight;
        cut += entering ? delta : -delta;
        vol += entering ? g.mu(i) : -g.mu(i);
        in_s[i] = entering ? 1 : 0;

        if ((k & 0xFFFF) == 0) {  // resync against fp drift
            KahanSum c, v;
            for (const auto& e : g.edges())
                if (in_s[e.u] != in_s[e.v]) c.add(e.w);
            for (int t = 0; t < n; ++t)
                if (in_s[t]) v.add(g.mu(t));
            cut = c.value();
            vol = v.value();
        }

        const double value = cut / std::min(vol, g.mu_total() - vol);
        if (value <= best + 1e-12 * std::max(1.0, std::abs(best))) {
            const std::uint32_t mask = static_cast<std::uint32_t>(k ^ (k >> 1));
            const double exact = exact_eval(mask);
            if (exact < best) {
                best = exact;
                best_mask = mask;
            } else if (exact == best) {
                // Lexicographically smallest witness for reproducibility.
                auto cand = detail::mask_to_set(mask, n);
                auto cur = detail::mask_to_set(best_mask, n);
                if (cand < cur) best_mask = mask;
            }
        }
    }

    BinaryOracleResult res;
    res.value = best;
    res.witness = BinaryCut{detail::mask_to_set(best_mask, n)};
    res.enumerated = total;
    return res;
}

namespace detail {

/// Loopless reflected mixed-radix Gray enumeration over ternary labels
/// (0 = un-partitioned, 1 = V1, 2 = V2); visit(v, old_label, new_label) is
/// called once per single-label change.
template <class Visit>
void ternary_gray_walk(int n, Visit&& visit) {
    std::vector<int> a(n, 0), o(n, 1), f(n + 1);
    for (int j = 0; j <= n; ++j) f[j] = j;
    for (;;) {
        const int j = f[0];
        f[0] = 0;
        if (j == n) break;
        const int old = a[j];
        a[j] += o[j];
        if (a[j] == 0 || a[j] == 2) {
            o[j] = -o[j];
            f[j] = f[j + 1];
            f[j + 1] = j + 1;
        }
        visit(j, old, a[j]);
    }
}

struct TernaryState {
    std::vector<int> label;
    double vol1 = 0.0, vol2 = 0.0, unpart_deg = 0.0, cut12 = 0.0;
    int count1 = 0, count2 = 0;

    explicit TernaryState(const Graph& g) : label(g.order(), 0) {
        KahanSum d;
        for (int i = 0; i < g.order(); ++i) d.add(g.degree(i));
        unpart_deg = d.value();
    }

    void apply(const Graph& g, int v, int from, int to) {
        if (from == 1) {
            vol1 -= g.mu(v);
            --count1;
        } else if (from == 2) {
            vol2 -= g.mu(v);
            --count2;
        } else {
            unpart_deg -= g.degree(v);
        }
        if (to == 1) {
            vol1 += g.mu(v);
            ++count1;
        } else if (to == 2) {
            vol2 += g.mu(v);
            ++count2;
        } else {
            unpart_deg += g.degree(v);
        }
        for (const auto& nb : g.neighbors(v)) {
            const int lj = nb.vertex == v ? to : label[nb.vertex];
            const bool was = (from == 1 && lj == 2) || (from == 2 && lj == 1);
            const bool now = (to == 1 && lj == 2) || (to == 2 && lj == 1);
            if (was != now) cut12 += now ? nb.weight : -nb.weight;
        }
        label[v] = to;
    }

    bool valid(int n) const {
        return count1 + count2 >= 1 && count1 < n && count2 < n;
    }

    double objective(const Graph& g, double theta) const {
        const double denom = std::min(vol1, g.mu_total() - vol1) +
                             std::min(vol2, g.mu_total() - vol2);
        return (theta * unpart_deg + 2.0 * cut12) / denom;
    }

    TernaryPartition partition(int n) const {
        TernaryPartition p;
        for (int i = 0; i < n; ++i) {
            if (label[i] == 1) p.v1.push_back(i);
            if (label[i] == 2) p.v2.push_back(i);
        }
        return p;
    }
};

}  // namespace detail

/// Exact h_theta(G) over all valid ternary partitions (3^n walk, n <= 14).
inline TernaryOracleResult brute_force_h_theta(const Graph& g, double theta) {
    const int n = g.order();
    if (n > 14)
        throw size_guard_error("brute_force_h_theta: 3^n enumeration limited to n <= 14");

    detail::TernaryState st(g);
    double best = std::numeric_limits<double>::infinity();
    TernaryPartition witness;
    std::uint64_t enumerated = 0;
    std::uint64_t step = 0;

    detail::ternary_gray_walk(n, [&](int v, int from, int to) {
        st.apply(g, v, from, to);
        if (++step % 300000 == 0) {  // periodic exact resync
            detail::TernaryState fresh(g);
            for (int i = 0; i < n; ++i)
                if (st.label[i] != 0) fresh.apply(g, i, 0, st.label[i]);
            st.vol1 = fresh.vol1;
            st.vol2 = fresh.vol2;
            st.unpart_deg = fresh.unpart_deg;
            st.cut12 = fresh.cut12;
        }
        if (!st.valid(n)) return;
        ++enumerated;
        const double value = st.objective(g, theta);
        if (value < best) {
            best = value;
            witness = st.partition(n);
        } else if (value == best) {
            auto cand = st.partition(n);
            if (std::pair(cand.v1, cand.v2) < std::pair(witness.v1, witness.v2))
                witness = cand;
        }
    });

    TernaryOracleResult res;
    res.value = best;
    res.witness = std::move(witness);
    res.enumerated = enumerated;
    return res;
}

/// Pointwise-exact theta curve on a grid, from a single enumeration pass.
inline std::vector<std::pair<double, double>> theta_curve(const Graph& g,
                                                          const std::vector<double>& grid) {
    const int n = g.order();
    if (n > 14)
        throw size_guard_error("theta_curve: 3^n enumeration limited to n <= 14");
    detail::TernaryState st(g);
    std::vector<double> best(grid.size(), std::numeric_limits<double>::infinity());
    std::uint64_t step = 0;
    detail::ternary_gray_walk(n, [&](int v, int from, int to) {
        st.apply(g, v, from, to);
        if (++step % 300000 == 0) {
            detail::TernaryState fresh(g);
            for (int i = 0; i < n; ++i)
                if (st.label[i] != 0) fresh.apply(g, i, 0, st.label[i]);
            st.vol1 = fresh.vol1;
            st.vol2 = fresh.vol2;
            st.unpart_deg = fresh.unpart_deg;
            st.cut12 = fresh.cut12;
        }
        if (!st.valid(n)) return;
        const double denom = std::min(st.vol1, g.mu_total() - st.vol1) +
                             std::min(st.vol2, g.mu_total() - st.vol2);
        const double base = 2.0 * st.cut12 / denom;
        const double slope = st.unpart_deg / denom;
        for (std::size_t k = 0; k < grid.size(); ++k)
            best[k] = std::min(best[k], base + grid[k] * slope);
    });
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out.emplace_back(grid[k], best[k]);
    return out;
}

/// Exact minimum of the inner subproblem by subset-support enumeration in
/// extended precision: every support carries equal magnitudes at optimum, so
/// min_S (theta - sum_S l_i) / |S| over nonempty S (0 joins as the
/// equality-case value).
inline double brute_force_inner(const std::vector<double>& l, double theta) {
    std::vector<double> active;
    for (double v : l)
        if (v >= 0.0) active.push_back(v);
    const int k = static_cast<int>(active.size());
    if (k > 16)
        throw size_guard_error("brute_force_inner: subset enumeration limited to n <= 16");
    long double best = 0.0L;
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        long double sum = 0.0L;
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i)) sum += static_cast<long double>(active[i]);
        const long double val =
            (static_cast<long double>(theta) - sum) / std::popcount(mask);
        best = std::min(best, val);
    }
    return static_cast<double>(best);
}

}  // namespace balcut
