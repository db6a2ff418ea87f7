#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "balcut/common.hpp"
#include "balcut/graph.hpp"

namespace balcut {

/// Inner subproblem data: minimize theta ||x||_inf - <|x|, l> over the l1 ball,
/// where l = ((theta-1)/e) d + |s| and solutions are supported on
/// omega = {i : l_i >= 0}.
struct InnerInput {
    std::vector<double> l;
    std::vector<double> s;
    double theta;
    std::vector<int> omega;
    double eps_zero;  // component-level zero tolerance on l
    double eps_eq;    // equality-case detection tolerance on sum(l) vs theta
};

enum class InnerCase { StrictDescent, Equality };

struct InnerResult {
    std::vector<double> x;  // ||x||_1 = 1, ternary after sup-norm scaling
    double value;           // optimal objective, <= 0 at valid iterates
    InnerCase kase;
    int m0;
    int m1;
};

inline InnerInput build_l(const Graph& g, const std::vector<double>& s, double theta) {
    InnerInput in;
    in.s = s;
    in.theta = theta;
    in.l.resize(s.size());
    const double coef = (theta - 1.0) / g.total_degree();
    for (std::size_t i = 0; i < s.size(); ++i)
        in.l[i] = coef * g.degree(i) + std::abs(s[i]);
    in.eps_zero = 1e-12 * norm_inf(in.l);
    in.eps_eq = 1e-10 * std::max(1.0, theta);
    for (std::size_t i = 0; i < in.l.size(); ++i)
        if (in.l[i] >= -in.eps_zero) in.omega.push_back(static_cast<int>(i));
    return in;
}

namespace detail {

inline int sign_class(double v, double eps) {
    if (v > eps) return 1;
    if (v < -eps) return -1;
    return 0;
}

// Endpoints of the allowed interval for a free component, by the sign of s_i.
inline std::pair<double, double> free_interval(int s_class) {
    if (s_class > 0) return {0.0, 1.0};
    if (s_class < 0) return {-1.0, 0.0};
    return {-1.0, 1.0};
}

}  // namespace detail

/// Equality case (sum_omega l = theta): pick x with x_i = sign(s_i) on
/// {l_i > 0} and endpoint draws on {l_i = 0}, forcing one distinct pair so the
/// result is nonconstant, then rescale to ||x||_1 = 1.
inline std::vector<double> nonconstant_completion(const InnerInput& in, RandomStream& rng) {
    const std::size_t n = in.l.size();
    std::vector<int> gamma1, gamma0;
    for (int i : in.omega) {
        if (in.l[i] > in.eps_zero)
            gamma1.push_back(i);
        else
            gamma0.push_back(i);
    }
    if (gamma1.size() + gamma0.size() < 2)
        throw contract_error("equality-case completion needs at least two active vertices");

    std::vector<double> x(n, 0.0);
    auto s_class = [&](int i) { return detail::sign_class(in.s[i], in.eps_zero); };
    for (int i : gamma1) x[i] = sign_pos(in.s[i]);

    if (!gamma1.empty()) {
        if (!gamma0.empty()) {
            // Case 1: force x_i != x_j for a random j in Gamma1, i in Gamma0.
            const int j = gamma1[rng.uniform_index(gamma1.size())];
            const int i = gamma0[rng.uniform_index(gamma0.size())];
            const int sc = s_class(i);
            if (x[j] > 0)
                x[i] = (sc == 0) ? -1.0 : (sc > 0 ? 0.0 : rng.pick(-1.0, 0.0));
            else
                x[i] = (sc == 0) ? 1.0 : (sc > 0 ? rng.pick(0.0, 1.0) : 0.0);
            for (int t : gamma0) {
                if (t == i) continue;
                auto [a, b] = detail::free_interval(s_class(t));
                x[t] = rng.pick(a, b);
            }
        }
    } else {
        // Case 2: all active components free; force the first two to differ.
        const int i = gamma0[rng.uniform_index(gamma0.size())];
        auto [ai, bi] = detail::free_interval(s_class(i));
        x[i] = rng.pick(ai, bi);
        std::vector<int> rest;
        for (int t : gamma0)
            if (t != i) rest.push_back(t);
        const int j = rest[rng.uniform_index(rest.size())];
        const int sj = s_class(j);
        if (x[i] == 1.0)
            x[j] = (sj == 0) ? -1.0 : (sj > 0 ? 0.0 : rng.pick(-1.0, 0.0));
        else if (x[i] == -1.0)
            x[j] = (sj == 0) ? 1.0 : (sj > 0 ? rng.pick(0.0, 1.0) : 0.0);
        else
            x[j] = (sj == 0) ? rng.pick(-1.0, 1.0) : (sj > 0 ? 1.0 : -1.0);
        for (int t : gamma0) {
            if (t == i || t == j) continue;
            auto [a, b] = detail::free_interval(s_class(t));
            x[t] = rng.pick(a, b);
        }
    }

    if (!is_nonconstant(x))
        throw contract_error("equality-case completion could not enforce nonconstancy");
    const double scale = norm_one(x);
    for (double& v : x) v /= scale;
    return x;
}

/// Sorted-threshold closed form. Requires sum_{i in omega} l_i >= theta (up to
/// eps_eq), which holds for subgradients constructed at valid iterates.
inline InnerResult solve_inner(const InnerInput& in, RandomStream& rng) {
    const std::size_t n = in.l.size();
    KahanSum active;
    for (int i : in.omega) active.add(std::max(in.l[i], 0.0));
    const double lsum = active.value();

    if (lsum < in.theta - in.eps_eq)
        throw contract_error("inner solver: sum of l over omega below theta");

    InnerResult res;
    if (lsum <= in.theta + in.eps_eq) {
        res.x = nonconstant_completion(in, rng);
        res.kase = InnerCase::Equality;
        res.m0 = res.m1 = static_cast<int>(in.omega.size());
    } else {
        // Descending sort of l restricted to omega, ties by vertex index.
        std::vector<int> order = in.omega;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (in.l[a] != in.l[b]) return in.l[a] > in.l[b];
            return a < b;
        });
        const int k = static_cast<int>(order.size());
        std::vector<double> prefix(k + 1, 0.0);
        KahanSum p;
        for (int r = 1; r <= k; ++r) {
            p.add(std::max(in.l[order[r - 1]], 0.0));
            prefix[r] = p.value();
        }
        auto a_of = [&](int r) {  // A_r with the auxiliary l_{k+1} = 0
            const double next = (r < k) ? std::max(in.l[order[r]], 0.0) : 0.0;
            return prefix[r] - r * next;
        };
        int m0 = k;
        for (int r = 1; r <= k; ++r)
            if (a_of(r) > in.theta) {
                m0 = r;
                break;
            }
        int m1 = 1;
        for (int r = k; r >= 1; --r)
            if (a_of(r - 1) < in.theta) {
                m1 = r;
                break;
            }

        std::vector<double> z(k, 0.0);
        int ones = 0;
        for (int r = 1; r <= k; ++r) {
            if (r <= m1)
                z[r - 1] = 1.0;  // takes precedence at the m0 == m1 overlap rank
            else if (r < m0)
                z[r - 1] = rng.coin() ? 1.0 : 0.0;
            else
                z[r - 1] = 0.0;
            if (z[r - 1] != 0.0) ++ones;
        }
        res.x.assign(n, 0.0);
        for (int r = 1; r <= k; ++r) {
            const int i = order[r - 1];
            res.x[i] = sign_pos(in.s[i]) * z[r - 1] / ones;
        }
        res.kase = InnerCase::StrictDescent;
        res.m0 = m0;
        res.m1 = m1;
    }

    KahanSum dot;
    for (std::size_t i = 0; i < n; ++i) dot.add(std::abs(res.x[i]) * in.l[i]);
    res.value = in.theta * norm_inf(res.x) - dot.value();
    return res;
}

}  // namespace balcut
