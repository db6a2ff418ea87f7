#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "balcut/common.hpp"
#include "balcut/graph.hpp"

namespace balcut {

/// I(x) = sum_{{i,j} in E} w_ij |x_i - x_j|.
inline double i_total(const Graph& g, const std::vector<double>& x) {
    KahanSum s;
    for (const auto& e : g.edges()) s.add(e.w * std::abs(x[e.u] - x[e.v]));
    return s.value();
}

/// I+(x) = sum_{{i,j} in E} w_ij |x_i + x_j|.
inline double i_plus(const Graph& g, const std::vector<double>& x) {
    KahanSum s;
    for (const auto& e : g.edges()) s.add(e.w * std::abs(x[e.u] + x[e.v]));
    return s.value();
}

/// Degree-weighted 1-norm ||x||_{1,d}.
inline double norm_1d(const Graph& g, const std::vector<double>& x) {
    KahanSum s;
    for (int i = 0; i < g.order(); ++i) s.add(g.degree(i) * std::abs(x[i]));
    return s.value();
}

/// The full minimizing interval of c -> sum mu_i |x_i - c| and the minimum.
/// Both endpoints coincide with data values of x.
struct MedianResult {
    double c_lo;
    double c_hi;
    double value;  // N(x)
};

inline MedianResult weighted_median(const std::vector<double>& mu,
                                    const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    KahanSum total;
    for (double m : mu) total.add(m);
    const double half = total.value() / 2.0;
    const double tol = 1e-12 * std::max(1.0, total.value());

    // Collapse to distinct values with accumulated masses.
    std::vector<double> vals;
    std::vector<double> mass;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = x[order[k]];
        if (!vals.empty() && v == vals.back())
            mass.back() += mu[order[k]];
        else {
            vals.push_back(v);
            mass.push_back(mu[order[k]]);
        }
    }

    // v_j minimizes iff mass below <= half and mass above <= half.
    double below = 0.0;
    double c_lo = vals[0], c_hi = vals[0];
    bool found = false;
    for (std::size_t j = 0; j < vals.size(); ++j) {
        const double above = total.value() - below - mass[j];
        if (below <= half + tol && above <= half + tol) {
            if (!found) {
                c_lo = vals[j];
                found = true;
            }
            c_hi = vals[j];
        }
        below += mass[j];
    }
    KahanSum dev;
    for (std::size_t i = 0; i < n; ++i) dev.add(mu[i] * std::abs(x[i] - c_lo));
    return {c_lo, c_hi, dev.value()};
}

/// N(x) = min_c sum mu_i |x_i - c|.
inline double n_value(const Graph& g, const std::vector<double>& x) {
    return weighted_median(g.mu(), x).value;
}

/// B(x) = (e ||x||_inf - I+(x)) / N(x); zero-homogeneous, defined on
/// nonconstant vectors only.
inline double objective_B(const Graph& g, const std::vector<double>& x) {
    if (!is_nonconstant(x)) throw std::invalid_argument("B(x): constant vector");
    return (g.total_degree() * norm_inf(x) - i_plus(g, x)) / n_value(g, x);
}

/// T(x) = (theta e ||x||_inf + (1-theta) ||x||_{1,d} - I+(x)) / N(x).
/// Reduces to B at theta = 1.
inline double objective_T(const Graph& g, const std::vector<double>& x, double theta) {
    if (!is_nonconstant(x)) throw std::invalid_argument("T(x): constant vector");
    const double num = theta * g.total_degree() * norm_inf(x) +
                       (1.0 - theta) * norm_1d(g, x) - i_plus(g, x);
    return num / n_value(g, x);
}

/// H_r(x) = (I+(x) + r N(x)) / e, the convex function driving the iteration.
inline double h_r(const Graph& g, const std::vector<double>& x, double r) {
    return (i_plus(g, x) + r * n_value(g, x)) / g.total_degree();
}

/// L_theta(x, s) = theta ||x||_inf + ((1-theta)/e) ||x||_{1,d} - <x, s>.
inline double l_theta(const Graph& g, const std::vector<double>& x,
                      const std::vector<double>& s, double theta) {
    KahanSum dot;
    for (std::size_t i = 0; i < x.size(); ++i) dot.add(x[i] * s[i]);
    return theta * norm_inf(x) + (1.0 - theta) / g.total_degree() * norm_1d(g, x) -
           dot.value();
}

/// Set-pair Lovasz extension f^L(x) = int_0^{||x||_inf} f(V_t^+, V_t^-) dt,
/// evaluated by exact breakpoint summation (the integrand is piecewise
/// constant between consecutive |x_i| thresholds).
template <class SetPairFn>
double lovasz_eval(SetPairFn&& f, const std::vector<double>& x) {
    std::vector<double> thr;
    for (double v : x)
        if (std::abs(v) > 0.0) thr.push_back(std::abs(v));
    if (thr.empty()) return 0.0;
    std::sort(thr.begin(), thr.end());
    thr.erase(std::unique(thr.begin(), thr.end()), thr.end());

    KahanSum integral;
    double prev = 0.0;
    for (double t : thr) {
        // On (prev, t): V^+ = {i : x_i >= t}, V^- = {i : -x_i >= t}.
        std::vector<int> vp, vn;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] >= t) vp.push_back(static_cast<int>(i));
            if (-x[i] >= t) vn.push_back(static_cast<int>(i));
        }
        integral.add((t - prev) * f(vp, vn));
        prev = t;
    }
    return integral.value();
}

}  // namespace balcut
