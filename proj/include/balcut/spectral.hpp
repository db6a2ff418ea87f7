#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "balcut/common.hpp"
#include "balcut/graph.hpp"

namespace balcut {

enum class SpectralVariant { Symmetric, RandomWalk };

struct EigInitOptions {
    double tol = 1e-8;
    int max_matvecs = 5000;
    SpectralVariant variant = SpectralVariant::Symmetric;
};

struct EigInitResult {
    std::vector<double> vector;  // normalized to ||v||_1 = 1
    double eigenvalue_estimate = 0.0;
    double residual = 0.0;  // ||L v - lambda v||_2 / ||v||_2
    int iterations = 0;     // operator applications
    bool converged = false;
    bool connected = true;  // when false the Fiedler interpretation is void
};

/// y -> (I - D^{-1/2} W D^{-1/2}) y in O(m). Rejects isolated vertices.
inline std::vector<double> laplacian_apply(const Graph& g, const std::vector<double>& y) {
    const int n = g.order();
    for (int i = 0; i < n; ++i)
        if (!(g.degree(i) > 0.0))
            throw std::invalid_argument(
                "normalized Laplacian undefined on isolated vertices; use unit "
                "weights or split components");
    std::vector<double> t(n), out(n);
    for (int i = 0; i < n; ++i) t[i] = y[i] / std::sqrt(g.degree(i));
    for (int i = 0; i < n; ++i) {
        KahanSum acc;
        for (const auto& nb : g.neighbors(i)) acc.add(nb.weight * t[nb.vertex]);
        out[i] = y[i] - acc.value() / std::sqrt(g.degree(i));
    }
    return out;
}

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    KahanSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline void axpy(std::vector<double>& y, double c, const std::vector<double>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

}  // namespace detail

/// Second smallest eigenpair of the normalized Laplacian via Lanczos with the
/// known kernel direction D^{1/2} 1 deflated and full re-orthogonalization.
/// Restarts from the current Ritz vector when the basis fills up.
inline EigInitResult second_eigenvector(const Graph& g, const EigInitOptions& opts,
                                        RandomStream& rng) {
    const int n = g.order();
    EigInitResult res;
    res.connected = g.connected();
    if (n < 2) throw std::invalid_argument("need at least two vertices");

    std::vector<double> kernel(n);
    for (int i = 0; i < n; ++i) kernel[i] = std::sqrt(g.degree(i));
    const double knorm = detail::norm2(kernel);
    for (double& v : kernel) v /= knorm;

    auto deflate = [&](std::vector<double>& v) {
        detail::axpy(v, -detail::dot(kernel, v), kernel);
    };

    std::vector<double> start(n);
    for (int i = 0; i < n; ++i) start[i] = rng.uniform(-1.0, 1.0);

    const int basis_cap = std::min(n - 1, 120);
    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    std::vector<double> ritz;  // current best Ritz vector
    int matvecs = 0;

    auto solve_tridiag = [&](std::vector<double>& coeffs) {
        const int k = static_cast<int>(alpha.size());
        Eigen::VectorXd diag(k), sub(std::max(k - 1, 0));
        for (int i = 0; i < k; ++i) diag[i] = alpha[i];
        for (int i = 0; i + 1 < k; ++i) sub[i] = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub);
        coeffs.assign(k, 0.0);
        for (int i = 0; i < k; ++i) coeffs[i] = es.eigenvectors()(i, 0);
        return es.eigenvalues()(0);
    };

    auto form_ritz = [&](const std::vector<double>& coeffs) {
        std::vector<double> v(n, 0.0);
        for (std::size_t j = 0; j < basis.size(); ++j)
            detail::axpy(v, coeffs[j], basis[j]);
        return v;
    };

    std::vector<double> q = start;
    while (matvecs < opts.max_matvecs) {
        deflate(q);
        for (const auto& b : basis) detail::axpy(q, -detail::dot(b, q), b);
        double qn = detail::norm2(q);
        if (qn < 1e-300) {
            // Degenerate start or invariant subspace: draw a fresh direction.
            for (int i = 0; i < n; ++i) q[i] = rng.uniform(-1.0, 1.0);
            continue;
        }
        for (double& v : q) v /= qn;
        basis.push_back(q);

        std::vector<double> w = laplacian_apply(g, q);
        ++matvecs;
        deflate(w);
        const double a = detail::dot(q, w);
        alpha.push_back(a);
        detail::axpy(w, -a, basis.back());
        if (basis.size() >= 2) detail::axpy(w, -beta.back(), basis[basis.size() - 2]);
        for (const auto& b : basis) detail::axpy(w, -detail::dot(b, w), b);
        const double bnorm = detail::norm2(w);

        std::vector<double> coeffs;
        solve_tridiag(coeffs);
        const double est = bnorm * std::abs(coeffs.back());
        if (est <= 0.5 * opts.tol || bnorm < 1e-13 ||
            static_cast<int>(basis.size()) >= basis_cap || matvecs >= opts.max_matvecs) {
            ritz = form_ritz(coeffs);
            deflate(ritz);
            std::vector<double> lv = laplacian_apply(g, ritz);
            ++matvecs;
            const double rnorm = detail::norm2(ritz);
            const double rq = detail::dot(ritz, lv) / (rnorm * rnorm);
            std::vector<double> resid = lv;
            detail::axpy(resid, -rq, ritz);
            res.residual = detail::norm2(resid) / rnorm;
            res.eigenvalue_estimate = rq;
            if (res.residual <= opts.tol) {
                res.converged = true;
                break;
            }
            if (bnorm < 1e-13 && static_cast<int>(basis.size()) < basis_cap) {
                // Invariant subspace hit before convergence (exact arithmetic
                // luck); restart from the Ritz vector.
            }
            basis.clear();
            alpha.clear();
            beta.clear();
            q = ritz;
            continue;
        }
        beta.push_back(bnorm);
        q = w;
        for (double& v : q) v /= bnorm;
    }

    if (ritz.empty()) {
        std::vector<double> coeffs;
        if (!alpha.empty()) {
            solve_tridiag(coeffs);
            ritz = form_ritz(coeffs);
        } else {
            ritz = start;
        }
    }
    res.iterations = matvecs;

    std::vector<double> v = ritz;
    if (opts.variant == SpectralVariant::RandomWalk)
        for (int i = 0; i < n; ++i) v[i] /= std::sqrt(g.degree(i));
    const double scale = norm_one(v);
    if (scale > 0.0)
        for (double& t : v) t /= scale;
    res.vector = std::move(v);
    return res;
}

}  // namespace balcut
