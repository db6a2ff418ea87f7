#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace balcut {

/// Raised when an input file does not follow the expected grammar.
class parse_error : public std::runtime_error {
public:
    parse_error(std::string message, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + std::move(message)),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Raised when an internal contract is violated (e.g. an invalid subgradient
/// handed to the inner solver).
class contract_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the exact enumeration oracles when the instance exceeds the size guard.
class size_guard_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// sign with the sign(0) = +1 convention used throughout.
inline double sign_pos(double t) { return t >= 0.0 ? 1.0 : -1.0; }

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seeded random stream. One stream per solver run; mt19937_64 keeps draws
/// identical across platforms, which the reproducible benchmarks rely on.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform index in [0, n), rejection-sampled to avoid modulo bias.
    std::size_t uniform_index(std::size_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % n);
    }

    bool coin() { return (gen_() & 1ull) != 0; }

    /// The paper's X_{a,b}: a or b with equal probability.
    double pick(double a, double b) { return coin() ? b : a; }

    /// Independent stream for run k of the same base seed.
    static RandomStream for_run(std::uint64_t base_seed, std::uint64_t run) {
        return RandomStream(splitmix64(base_seed + 0x9E3779B97F4A7C15ull * (run + 1)));
    }

private:
    std::mt19937_64 gen_;
};

/// Compensated (Kahan) accumulator; objective differences near termination sit
/// around 1e-12, so reductions over G-set-sized data must not drift.
class KahanSum {
public:
    void add(double v) {
        double y = v - c_;
        double t = sum_ + y;
        c_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

inline double norm_inf(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline double norm_one(const std::vector<double>& x) {
    KahanSum s;
    for (double v : x) s.add(std::abs(v));
    return s.value();
}

inline bool is_nonconstant(const std::vector<double>& x) {
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] != x[0]) return true;
    return false;
}

/// True when x / ||x||_inf has only entries in {-1, 0, 1} (up to fp noise).
inline bool is_ternary_scaled(const std::vector<double>& x) {
    const double m = norm_inf(x);
    if (m == 0.0) return false;
    const double tol = 1e-12 * m;
    for (double v : x) {
        const double a = std::abs(v);
        if (a > tol && std::abs(a - m) > tol) return false;
    }
    return true;
}

}  // namespace balcut
