#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "balcut/common.hpp"

namespace balcut {

enum class MuScheme { Degree, Unit, Custom };

struct WeightedEdge {
    int u;  // u < v, 0-based
    int v;
    double w;
};

struct Neighbor {
    int vertex;
    double weight;
};

/// Immutable weighted undirected graph with a vertex-weight scheme.
/// Safe to share across concurrent solver runs once constructed.
class Graph {
public:
    Graph(int n, std::vector<WeightedEdge> edges, MuScheme scheme,
          std::vector<double> custom_mu = {})
        : n_(n), edges_(std::move(edges)), scheme_(scheme) {
        if (n_ <= 0) throw std::invalid_argument("graph needs at least one vertex");
        for (auto& e : edges_) {
            if (e.u == e.v) throw std::invalid_argument("self-loop");
            if (e.u > e.v) std::swap(e.u, e.v);
            if (e.u < 0 || e.v >= n_) throw std::invalid_argument("vertex index out of range");
            if (!(e.w > 0.0) || !std::isfinite(e.w))
                throw std::invalid_argument("edge weight must be strictly positive");
        }
        std::sort(edges_.begin(), edges_.end(), [](const auto& a, const auto& b) {
            return std::pair(a.u, a.v) < std::pair(b.u, b.v);
        });
        for (std::size_t i = 1; i < edges_.size(); ++i)
            if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
                throw std::invalid_argument("duplicate edge");
        build_adjacency();
        KahanSum e;
        for (double d : degree_) e.add(d);
        total_degree_ = e.value();
        switch (scheme_) {
            case MuScheme::Degree: mu_ = degree_; break;
            case MuScheme::Unit: mu_.assign(n_, 1.0); break;
            case MuScheme::Custom:
                if (static_cast<int>(custom_mu.size()) != n_)
                    throw std::invalid_argument("custom mu size mismatch");
                for (double m : custom_mu)
                    if (!(m > 0.0)) throw std::invalid_argument("mu must be positive");
                mu_ = std::move(custom_mu);
                break;
        }
        KahanSum mt;
        for (double m : mu_) mt.add(m);
        mu_total_ = mt.value();
    }

    int order() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<WeightedEdge>& edges() const { return edges_; }
    MuScheme mu_scheme() const { return scheme_; }

    double degree(int i) const { return degree_[i]; }
    const std::vector<double>& degrees() const { return degree_; }
    /// e = sum of all degrees = twice the total edge weight.
    double total_degree() const { return total_degree_; }

    double mu(int i) const { return mu_[i]; }
    const std::vector<double>& mu() const { return mu_; }
    double mu_total() const { return mu_total_; }

    std::span<const Neighbor> neighbors(int i) const {
        return {adj_.data() + offset_[i], adj_.data() + offset_[i + 1]};
    }

    bool has_isolated_vertex() const {
        for (int i = 0; i < n_; ++i)
            if (offset_[i] == offset_[i + 1]) return true;
        return false;
    }

    bool connected() const {
        std::vector<int> stack{0};
        std::vector<char> seen(n_, 0);
        seen[0] = 1;
        int reached = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (const auto& nb : neighbors(v)) {
                if (!seen[nb.vertex]) {
                    seen[nb.vertex] = 1;
                    ++reached;
                    stack.push_back(nb.vertex);
                }
            }
        }
        return reached == n_;
    }

private:
    void build_adjacency() {
        degree_.assign(n_, 0.0);
        offset_.assign(n_ + 1, 0);
        for (const auto& e : edges_) {
            ++offset_[e.u + 1];
            ++offset_[e.v + 1];
        }
        for (int i = 0; i < n_; ++i) offset_[i + 1] += offset_[i];
        adj_.resize(edges_.size() * 2);
        std::vector<int> cursor(offset_.begin(), offset_.end() - 1);
        std::vector<KahanSum> deg(n_);
        for (const auto& e : edges_) {
            adj_[cursor[e.u]++] = {e.v, e.w};
            adj_[cursor[e.v]++] = {e.u, e.w};
            deg[e.u].add(e.w);
            deg[e.v].add(e.w);
        }
        for (int i = 0; i < n_; ++i) degree_[i] = deg[i].value();
    }

    int n_;
    std::vector<WeightedEdge> edges_;
    MuScheme scheme_;
    std::vector<double> degree_;
    std::vector<double> mu_;
    double total_degree_ = 0.0;
    double mu_total_ = 0.0;
    std::vector<int> offset_;
    std::vector<Neighbor> adj_;
};

// ---------------------------------------------------------------------------
// G-set text format: line 1 "n m", then m lines "i j w" with 1-based indices.
// Tokens separated by spaces/tabs, LF or CRLF, trailing blank lines ignored.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline bool parse_int(const std::string& tok, long long& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline bool parse_real(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

inline std::string format_weight(double w) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), w);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace detail

inline Graph parse_gset(std::istream& in, MuScheme scheme) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](bool required) -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        if (required) throw parse_error("unexpected end of file", line_no + 1);
        return false;
    };

    next_line(true);
    auto header = detail::split_tokens(line);
    long long n = 0, m = 0;
    if (header.size() != 2 || !detail::parse_int(header[0], n) ||
        !detail::parse_int(header[1], m) || n < 1 || m < 0)
        throw parse_error("expected header \"n m\"", line_no);

    std::vector<WeightedEdge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    std::map<std::pair<int, int>, std::size_t> seen;
    for (long long k = 0; k < m; ++k) {
        next_line(true);
        auto toks = detail::split_tokens(line);
        if (toks.size() != 3) throw parse_error("expected edge line \"i j w\"", line_no);
        long long i = 0, j = 0;
        double w = 0.0;
        if (!detail::parse_int(toks[0], i) || !detail::parse_int(toks[1], j))
            throw parse_error("bad vertex index", line_no);
        if (i < 1 || i > n || j < 1 || j > n)
            throw parse_error("vertex index out of range", line_no);
        if (i == j) throw parse_error("self-loop", line_no);
        if (!detail::parse_real(toks[2], w)) throw parse_error("bad edge weight", line_no);
        if (!(w > 0.0)) throw parse_error("edge weight must be positive", line_no);
        auto key = std::minmax(static_cast<int>(i) - 1, static_cast<int>(j) - 1);
        if (!seen.emplace(key, line_no).second)
            throw parse_error("duplicate edge", line_no);
        edges.push_back({key.first, key.second, w});
    }
    while (next_line(false)) {
        if (!detail::split_tokens(line).empty())
            throw parse_error("trailing content after edge list", line_no);
    }
    return Graph(static_cast<int>(n), std::move(edges), scheme);
}

inline Graph load_gset(const std::string& path, MuScheme scheme) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_gset(in, scheme);
}

inline void write_gset(const Graph& g, std::ostream& out) {
    out << g.order() << ' ' << g.edge_count() << '\n';
    for (const auto& e : g.edges())
        out << e.u + 1 << ' ' << e.v + 1 << ' ' << detail::format_weight(e.w) << '\n';
}

// ---------------------------------------------------------------------------
// Cuts and their exact combinatorial objectives.
// ---------------------------------------------------------------------------

/// Nonempty proper vertex subset; the complement is implicit.
struct BinaryCut {
    std::vector<int> s;  // 0-based, sorted

    void validate(int n) const {
        if (s.empty()) throw std::invalid_argument("binary cut: empty side");
        if (static_cast<int>(s.size()) >= n)
            throw std::invalid_argument("binary cut: side must be proper");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] < 0 || s[i] >= n) throw std::invalid_argument("binary cut: bad vertex");
            if (i > 0 && s[i] <= s[i - 1])
                throw std::invalid_argument("binary cut: unsorted or duplicate vertex");
        }
    }
};

/// Disjoint pair (V1, V2); the un-partitioned remainder is the complement of
/// their union. Membership in TC(V): union nonempty, both complements nonempty.
struct TernaryPartition {
    std::vector<int> v1;
    std::vector<int> v2;

    void validate(int n) const {
        auto check_side = [n](const std::vector<int>& side, const char* name) {
            for (std::size_t i = 0; i < side.size(); ++i) {
                if (side[i] < 0 || side[i] >= n)
                    throw std::invalid_argument(std::string(name) + ": bad vertex");
                if (i > 0 && side[i] <= side[i - 1])
                    throw std::invalid_argument(std::string(name) + ": unsorted or duplicate");
            }
        };
        check_side(v1, "v1");
        check_side(v2, "v2");
        std::vector<char> mark(n, 0);
        for (int v : v1) mark[v] = 1;
        for (int v : v2) {
            if (mark[v]) throw std::invalid_argument("v1 and v2 overlap");
            mark[v] = 1;
        }
        if (v1.empty() && v2.empty()) throw std::invalid_argument("empty partition");
        if (static_cast<int>(v1.size()) == n) throw std::invalid_argument("v1 complement empty");
        if (static_cast<int>(v2.size()) == n) throw std::invalid_argument("v2 complement empty");
    }

    bool covers_all(int n) const {
        return static_cast<int>(v1.size() + v2.size()) == n;
    }
};

/// Total weight of edges with one endpoint in S and the other in T.
inline double cut_weight(const Graph& g, const std::vector<int>& s,
                         const std::vector<int>& t) {
    std::vector<char> in_s(g.order(), 0), in_t(g.order(), 0);
    for (int v : s) in_s[v] = 1;
    for (int v : t) in_t[v] = 1;
    KahanSum sum;
    for (const auto& e : g.edges())
        if ((in_s[e.u] && in_t[e.v]) || (in_s[e.v] && in_t[e.u])) sum.add(e.w);
    return sum.value();
}

inline double volume(const Graph& g, const std::vector<int>& s) {
    KahanSum sum;
    for (int v : s) sum.add(g.mu(v));
    return sum.value();
}

/// |E(S, S^c)| / min(vol(S), vol(S^c)).
inline double balanced_cut_value(const Graph& g, const BinaryCut& cut) {
    cut.validate(g.order());
    std::vector<char> in_s(g.order(), 0);
    for (int v : cut.s) in_s[v] = 1;
    KahanSum cw;
    for (const auto& e : g.edges())
        if (in_s[e.u] != in_s[e.v]) cw.add(e.w);
    const double vol_s = volume(g, cut.s);
    return cw.value() / std::min(vol_s, g.mu_total() - vol_s);
}

/// Ternary objective: (theta * un-partitioned degree mass + 2|E(V1,V2)|)
/// over sum_{X in {V1,V2}} min(vol(X), vol(X^c)).
inline double theta_cut_value(const Graph& g, const TernaryPartition& p, double theta) {
    p.validate(g.order());
    std::vector<char> label(g.order(), 0);  // 0 unpartitioned, 1 in V1, 2 in V2
    for (int v : p.v1) label[v] = 1;
    for (int v : p.v2) label[v] = 2;
    KahanSum cross, unpart;
    for (const auto& e : g.edges())
        if ((label[e.u] == 1 && label[e.v] == 2) || (label[e.u] == 2 && label[e.v] == 1))
            cross.add(e.w);
    for (int i = 0; i < g.order(); ++i)
        if (label[i] == 0) unpart.add(g.degree(i));
    const double vol1 = volume(g, p.v1);
    const double vol2 = volume(g, p.v2);
    const double denom = std::min(vol1, g.mu_total() - vol1) +
                         std::min(vol2, g.mu_total() - vol2);
    return (theta * unpart.value() + 2.0 * cross.value()) / denom;
}

/// R_i x: copy of x with component i negated (0-based).
inline std::vector<double> flip(const std::vector<double>& x, int i) {
    std::vector<double> y = x;
    y[i] = -y[i];
    return y;
}

/// C_B membership at tolerance eps: no single sign flip lowers the balanced
/// cut objective. Requires a nonconstant binary-valued x; flips that would
/// produce constant vectors are excluded from the comparison.
inline bool is_discrete_local_min(const Graph& g, const std::vector<double>& x,
                                  double eps = 1e-9) {
    const int n = g.order();
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("size mismatch");
    const double m = norm_inf(x);
    if (m == 0.0) throw std::invalid_argument("x must be nonconstant binary-valued");
    std::vector<int> side;  // positive side, as a vertex set
    for (int i = 0; i < n; ++i) {
        if (std::abs(std::abs(x[i]) - m) > 1e-12 * m)
            throw std::invalid_argument("x must be binary-valued");
        if (x[i] > 0) side.push_back(i);
    }
    if (side.empty() || static_cast<int>(side.size()) == n)
        throw std::invalid_argument("x must be nonconstant");
    BinaryCut base{side};
    const double value = balanced_cut_value(g, base);
    for (int i = 0; i < n; ++i) {
        std::vector<int> flipped = side;
        if (x[i] > 0)
            flipped.erase(std::find(flipped.begin(), flipped.end(), i));
        else
            flipped.insert(std::lower_bound(flipped.begin(), flipped.end(), i), i);
        if (flipped.empty() || static_cast<int>(flipped.size()) == n)
            continue;  // constant vector, outside the domain of B
        if (balanced_cut_value(g, BinaryCut{flipped}) < value - eps) return false;
    }
    return true;
}

}  // namespace balcut
