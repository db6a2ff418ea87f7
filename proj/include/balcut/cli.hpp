#pragma once

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "balcut/graph.hpp"
#include "balcut/oracle.hpp"
#include "balcut/solver.hpp"

namespace balcut::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 ok, 2 usage/parse, 3 solve contract violation, 4 oracle size
// guard, 5 invalid partition.
inline constexpr int kExitUsage = 2;
inline constexpr int kExitContract = 3;
inline constexpr int kExitSizeGuard = 4;
inline constexpr int kExitBadPartition = 5;

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::vector<int> to_one_based(const std::vector<int>& zero_based) {
    std::vector<int> out;
    out.reserve(zero_based.size());
    for (int v : zero_based) out.push_back(v + 1);
    return out;
}

inline double percentile95(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t rank =
        (values.size() * 95 + 99) / 100;  // nearest-rank, 1-based
    return values[std::max<std::size_t>(rank, 1) - 1];
}

struct SolveArgs {
    std::string input;
    std::string cut = "cheeger";
    std::string algo;
    int theta_rounds = 200;
    double theta_min = 0.3, theta_max = 0.8;
    int runs = 1;
    std::uint64_t seed = 1;
    std::string init = "spectral";
    std::string subgradient = "boundary";
    std::string format = "json";
};

inline MuScheme scheme_of(const std::string& cut) {
    return cut == "cheeger" ? MuScheme::Degree : MuScheme::Unit;
}

inline SolverConfig config_of(const SolveArgs& a) {
    SolverConfig cfg;
    cfg.cut_type = a.cut == "cheeger" ? CutType::Cheeger : CutType::Sparsest;
    cfg.theta_rounds = a.algo == "sip" ? 0 : a.theta_rounds;
    cfg.theta_min = a.theta_min;
    cfg.theta_max = a.theta_max;
    cfg.seed = a.seed;
    cfg.init = a.init == "spectral" ? InitKind::Spectral : InitKind::RandomVector;
    cfg.subgradient_mode = a.subgradient == "boundary" ? SubgradientMode::Boundary
                                                       : SubgradientMode::Random;
    cfg.validate();
    return cfg;
}

inline ordered_json config_json(const SolveArgs& a, const SolverConfig& cfg) {
    ordered_json j;
    j["theta_rounds"] = cfg.theta_rounds;
    j["theta_min"] = cfg.theta_min;
    j["theta_max"] = cfg.theta_max;
    j["runs"] = a.runs;
    j["seed"] = a.seed;
    j["init"] = a.init;
    j["subgradient"] = a.subgradient;
    j["eps_descent"] = cfg.eps_descent;
    j["max_iters_per_phase"] = cfg.max_iters_per_phase;
    return j;
}

inline int run_solve(const SolveArgs& a, std::ostream& out) {
    const Graph g = load_gset(a.input, scheme_of(a.cut));
    const SolverConfig cfg = config_of(a);
    const MultiRunReport agg = multi_run(g, cfg, a.runs);

    int best_idx = 0;
    for (int k = 1; k < a.runs; ++k)
        if (agg.runs[k].report.best_value < agg.runs[best_idx].report.best_value)
            best_idx = k;
    const RunReport& best = agg.runs[best_idx].report;

    if (a.format == "json") {
        ordered_json j;
        j["tool"] = "balcut";
        j["version"] = kVersion;
        j["command"] = "solve";
        j["instance"] = a.input;
        j["cut"] = a.cut;
        j["algorithm"] = a.algo;
        j["config"] = config_json(a, cfg);
        ordered_json runs = ordered_json::array();
        for (int k = 0; k < a.runs; ++k) {
            const auto& rs = agg.runs[k];
            ordered_json r;
            r["run"] = k;
            r["value"] = rs.report.best_value;
            r["iterations"] = rs.report.iterations_total;
            r["time_ms"] = rs.report.wall_time_ms;
            r["rel_err6"] = rs.rel_err6;
            r["rel_gain"] = rs.rel_gain;
            r["spectral_fallback"] = rs.report.spectral_fallback;
            runs.push_back(std::move(r));
        }
        j["runs"] = std::move(runs);
        j["best_value"] = best.best_value;
        j["best_partition"]["v1"] = to_one_based(best.best_partition.v1);
        j["best_partition"]["v2"] = to_one_based(best.best_partition.v2);
        j["aggregate"]["min"] = agg.min_value;
        j["aggregate"]["mean"] = agg.mean_value;
        j["aggregate"]["max"] = agg.max_value;
        j["aggregate"]["mean_time_ms"] = agg.mean_time_ms;
        out << j.dump(2) << '\n';
    } else {
        out << "instance,cut,algorithm,run,seed,value,iterations,time_ms,rel_err6,rel_gain\n";
        for (int k = 0; k < a.runs; ++k) {
            const auto& rs = agg.runs[k];
            out << a.input << ',' << a.cut << ',' << a.algo << ',' << k << ',' << a.seed
                << ',' << fmt(rs.report.best_value) << ',' << rs.report.iterations_total
                << ',' << fmt(rs.report.wall_time_ms) << ',' << fmt(rs.rel_err6) << ','
                << fmt(rs.rel_gain) << '\n';
        }
    }
    return 0;
}

struct OracleArgs {
    std::string input;
    std::string cut = "cheeger";
    double theta = -1.0;  // < 0 means binary h(G)
    std::string format = "json";
};

inline int run_oracle(const OracleArgs& a, std::ostream& out) {
    const Graph g = load_gset(a.input, scheme_of(a.cut));
    ordered_json j;
    j["tool"] = "balcut";
    j["version"] = kVersion;
    j["command"] = "oracle";
    j["instance"] = a.input;
    j["cut"] = a.cut;
    double value = 0.0;
    std::uint64_t enumerated = 0;
    if (a.theta >= 0.0) {
        const TernaryOracleResult res = brute_force_h_theta(g, a.theta);
        value = res.value;
        enumerated = res.enumerated;
        j["theta"] = a.theta;
        j["value"] = res.value;
        j["witness"]["v1"] = to_one_based(res.witness.v1);
        j["witness"]["v2"] = to_one_based(res.witness.v2);
    } else {
        const BinaryOracleResult res = brute_force_h(g);
        value = res.value;
        enumerated = res.enumerated;
        j["value"] = res.value;
        j["witness"]["s"] = to_one_based(res.witness.s);
    }
    j["enumerated"] = enumerated;
    if (a.format == "json") {
        out << j.dump(2) << '\n';
    } else {
        out << "instance,cut,theta,value,enumerated\n";
        out << a.input << ',' << a.cut << ','
            << (a.theta >= 0.0 ? fmt(a.theta) : std::string("")) << ',' << fmt(value)
            << ',' << enumerated << '\n';
    }
    return 0;
}

struct CurveArgs {
    std::string input;
    std::string cut = "cheeger";
    double step = 0.01;
};

inline int run_curve(const CurveArgs& a, std::ostream& out, std::ostream& err) {
    if (!(a.step > 0.0) || a.step > 1.0) {
        err << "error: --step must lie in (0, 1]\n";
        return kExitUsage;
    }
    const Graph g = load_gset(a.input, scheme_of(a.cut));
    std::vector<double> grid;
    for (int k = 0;; ++k) {
        const double t = k * a.step;
        if (t >= 1.0 - 1e-12) break;
        grid.push_back(t);
    }
    grid.push_back(1.0);
    const auto curve = theta_curve(g, grid);
    out << "theta,h_theta\n";
    for (const auto& [t, h] : curve) out << fmt(t) << ',' << fmt(h) << '\n';
    return 0;
}

struct CheckArgs {
    std::string input;
    std::string partition;
    std::string cut = "cheeger";
    double theta = -1.0;
};

inline int run_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
    const Graph g = load_gset(a.input, scheme_of(a.cut));
    std::ifstream pin(a.partition);
    if (!pin) throw std::runtime_error("cannot open " + a.partition);
    nlohmann::json pj;
    try {
        pin >> pj;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("partition file: ") + e.what());
    }

    TernaryPartition p;
    try {
        if (!pj.contains("v1")) throw std::invalid_argument("missing \"v1\"");
        for (int v : pj["v1"].get<std::vector<int>>()) p.v1.push_back(v - 1);
        if (pj.contains("v2")) {
            for (int v : pj["v2"].get<std::vector<int>>()) p.v2.push_back(v - 1);
        } else {
            std::vector<char> in1(g.order(), 0);
            for (int v : p.v1)
                if (v >= 0 && v < g.order()) in1[v] = 1;
            for (int i = 0; i < g.order(); ++i)
                if (!in1[i]) p.v2.push_back(i);
        }
        std::sort(p.v1.begin(), p.v1.end());
        std::sort(p.v2.begin(), p.v2.end());
        p.validate(g.order());
    } catch (const std::invalid_argument& e) {
        err << "invalid partition: " << e.what() << '\n';
        return kExitBadPartition;
    }

    ordered_json j;
    j["tool"] = "balcut";
    j["version"] = kVersion;
    j["command"] = "check";
    j["instance"] = a.input;
    j["cut"] = a.cut;
    if (a.theta >= 0.0) {
        j["theta"] = a.theta;
        j["value"] = theta_cut_value(g, p, a.theta);
    } else {
        if (!p.covers_all(g.order())) {
            err << "error: ternary partition needs --theta\n";
            return kExitUsage;
        }
        j["value"] = balanced_cut_value(g, BinaryCut{p.v1});
        std::vector<double> x(g.order(), -1.0);
        for (int v : p.v1) x[v] = 1.0;
        j["c_b"] = is_discrete_local_min(g, x);
    }
    out << j.dump(2) << '\n';
    return 0;
}

struct BenchArgs {
    std::string dir;
    std::string cut = "cheeger";
    std::string algo = "sip-perturb";
    int runs = 1;
    int theta_rounds = 200;
    std::uint64_t seed = 1;
    std::string format = "csv";
};

inline int run_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    if (!fs::is_directory(a.dir)) {
        err << "error: not a directory: " << a.dir << '\n';
        return kExitUsage;
    }
    for (const auto& entry : fs::directory_iterator(a.dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        err << "error: no instances in " << a.dir << '\n';
        return kExitUsage;
    }

    SolveArgs sa;
    sa.cut = a.cut;
    sa.algo = a.algo;
    sa.theta_rounds = a.theta_rounds;
    sa.seed = a.seed;
    const SolverConfig cfg = config_of(sa);

    ordered_json rows = ordered_json::array();
    const char* header =
        "instance,n,m,runs,min,mean,max,mean_time_s,rel_err6_mean,rel_err6_p95,"
        "rel_err6_max,rel_gain_mean,rel_gain_max\n";
    if (a.format == "csv") out << header;
    for (const auto& path : files) {
        const Graph g = load_gset(path.string(), scheme_of(a.cut));
        const MultiRunReport agg = multi_run(g, cfg, a.runs);
        std::vector<double> errs, gains;
        for (const auto& rs : agg.runs) {
            errs.push_back(rs.rel_err6);
            gains.push_back(rs.rel_gain);
        }
        KahanSum err_sum, gain_sum;
        for (double e : errs) err_sum.add(e);
        for (double gn : gains) gain_sum.add(gn);
        const double err_mean = err_sum.value() / errs.size();
        const double gain_mean = gain_sum.value() / gains.size();
        const double err_max = *std::max_element(errs.begin(), errs.end());
        const double gain_max = *std::max_element(gains.begin(), gains.end());
        const double p95 = percentile95(errs);
        if (a.format == "csv") {
            out << path.filename().string() << ',' << g.order() << ',' << g.edge_count()
                << ',' << a.runs << ',' << fmt(agg.min_value) << ','
                << fmt(agg.mean_value) << ',' << fmt(agg.max_value) << ','
                << fmt(agg.mean_time_ms / 1000.0) << ',' << fmt(err_mean) << ','
                << fmt(p95) << ',' << fmt(err_max) << ',' << fmt(gain_mean) << ','
                << fmt(gain_max) << '\n';
        } else {
            ordered_json row;
            row["instance"] = path.filename().string();
            row["n"] = g.order();
            row["m"] = g.edge_count();
            row["min"] = agg.min_value;
            row["mean"] = agg.mean_value;
            row["max"] = agg.max_value;
            row["mean_time_s"] = agg.mean_time_ms / 1000.0;
            row["rel_err6"] = {{"mean", err_mean}, {"p95", p95}, {"max", err_max}};
            row["rel_gain"] = {{"mean", gain_mean}, {"max", gain_max}};
            rows.push_back(std::move(row));
        }
    }
    if (a.format == "json") {
        ordered_json j;
        j["tool"] = "balcut";
        j["version"] = kVersion;
        j["command"] = "bench";
        j["cut"] = a.cut;
        j["algorithm"] = a.algo;
        j["runs"] = a.runs;
        j["seed"] = a.seed;
        j["instances"] = std::move(rows);
        out << j.dump(2) << '\n';
    }
    return 0;
}

}  // namespace detail

/// Argument-vector entry point; the binary's main() forwards here and tests
/// drive it in-process.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"balanced graph cut solver (SIP / SIP-theta / SIP-perturb)"};
    app.require_subcommand(1);

    detail::SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "run the solver on one instance");
    solve->add_option("--input", sa.input, "G-set format instance")->required();
    solve->add_option("--cut", sa.cut, "cut type")
        ->check(CLI::IsMember({"cheeger", "sparsest"}));
    solve->add_option("--algo", sa.algo, "algorithm")
        ->required()
        ->check(CLI::IsMember({"sip", "sip-perturb"}));
    solve->add_option("--theta-rounds", sa.theta_rounds, "SIP-theta rounds (T_theta)");
    solve->add_option("--theta-min", sa.theta_min, "theta sampling lower bound");
    solve->add_option("--theta-max", sa.theta_max, "theta sampling upper bound");
    solve->add_option("--runs", sa.runs, "independent seeded runs")
        ->check(CLI::PositiveNumber);
    solve->add_option("--seed", sa.seed, "base seed");
    solve->add_option("--init", sa.init, "initialization")
        ->check(CLI::IsMember({"spectral", "random"}));
    solve->add_option("--subgradient", sa.subgradient, "subgradient selection")
        ->check(CLI::IsMember({"boundary", "random"}));
    solve->add_option("--format", sa.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    detail::OracleArgs oa;
    auto* oracle = app.add_subcommand("oracle", "exact brute-force optimum");
    oracle->add_option("--input", oa.input, "G-set format instance")->required();
    oracle->add_option("--cut", oa.cut, "cut type")
        ->check(CLI::IsMember({"cheeger", "sparsest"}));
    oracle->add_option("--theta", oa.theta, "theta-balanced cut instead of h(G)")
        ->check(CLI::Range(0.0, 1.0));
    oracle->add_option("--format", oa.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    detail::CurveArgs ca;
    auto* curve = app.add_subcommand("curve", "exact theta curve as CSV");
    curve->add_option("--input", ca.input, "G-set format instance")->required();
    curve->add_option("--cut", ca.cut, "cut type")
        ->check(CLI::IsMember({"cheeger", "sparsest"}));
    curve->add_option("--step", ca.step, "theta grid step (default 0.01)");

    detail::CheckArgs ka;
    auto* check = app.add_subcommand("check", "evaluate an external partition");
    check->add_option("--input", ka.input, "G-set format instance")->required();
    check->add_option("--partition", ka.partition, "partition JSON file")->required();
    check->add_option("--cut", ka.cut, "cut type")
        ->check(CLI::IsMember({"cheeger", "sparsest"}));
    check->add_option("--theta", ka.theta, "evaluate the theta objective")
        ->check(CLI::Range(0.0, 1.0));

    detail::BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "benchmark a directory of instances");
    bench->add_option("--dir", ba.dir, "directory of G-set instances")->required();
    bench->add_option("--cut", ba.cut, "cut type")
        ->check(CLI::IsMember({"cheeger", "sparsest"}));
    bench->add_option("--algo", ba.algo, "algorithm")
        ->check(CLI::IsMember({"sip", "sip-perturb"}));
    bench->add_option("--runs", ba.runs, "runs per instance")->check(CLI::PositiveNumber);
    bench->add_option("--theta-rounds", ba.theta_rounds, "SIP-theta rounds");
    bench->add_option("--seed", ba.seed, "base seed");
    bench->add_option("--format", ba.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    std::vector<const char*> argv;
    argv.push_back("balcut");
    for (const auto& s : args) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    }

    try {
        if (solve->parsed()) return detail::run_solve(sa, out);
        if (oracle->parsed()) return detail::run_oracle(oa, out);
        if (curve->parsed()) return detail::run_curve(ca, out, err);
        if (check->parsed()) return detail::run_check(ka, out, err);
        if (bench->parsed()) return detail::run_bench(ba, out, err);
    } catch (const size_guard_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitSizeGuard;
    } catch (const contract_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitContract;
    } catch (const parse_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace balcut::cli
