#pragma once

// Subcommand drivers behind the idyn executable. Each writes its CSV
// artifacts plus metadata.txt into the output directory.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "idyn/analysis.hpp"
#include "idyn/cli/config.hpp"
#include "idyn/cli/csv.hpp"
#include "idyn/dynamics.hpp"
#include "idyn/invariants.hpp"

#ifndef IDYN_VERSION
#define IDYN_VERSION "0.1.0-unknown"
#endif

namespace idyn::cli {

enum ExitCode : int { exit_ok = 0, exit_io = 1, exit_config = 2, exit_numerical = 3 };

struct RunOptions {
    std::string subcommand;
    std::filesystem::path out_dir = ".";
    unsigned threads = 1;
    std::optional<std::string> config_path;
    std::ostream* log = &std::cerr;
};

/// What a driver reports back for the metadata file.
struct RunReport {
    std::vector<std::string> artifacts;
    std::map<std::string, std::string> notes;
    bool failed = false;
};

inline const char* version() { return IDYN_VERSION; }

namespace detail {

/// Numeric second derivative for cubic end conditions.
inline SpaceFn second_derivative(const SpaceFn& f, const Habitat& h) {
    const double eta = 1e-4 * h.length();
    return [f, eta, h](double x) {
        const double c = std::clamp(x, h.a + eta, h.b - eta);
        return (f(c + eta) - 2.0 * f(c) + f(c - eta)) / (eta * eta);
    };
}

inline StateFunction initial_state(const Discretization& disc, const std::string& expr, Time t) {
    const SpaceFn f = build_function(expr);
    return StateFunction::from_function(disc, f, t, second_derivative(f, disc.habitat()));
}

inline std::size_t intervals_for(const DiscretizationConfig& d, std::size_t n) {
    if (d.convention == "nodes") {
        if (n < 2) throw ConfigError("discretization: n = " + std::to_string(n) + " needs at least 2 nodes");
        return n - 1;
    }
    return n;
}

inline void append_state(std::vector<CsvRow>& rows, long long key, const StateFunction& u) {
    const auto nodes = u.space().grid().nodes();
    for (std::size_t j = 0; j < nodes.size(); ++j)
        rows.push_back({key, static_cast<long long>(j), nodes[j], u.values()[j]});
}

inline std::string alpha_label(double alpha) {
    std::ostringstream os;
    os << alpha;
    return os.str();
}

inline RunReport run_simulate(const RunConfig& cfg, const RunOptions& opts) {
    const IdeModel model = build_model(cfg.model);
    const auto& e = cfg.experiment;
    const Discretization disc =
        Discretization::uniform(model.habitat, intervals_for(cfg.discretization, cfg.discretization.n),
                                cfg.discretization.degree);
    const auto traj = trajectory(model, disc, e.tau, e.T, initial_state(disc, e.initial, e.tau), {opts.threads});
    std::vector<CsvRow> rows;
    for (const auto& u : traj) append_state(rows, u.time(), u);
    emit_csv({"t", "node", "x", "u"}, rows, (opts.out_dir / "trajectory.csv").string());
    return {{"trajectory.csv"}, {}, false};
}

inline RunReport run_pullback(const RunConfig& cfg, const RunOptions& opts) {
    const IdeModel model = build_model(cfg.model);
    const auto& e = cfg.experiment;
    const auto& d = cfg.discretization;
    const Time start = e.t - static_cast<Time>(e.depth);
    const AbsorbingRadius r = pullback_seed_radius(model, start, stability_constant(d.degree), e.rho, 1e-10);
    RunReport report;
    report.notes["seed_value"] = format_number(r.ball());
    report.notes["seed_truncation_depth"] = std::to_string(r.truncation_depth);
    report.notes["pullback_depth"] = std::to_string(e.depth);
    std::vector<CsvRow> rows;
    for (std::size_t n : d.n_list) {
        const Discretization disc = Discretization::uniform(model.habitat, intervals_for(d, n), d.degree);
        const StateFunction seed = StateFunction::constant(disc, r.ball(), start);
        *opts.log << "pullback: n = " << n << "\n";
        append_state(rows, static_cast<long long>(n), pullback_state(model, disc, e.t, e.depth, seed, {opts.threads}));
    }
    emit_csv({"n", "node", "x", "u"}, rows, (opts.out_dir / "pullback.csv").string());
    report.artifacts.push_back("pullback.csv");
    return report;
}

inline RunReport run_convergence(const RunConfig& cfg, const RunOptions& opts) {
    const auto& e = cfg.experiment;
    const auto& d = cfg.discretization;
    ConvergenceOptions co;
    co.n_list = d.n_list;
    co.depth = e.depth;
    co.t = e.t;
    co.n_ref = d.n_ref;
    co.degree = d.degree;
    co.convention = d.convention == "nodes" ? LevelConvention::nodes : LevelConvention::intervals;
    co.rho = e.rho;
    co.threads = opts.threads;

    const bool bh = cfg.model.growth.type == "beverton-holt";
    std::vector<double> alphas = e.alphas;
    if (alphas.empty() || !bh) alphas = {cfg.model.growth.alpha};

    RunReport report;
    report.notes["pullback_depth"] = std::to_string(e.depth);
    report.notes["n_ref"] = std::to_string(d.n_ref);
    report.notes["sup_norm"] = d.degree == 1 ? "exact (piecewise linear, merged nodes)"
                                             : "sampled on n_ref + 1 equispaced points";
    std::vector<std::pair<std::string, RateTable>> tables;
    for (double alpha : alphas) {
        ModelConfig mc = cfg.model;
        mc.growth.alpha = alpha;
        const IdeModel model = build_model(mc);
        const std::string label = bh ? alpha_label(alpha) : std::string{};
        *opts.log << "convergence" << (bh ? ": alpha = " + label : std::string{}) << "\n";
        const RateTable table = convergence_table(model, co);
        std::vector<CsvRow> rows;
        for (const auto& r : table.rows) rows.push_back({static_cast<long long>(r.n), r.err, r.rate});
        const std::string file = bh ? "convergence_alpha_" + label + ".csv" : "convergence.csv";
        emit_csv({"n", "err_n", "c_n"}, rows, (opts.out_dir / file).string());
        report.artifacts.push_back(file);
        const std::string key = bh ? "alpha=" + label : "ricker";
        report.notes["seed_value[" + key + "]"] = format_number(table.seed_value);
        report.notes["seed_truncation_depth[" + key + "]"] = std::to_string(table.seed_truncation_depth);
        tables.emplace_back(bh ? "alpha = " + label : "c(n)", table);
    }

    std::ostringstream txt;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%8s", "n");
    txt << buf;
    for (const auto& [name, t] : tables) {
        std::snprintf(buf, sizeof buf, "  %14s", name.c_str());
        txt << buf;
    }
    txt << "\n";
    for (std::size_t i = 0; i < d.n_list.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%8zu", d.n_list[i]);
        txt << buf;
        for (const auto& [name, t] : tables) {
            std::snprintf(buf, sizeof buf, "  %14.7f", t.rows[i].rate);
            txt << buf;
        }
        txt << "\n";
    }
    write_text((opts.out_dir / "convergence_table.txt").string(), txt.str());
    report.artifacts.push_back("convergence_table.txt");
    return report;
}

inline RunReport run_forward_limit(const RunConfig& cfg, const RunOptions& opts) {
    if (cfg.model.growth.type != "ricker") throw ConfigError("forward-limit requires model.growth.type: ricker");
    const IdeModel model = build_model(cfg.model);
    const IdeModel frozen = build_model(cfg.model, true);
    const auto& e = cfg.experiment;
    const auto& d = cfg.discretization;
    std::vector<Discretization> discs;
    for (std::size_t n : d.n_list) discs.push_back(Discretization::uniform(model.habitat, intervals_for(d, n), d.degree));
    std::vector<SpaceFn> seeds;
    for (const auto& s : e.seeds) seeds.push_back(build_function(s));
    ForwardLimitOptions fo;
    fo.tol = e.tolerance;
    fo.max_iter = e.max_iter;
    fo.threads = opts.threads;
    const auto levels = forward_limit_experiment(model, frozen, discs, e.tau, e.horizon, seeds, fo);

    RunReport report;
    std::vector<CsvRow> dist_rows, fp_rows;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto n = static_cast<long long>(d.n_list[i]);
        for (const auto& [s, dist] : levels[i].distances) dist_rows.push_back({n, static_cast<long long>(s), dist});
        append_state(fp_rows, n, levels[i].fixed_point);
        report.notes["fixed_point_iterations[n=" + std::to_string(n) + "]"] =
            std::to_string(levels[i].fixed_point_iterations);
    }
    emit_csv({"n", "s", "distance"}, dist_rows, (opts.out_dir / "forward_limit.csv").string());
    emit_csv({"n", "node", "x", "u"}, fp_rows, (opts.out_dir / "fixed_points.csv").string());
    report.artifacts = {"forward_limit.csv", "fixed_points.csv"};
    report.notes["horizon"] = std::to_string(e.horizon);
    return report;
}

inline RunReport run_check_invariants(const RunConfig& cfg, const RunOptions& opts) {
    const IdeModel model = build_model(cfg.model);
    const auto& e = cfg.experiment;
    const auto& d = cfg.discretization;
    const std::size_t intervals = intervals_for(d, d.n);
    const Discretization disc = Discretization::uniform(model.habitat, intervals, d.degree);
    const std::uint64_t seed = cfg.rng_seed;

    std::vector<CheckResult> results;
    for (int l = 1; l <= 3; ++l) {
        const auto space = std::make_shared<const SplineSpace>(Grid::uniform(model.habitat, intervals), l);
        results.push_back(check_partition_of_unity(*space));
        results.push_back(check_projection_stability(space, e.trials, seed + static_cast<std::uint64_t>(l)));
    }
    RunReport report;
    if (d.degree <= 2) {
        results.push_back(check_boundedness(model, disc, e.t, e.radius, e.trials, seed + 10));
        results.push_back(check_lipschitz(model, disc, e.t, e.radius, e.trials, seed + 11));
    } else {
        report.notes["skipped"] = "boundedness and lipschitz checks need degree 1 or 2";
    }
    const auto* bh = std::get_if<BevertonHolt>(&model.growth);
    if (d.degree == 1 && (!bh || bh->alpha <= 1.0)) {
        results.push_back(check_positivity(model, disc, e.t, e.radius, e.trials, seed + 12));
        if (bh) results.push_back(check_order_preservation(model, disc, e.t, e.radius, e.trials, seed + 13));
    }
    const bool bounded_growth = bh && bh->alpha >= 1.0;
    results.push_back(
        check_absorbing_invariance(model, disc, e.tau, e.trials, seed + 14, e.rho, bounded_growth ? 10.0 : 1.0));

    std::vector<CsvRow> rows;
    for (const auto& r : results) {
        rows.push_back({r.name, static_cast<long long>(r.trials), static_cast<long long>(r.failures), r.worst_ratio,
                        std::string(r.passed() ? "pass" : "fail")});
        *opts.log << r.name << ": " << r.trials - r.failures << "/" << r.trials << " passed\n";
        report.failed = report.failed || !r.passed();
    }
    emit_csv({"check", "trials", "failures", "worst_ratio", "status"}, rows,
             (opts.out_dir / "invariants.csv").string());
    report.artifacts.push_back("invariants.csv");
    return report;
}

inline void write_metadata(const RunConfig& cfg, const RunOptions& opts, const RunReport& report, double seconds,
                           const std::string& status) {
    std::ostringstream md;
    md << "version: " << version() << "\n";
    md << "subcommand: " << opts.subcommand << "\n";
    md << "status: " << status << "\n";
    md << "config_file: " << opts.config_path.value_or("(built-in defaults)") << "\n";
    md << "threads: " << opts.threads << "\n";
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", seconds);
    md << "wall_time_seconds: " << wall << "\n";
    for (const auto& [k, v] : report.notes) md << k << ": " << v << "\n";
    md << "artifacts:";
    for (const auto& a : report.artifacts) md << " " << a;
    md << "\n\n# effective configuration\n" << to_yaml(cfg);
    write_text((opts.out_dir / "metadata.txt").string(), md.str());
}

} // namespace detail

/// Run one subcommand; returns the process exit code.
inline int run(const RunConfig& cfg, const RunOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    std::string status = "ok";
    int code = exit_ok;
    try {
        std::filesystem::create_directories(opts.out_dir);
        if (opts.subcommand == "simulate") report = detail::run_simulate(cfg, opts);
        else if (opts.subcommand == "pullback") report = detail::run_pullback(cfg, opts);
        else if (opts.subcommand == "convergence") report = detail::run_convergence(cfg, opts);
        else if (opts.subcommand == "forward-limit") report = detail::run_forward_limit(cfg, opts);
        else if (opts.subcommand == "check-invariants") report = detail::run_check_invariants(cfg, opts);
        else throw ConfigError("unknown subcommand '" + opts.subcommand + "'");
        if (report.failed) {
            status = "invariant failures";
            code = exit_numerical;
        }
    } catch (const InputError& e) {
        *opts.log << "idyn " << opts.subcommand << ": input error: " << e.what() << "\n";
        status = std::string("input error: ") + e.what();
        code = exit_config;
    } catch (const NumericalError& e) {
        *opts.log << "idyn " << opts.subcommand << ": numerical error: " << e.what() << "\n";
        status = std::string("numerical error: ") + e.what();
        code = exit_numerical;
    } catch (const PreconditionError& e) {
        *opts.log << "idyn " << opts.subcommand << ": precondition violated: " << e.what() << "\n";
        status = std::string("precondition violated: ") + e.what();
        code = exit_numerical;
    } catch (const IoError& e) {
        *opts.log << "idyn " << opts.subcommand << ": i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::filesystem::filesystem_error& e) {
        *opts.log << "idyn " << opts.subcommand << ": i/o error: " << e.what() << "\n";
        return exit_io;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        detail::write_metadata(cfg, opts, report, seconds, status);
    } catch (const IoError& e) {
        *opts.log << "idyn " << opts.subcommand << ": i/o error: " << e.what() << "\n";
        return code == exit_ok ? exit_io : code;
    }
    return code;
}

} // namespace idyn::cli
