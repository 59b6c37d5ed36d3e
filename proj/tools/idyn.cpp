#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "idyn/cli/config.hpp"
#include "idyn/cli/run.hpp"

int main(int argc, char** argv) {
    using namespace idyn::cli;

    CLI::App app{"Simulation and convergence experiments for nonautonomous integrodifference equations"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path, out_dir = ".";
    unsigned threads = 1;
    std::optional<double> alpha;
    std::optional<std::size_t> n_ref, depth;
    app.add_option("--config", config_path, "YAML run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (1 gives bit-identical output)")->check(CLI::PositiveNumber);
    app.add_option("--alpha", alpha, "override the Beverton-Holt exponent");
    app.add_option("--n-ref", n_ref, "override the reference resolution");
    app.add_option("--depth", depth, "override the pullback depth s");

    app.add_subcommand("simulate", "forward trajectory on one discretisation");
    app.add_subcommand("pullback", "pullback witnesses on each level of n_list");
    app.add_subcommand("convergence", "rate table c(n)");
    app.add_subcommand("forward-limit", "Ricker fixed points and forward orbit distances");
    app.add_subcommand("check-invariants", "randomised checks of the operator properties");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    RunOptions opts;
    opts.subcommand = app.get_subcommands().front()->get_name();
    opts.out_dir = out_dir;
    opts.threads = threads;

    RunConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = load_config(config_path);
            opts.config_path = config_path;
        }
    } catch (const idyn::InputError& e) {
        std::cerr << "idyn: " << e.what() << "\n";
        return exit_config;
    }
    if (alpha) {
        if (!(*alpha > 0.0)) {
            std::cerr << "idyn: --alpha must be positive\n";
            return exit_config;
        }
        cfg.model.growth.alpha = *alpha;
        cfg.experiment.alphas = {*alpha};
    }
    if (n_ref) cfg.discretization.n_ref = *n_ref;
    if (depth) cfg.experiment.depth = *depth;
    return run(cfg, opts);
}
