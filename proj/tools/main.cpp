#include <iostream>

#include <CLI11.hpp>

#include "gelfand/io.hpp"
#include "run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Galerkin solver and hypothesis checker for monotone-type evolution equations"};
    app.require_subcommand(0, 1);

    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool quiet = false;
    auto* config_opt = app.add_option("--config", config, "Run configuration (JSON)");
    auto* out_opt = app.add_option("--out", out, "Output directory (overrides the configuration)");
    auto* seed_opt = app.add_option("--seed", seed, "Seed (overrides the configuration)");
    app.add_flag("--quiet", quiet, "Suppress progress output");

    auto* plot = app.add_subcommand("gnuplot", "Print a gnuplot script for a run directory");
    std::string plot_dir;
    plot->add_option("dir", plot_dir, "Run directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (plot->parsed()) {
        std::cout << gelfand::gnuplot_script(plot_dir);
        return 0;
    }
    if (config_opt->count() == 0) {
        std::cerr << "--config is required\n" << app.help();
        return gelfand::cli::kConfigError;
    }
    gelfand::cli::RunOptions opt;
    opt.config = config;
    if (out_opt->count()) opt.out = out;
    if (seed_opt->count()) opt.seed = seed;
    opt.quiet = quiet;
    const auto outcome = gelfand::cli::run(opt);
    if (!quiet) {
        if (outcome.exit_code == 0)
            std::cerr << "wrote " << outcome.out_dir.string() << "\n";
        else
            std::cerr << "gelfand: " << outcome.message << " (exit " << outcome.exit_code << ")\n";
    }
    return outcome.exit_code;
}
