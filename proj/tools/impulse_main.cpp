#include <iostream>

#include "CLI11.hpp"

#include "impulse/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Obstacle, QVI and penalization experiments on uniform grids"};
    std::string config;
    std::string output;
    bool quiet = false;
    app.add_option("--config", config, "Experiment config (JSON)")->required();
    app.add_option("--output", output, "Output directory (overrides output.directory)");
    app.add_flag("--quiet", quiet, "Suppress the summary line");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : impulse::kExitConfig;
    }

    impulse::RunOptions opts;
    if (!output.empty()) opts.output = output;
    opts.quiet = quiet;
    return impulse::run_file(config, opts, std::cout, std::cerr);
}
