#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "impulse/config.hpp"

namespace impulse {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNotConverged = 2 };

struct RunOptions {
    /// Replaces output.directory when set.
    std::optional<std::filesystem::path> output;
    /// Relative CSV inputs are resolved against this directory.
    std::filesystem::path base_dir = ".";
    bool quiet = false;
};

/**
 * Runs the configured pipeline and writes solution.csv, report.json and
 * manifest.json (plus decay.json, and the CSV mirrors when enabled). Returns
 * 0 on convergence, 2 on non-convergence (outputs are still written) and 1 on
 * configuration or I/O errors, which are reported on `err`.
 */
int run(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Loads the config file, then run(); relative inputs resolve against its directory.
int run_file(const std::filesystem::path& config_path, RunOptions opts, std::ostream& out, std::ostream& err);

}  // namespace impulse
