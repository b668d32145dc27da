#pragma once

#include "experiment_config.hpp"

#include <optional>
#include <string>

namespace critlab::cli {

struct RunOptions {
    std::string out_dir = "out";
    int jobs = 1;
    std::optional<long> seed;  ///< overrides [solver] seed
};

/// Execute the configured task, writing report.txt and the task CSVs under
/// out_dir. Returns a process exit code: 0 ok, 2 config error, 3 failed
/// precondition, 4 numeric failure.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

/// Convenience wrapper: parse a file then run.
int run_config_file(const std::string& path, const RunOptions& opt);

/// constants table without a config file.
int run_constants(int dim, const std::string& out_dir);

}  // namespace critlab::cli
