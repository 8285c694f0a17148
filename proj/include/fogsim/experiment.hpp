// Grid runner: every (beta, policy, horizon, seed) cell of the configured
// experiment, with per-cell CSVs and the grid summary.
#pragma once

#include <string>
#include <vector>

#include "fogsim/config.hpp"

namespace fogsim {

struct GridOutcome {
    int total_cells = 0;
    int failed_cells = 0;
    std::vector<std::string> failures;  // "cell: reason"
    std::vector<std::string> run_files;
    std::string summary_path;
};

// RL policies are trained once per (beta, seed) and evaluated at every
// horizon; baselines run directly. Failing cells are recorded and skipped.
GridOutcome run_grid(const ExperimentConfig& cfg);

std::string run_csv_name(const std::string& policy, double beta, double horizon, uint64_t seed);
std::string checkpoint_name(const std::string& policy, double beta, uint64_t seed);

}  // namespace fogsim
