// Experiment configuration: JSON schema, validation, and policy construction.
#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogsim/ddql.hpp"
#include "fogsim/policy.hpp"
#include "fogsim/topology.hpp"
#include "fogsim/workload.hpp"

namespace fogsim {

struct ExperimentConfig {
    std::optional<std::string> topology_file;
    TopoParams topo;
    std::vector<AppSpec> apps = default_apps();
    std::vector<double> app_mix;  // empty = one generator per app
    std::vector<double> betas{200.0, 150.0, 100.0};
    std::vector<std::string> policies{"random", "rr", "nearest", "fastest", "ddql"};
    std::vector<double> horizons{10000.0};
    std::vector<uint64_t> seeds{1};
    std::string schedule = "desk";  // desk | paper
    std::string out_dir = "results";
    bool fastest_backlog = false;   // static service estimate by default
    int plrl_queue_capacity = 20;   // overflow indicator threshold
    std::string base_dir = ".";     // directory of the config file

    TrainSchedule train_schedule() const;
};

// Carries every violation found, one message each.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v);
    std::vector<std::string> violations_;
};

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");

// Parses and checks the file; throws ConfigError listing all violations.
ExperimentConfig validate_config(const std::string& path);

// Collected semantic checks; empty result means the config is valid.
std::vector<std::string> check_config(const ExperimentConfig& cfg);

const std::vector<std::string>& known_policies();
bool is_rl_policy(const std::string& name);

Topology build_topology(const ExperimentConfig& cfg);

// Baseline policies only; RL policies are created via make_rl_agent.
std::unique_ptr<PlacementPolicy> make_baseline_policy(const std::string& name,
                                                      const ExperimentConfig& cfg,
                                                      const Topology& topo, uint64_t seed);

std::unique_ptr<RlAgent> make_rl_agent(const std::string& name, const ExperimentConfig& cfg,
                                       const Topology& topo, uint64_t seed);

}  // namespace fogsim
