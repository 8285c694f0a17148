// Distributed applications and per-cluster stochastic workload generation.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fogsim/rng.hpp"

namespace fogsim {

enum class Category { Light, Moderate, Heavy };

const char* category_name(Category c);
Category category_from_name(const std::string& name);

struct AppSpec {
    int id = 0;
    Category category = Category::Light;
    double fog_instr = 0.0;    // instructions per workload at the fog node
    double cloud_instr = 0.0;  // instructions per aggregation at the cloud
    double req_bytes = 0.0;
    double fog_resp_bytes = 0.0;
    double cloud_agg_bytes = 0.0;
    double cloud_resp_bytes = 0.0;
    double p_cloud = 0.10;           // probability a fog result is aggregated
    double p_cloud_feedback = 0.50;  // probability the cloud replies to source
};

// Placeholder application set: one app per category, cloud aggregation on 10%
// of workloads with feedback on half of those.
std::vector<AppSpec> default_apps();

// Strict ordering of per-category demands plus probability ranges; returns all
// violations found.
std::vector<std::string> check_apps(const std::vector<AppSpec>& apps);

struct Timestamps {
    std::optional<double> emit;
    std::optional<double> arrive;
    std::optional<double> service_start;
    std::optional<double> service_end;
    std::optional<double> feedback_arrive;
};

struct Workload {
    long uid = -1;
    int app_id = 0;
    int source_cluster = -1;
    double created_at = 0.0;
    std::optional<int> assigned_node;
    Timestamps ts;
};

struct GenConfig {
    double beta = 200.0;          // exponential scale of inter-arrival times, ms
    std::vector<double> app_mix;  // optional; empty = one generator per app
};

// Strictly positive exponential inter-arrival sample.
double next_interarrival(Rng& rng, double beta);

enum class FogResultRoute { Done, ToCloud, ToCloudThenFeedback };

// Bernoulli(p_cloud) cloud forwarding, then Bernoulli(p_cloud_feedback)
// feedback for forwarded results.
FogResultRoute route_fog_result(Rng& rng, const AppSpec& app);

}  // namespace fogsim
