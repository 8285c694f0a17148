// Placement policy interface and the classical baselines. Privacy-aware
// policies never see the privileged load/resource view; the engine only
// builds it for policies that ask.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fogsim/rng.hpp"
#include "fogsim/topology.hpp"
#include "fogsim/workload.hpp"

namespace fogsim {

struct PrivilegedNodeInfo {
    int node_id = -1;
    int waiting = 0;             // jobs in the waiting queue
    double backlog_instr = 0.0;  // queued instructions plus remaining in-service work
    double ipt = 0.0;
};

// Aligned with DecisionContext::fog_node_ids.
struct PrivilegedView {
    std::vector<PrivilegedNodeInfo> fog;
};

struct DecisionContext {
    const Workload& workload;
    const AppSpec& app;
    int cluster_index;                     // index into Topology::cluster_ids()
    const std::vector<int>& fog_node_ids;  // stable for the whole episode
    double now;
    const PrivilegedView* privileged;  // null unless the policy requests it
};

class PlacementPolicy {
public:
    virtual ~PlacementPolicy() = default;

    // Returns the fog node id for this workload. delayed_reward evaluates the
    // previous decision; it is 0 on the first decision of an episode.
    virtual int decide(const DecisionContext& ctx, double delayed_reward) = 0;

    virtual void end_episode() {}
    virtual bool needs_privileged() const { return false; }
    virtual std::string name() const = 0;
};

class RandomPolicy final : public PlacementPolicy {
public:
    explicit RandomPolicy(uint64_t seed) : rng_(seed) {}
    int decide(const DecisionContext& ctx, double) override;
    std::string name() const override { return "random"; }

private:
    Rng rng_;
};

// Cycles the fog list with one global counter shared by all clusters.
class RoundRobinPolicy final : public PlacementPolicy {
public:
    int decide(const DecisionContext& ctx, double) override;
    std::string name() const override { return "rr"; }

private:
    size_t next_ = 0;
};

class NearestPolicy final : public PlacementPolicy {
public:
    explicit NearestPolicy(const Topology& topo) : topo_(topo) {}
    int decide(const DecisionContext& ctx, double) override;
    std::string name() const override { return "nearest"; }

private:
    const Topology& topo_;
    std::map<std::pair<int, long>, int> cache_;  // (cluster, req bytes) -> node
};

// Minimizes estimated completion: path latency + service time, optionally
// plus the queued backlog at each node (privileged either way).
class FastestPolicy final : public PlacementPolicy {
public:
    FastestPolicy(const Topology& topo, bool include_backlog)
        : topo_(topo), include_backlog_(include_backlog) {}
    int decide(const DecisionContext& ctx, double) override;
    bool needs_privileged() const override { return true; }
    std::string name() const override { return "fastest"; }

    // Estimate for one candidate; exposed for tests.
    static double estimate_ms(double path_latency_ms, double backlog_instr, double fog_instr,
                              double ipt, bool include_backlog);

private:
    const Topology& topo_;
    bool include_backlog_;
    std::map<std::pair<int, long>, std::vector<double>> latency_cache_;
};

// Comparison slot for the multi-criteria method from prior work; calling it
// is an error.
class ElectrePolicy final : public PlacementPolicy {
public:
    int decide(const DecisionContext&, double) override;
    std::string name() const override { return "electre"; }
};

}  // namespace fogsim
