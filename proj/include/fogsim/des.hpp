// Deterministic discrete-event engine. Drives workload generation, placement
// decisions with delayed rewards, FIFO service queues, and both application
// feedback loops.
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "fogsim/metrics.hpp"
#include "fogsim/policy.hpp"
#include "fogsim/topology.hpp"
#include "fogsim/workload.hpp"

namespace fogsim {

enum class EventKind { Generate, Arrive, ServiceStart, ServiceEnd, FeedbackArrive, EpisodeEnd };

// Which message leg an Arrive/FeedbackArrive event carries.
enum class Leg { FogRequest, FogResponse, CloudRequest, CloudResponse };

struct Event {
    double time = 0.0;
    uint64_t seq = 0;  // insertion order; ties in time resolve by seq
    EventKind kind = EventKind::EpisodeEnd;
    long uid = -1;
    int node = -1;
    Leg leg = Leg::FogRequest;
    int stream = -1;
};

struct JobRef {
    long uid = -1;
    Leg phase = Leg::FogRequest;  // FogRequest or CloudRequest
};

// Single-server FIFO queue of one compute node.
struct NodeQueue {
    int node_id = -1;
    std::deque<JobRef> waiting;
    struct InService {
        JobRef job;
        double end_time = 0.0;
    };
    std::optional<InService> in_service;
    bool start_pending = false;
};

// Waiting jobs only; the job in service is excluded.
long sum_waiting(std::span<const NodeQueue> queues);

struct TrajStep {
    double time = 0.0;
    long uid = -1;
    int cluster = -1;
    int cluster_index = -1;
    Category category = Category::Light;
    int action_node = -1;
    int action_index = -1;
    double reward = 0.0;  // delayed reward delivered at this decision
    long q_census = 0;    // total waiting jobs at this decision instant
};

struct QueueCensus {
    int node_id = -1;
    long waiting = 0;
    bool busy = false;
};

struct EpisodeCounters {
    long generated = 0;
    long fog_arrivals = 0;
    long fog_started = 0;
    long fog_completed = 0;
    long fog_loop_completed = 0;
    long cloud_spawned = 0;
    long cloud_arrivals = 0;
    long cloud_started = 0;
    long cloud_completed = 0;
    long cloud_resp_spawned = 0;
    long cloud_loop_completed = 0;
    long in_transit_req = 0;
    long in_transit_fog_resp = 0;
    long in_transit_cloud_req = 0;
    long in_transit_cloud_resp = 0;
};

struct EpisodeResult {
    std::vector<DelayRecord> records;
    std::vector<TrajStep> trajectory;
    std::vector<QueueCensus> final_census;
    EpisodeCounters counters;
    double episode_return = 0.0;  // sum of rewards delivered to the policy
    long decisions = 0;
};

// Fixed arrival trace used instead of the renewal processes (tests,
// reproduction of exact scenarios).
struct ScriptEntry {
    double time = 0.0;
    int cluster = -1;
    int app_index = 0;
};

// Builds the fog-loop delay record from a completed workload's timestamps.
// The return-path leg is added by the engine when it closes the loop.
DelayRecord record_delays(const Workload& w, const AppSpec& app);

class Engine {
public:
    Engine(const Topology& topo, const std::vector<AppSpec>& apps, const GenConfig& gen,
           PlacementPolicy& policy, double horizon_ms, uint64_t seed);
    Engine(const Topology& topo, const std::vector<AppSpec>& apps, std::vector<ScriptEntry> script,
           PlacementPolicy& policy, double horizon_ms, uint64_t seed);

    EpisodeResult run();

    double now() const { return now_; }
    // Eq-style census: waiting jobs over all fog nodes and the cloud.
    long total_waiting() const { return sum_waiting(queues_); }

private:
    struct WorkloadState {
        Workload wl;
        int app_index = 0;
        int cluster_index = -1;
        double req_latency = 0.0;
        double fog_resp_latency = 0.0;
        FogResultRoute route = FogResultRoute::Done;
        double cloud_req_latency = 0.0;
        double cloud_resp_latency = 0.0;
        std::optional<double> cloud_arrive, cloud_start, cloud_end;
    };

    void init(double horizon_ms);
    void schedule(double time, EventKind kind, long uid, int node, Leg leg, int stream);
    void maybe_start_service(int node);
    NodeQueue& queue_of(int node);
    void on_generate(const Event& ev);
    void on_arrive(const Event& ev);
    void on_service_start(const Event& ev);
    void on_service_end(const Event& ev);
    void on_feedback(const Event& ev);
    PrivilegedView build_privileged() const;
    double service_instr(const JobRef& job) const;

    const Topology& topo_;
    const std::vector<AppSpec>& apps_;
    PlacementPolicy& policy_;
    double horizon_;
    Rng rng_;

    struct GenStream {
        int cluster = -1;
        int cluster_index = -1;
        int app_index = -1;  // -1 = sample from mix
    };
    std::vector<GenStream> streams_;
    GenConfig gen_;
    bool scripted_ = false;

    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    uint64_t next_seq_ = 0;
    double now_ = 0.0;

    std::vector<NodeQueue> queues_;                 // fog nodes then cloud
    std::unordered_map<int, size_t> queue_index_;   // node id -> queues_ index
    std::unordered_map<long, WorkloadState> live_;  // uid -> state
    long next_uid_ = 0;

    bool first_decision_ = true;
    long q_prev_ = 0;
    EpisodeResult result_;
    bool finished_ = false;
};

EpisodeResult run_episode(const Topology& topo, const std::vector<AppSpec>& apps,
                          const GenConfig& gen, PlacementPolicy& policy, double horizon_ms,
                          uint64_t seed);

}  // namespace fogsim
