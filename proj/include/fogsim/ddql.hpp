// Double deep Q-learning agent: replay buffer, schedules, the decision-step
// learning loop, and the privacy-aware / privacy-lacking policy adapters.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fogsim/des.hpp"
#include "fogsim/nn.hpp"
#include "fogsim/policy.hpp"
#include "fogsim/rl_state.hpp"
#include "fogsim/rng.hpp"

namespace fogsim {

struct Transition {
    std::vector<float> state;
    int action = 0;
    float reward = 0.0f;
    std::vector<float> next_state;
};

// Ring buffer with FIFO eviction and uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity);
    void push(Transition t);
    const Transition& sample(Rng& rng) const;
    size_t size() const { return data_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition& at(size_t i) const { return data_[i]; }

private:
    size_t capacity_;
    size_t write_ = 0;
    std::vector<Transition> data_;
};

struct TrainSchedule {
    long total_train_steps = 150000;
    double decay_fraction = 0.75;
    double eps_start = 1.0;
    double eps_end = 0.01;
    int train_period = 4;      // decision steps per training step
    int target_period = 2000;  // decision steps per target sync
    int batch = 50;
    double gamma = 0.99;
    long capacity = 1000000;
    long prefill = 100000;  // 10% of capacity

    static TrainSchedule paper();
    // 1:10 scale for desk runs: capacity 50k, prefill 5k, 15k training steps.
    static TrainSchedule desk();
};

// Linear decay from eps_start to eps_end over the first decay_fraction of the
// training steps, constant afterwards.
double epsilon(long train_step, const TrainSchedule& sched);

// Online network learns; the target copy selects actions during interaction.
struct AgentNets {
    MlpParams q;
    MlpParams q_target;
};

// Epsilon-greedy over forward(q_target, state); ties go to the lowest action
// index. eps == 0 consumes no randomness.
int act(const AgentNets& nets, std::span<const float> state, double eps, Rng& rng);

// One uniform mini-batch update of the online network with the double-Q
// target y = r + gamma * Q_target(s', argmax_a Q(s', a)). Returns mean loss.
double train_batch(AgentNets& nets, AdamState& adam, const ReplayBuffer& buffer,
                   const TrainSchedule& sched, Rng& rng);

enum class AgentPhase { Prefill, Train, Eval };

struct TrainingObserver {
    virtual ~TrainingObserver() = default;
    virtual void on_train_step(long decision_steps, long train_steps, double loss,
                               const AgentNets& nets) {
        (void)decision_steps, (void)train_steps, (void)loss, (void)nets;
    }
    virtual void on_target_sync(long decision_steps, long train_steps, const AgentNets& nets) {
        (void)decision_steps, (void)train_steps, (void)nets;
    }
};

struct AgentConfig {
    std::vector<int> hidden{256, 128, 64};
    float lr = 2.5e-4f;
    TrainSchedule schedule = TrainSchedule::paper();
    uint64_t seed = 1;
};

// State-representation-agnostic decision-step loop shared by the agents:
// store the delayed-reward transition, train and sync on schedule, pick the
// next action.
class DdqlCore {
public:
    DdqlCore(int input_dim, int n_actions, const AgentConfig& cfg);

    int step(std::span<const float> state, float delayed_reward, AgentPhase phase);
    void end_episode();

    const AgentNets& nets() const { return nets_; }
    AgentNets& nets() { return nets_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const TrainSchedule& schedule() const { return sched_; }
    long train_steps() const { return train_steps_; }
    long decision_steps() const { return decision_steps_; }
    double last_episode_return() const { return last_episode_return_; }
    void sync_target();
    void set_observer(TrainingObserver* obs) { observer_ = obs; }
    void load_params(const MlpParams& p);

private:
    AgentConfig cfg_;
    TrainSchedule sched_;
    AgentNets nets_;
    AdamState adam_;
    ReplayBuffer buffer_;
    Rng rng_;
    TrainingObserver* observer_ = nullptr;

    long decision_steps_ = 0;
    long train_steps_ = 0;
    bool has_prev_ = false;
    std::vector<float> prev_state_;
    int prev_action_ = 0;
    double episode_return_ = 0.0;
    double last_episode_return_ = 0.0;
};

// Common surface of the trainable placement policies.
class RlAgent : public PlacementPolicy {
public:
    virtual DdqlCore& core() = 0;
    virtual const DdqlCore& core() const = 0;
    virtual int n_clusters() const = 0;
    virtual int n_categories() const = 0;
    void set_phase(AgentPhase phase) { phase_ = phase; }
    AgentPhase phase() const { return phase_; }

protected:
    AgentPhase phase_ = AgentPhase::Train;
};

// Privacy-aware agent: sees only the workload descriptor and its own
// assignment history (vanishing-normalized), rewarded by the queue-total
// decrease the engine reports.
class ParlAgent final : public RlAgent {
public:
    ParlAgent(const Topology& topo, int n_categories, const AgentConfig& cfg);

    int decide(const DecisionContext& ctx, double delayed_reward) override;
    void end_episode() override;
    std::string name() const override { return "ddql"; }
    DdqlCore& core() override { return *core_; }
    const DdqlCore& core() const override { return *core_; }
    int n_clusters() const override { return n_clusters_; }
    int n_categories() const override { return n_categories_; }
    const DistTensor& dist() const { return dist_; }

private:
    int n_actions_, n_clusters_, n_categories_;
    std::unique_ptr<DdqlCore> core_;
    DistTensor dist_;
    struct PrevAssign {
        int action = 0;
        int cluster = 0;
        int category = 0;
    };
    std::optional<PrevAssign> prev_;
};

// Privacy-lacking ablations: per-fog queue lengths in the state, reward from
// execution-delay / queue-length terms computed with privileged information.
class PlrlAgent final : public RlAgent {
public:
    PlrlAgent(const Topology& topo, PlrlFlavor flavor, const AgentConfig& cfg,
              int queue_capacity = 20);

    int decide(const DecisionContext& ctx, double delayed_reward) override;
    void end_episode() override;
    bool needs_privileged() const override { return true; }
    std::string name() const override;
    DdqlCore& core() override { return *core_; }
    const DdqlCore& core() const override { return *core_; }
    int n_clusters() const override { return n_clusters_; }
    int n_categories() const override { return 0; }

private:
    const Topology& topo_;
    PlrlFlavor flavor_;
    PlrlReward reward_;
    int queue_capacity_;
    int n_actions_, n_clusters_;
    std::unique_ptr<DdqlCore> core_;
    std::map<std::pair<int, long>, std::vector<double>> latency_cache_;
    struct PrevAssign {
        int action = 0;
        double exec_delay_ms = 0.0;
        bool overflow = false;
    };
    std::optional<PrevAssign> prev_;
};

struct TrainingCurvePoint {
    long episode = 0;
    double episode_return = 0.0;
    double ma10 = 0.0;  // mean return over the last 10 episodes
};

struct TrainingResult {
    std::vector<TrainingCurvePoint> curve;
    long prefill_episodes = 0;
    long train_episodes = 0;
    long train_steps = 0;
};

// Phase 1 fills the buffer with random-policy episodes, phase 2 trains on
// fixed-horizon episodes until the schedule's training steps are spent. Ends
// with a final target sync so checkpoints and in-memory evaluation agree.
TrainingResult run_training(const Topology& topo, const std::vector<AppSpec>& apps,
                            const GenConfig& gen, RlAgent& agent, double horizon_ms,
                            uint64_t seed, TrainingObserver* observer = nullptr);

EpisodeResult evaluate(const Topology& topo, const std::vector<AppSpec>& apps,
                       const GenConfig& gen, RlAgent& agent, double horizon_ms, uint64_t seed);

void save_agent(const std::string& path, const RlAgent& agent, uint64_t seed);

// Rebuilds an agent from a checkpoint; both networks start from the saved
// parameters.
std::unique_ptr<RlAgent> load_agent(const std::string& path, const Topology& topo,
                                    const AgentConfig& cfg);

}  // namespace fogsim
