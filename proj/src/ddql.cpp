#include "fogsim/ddql.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fogsim {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
    data_.reserve(std::min(capacity, size_t{1} << 20));
}

void ReplayBuffer::push(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[write_] = std::move(t);
    }
    write_ = (write_ + 1) % capacity_;
}

const Transition& ReplayBuffer::sample(Rng& rng) const {
    if (data_.empty()) throw std::logic_error("sampling from an empty replay buffer");
    return data_[static_cast<size_t>(rng.uniform_int(static_cast<int>(data_.size())))];
}

TrainSchedule TrainSchedule::paper() { return TrainSchedule{}; }

TrainSchedule TrainSchedule::desk() {
    TrainSchedule s;
    s.total_train_steps = 15000;
    s.capacity = 50000;
    s.prefill = 5000;
    return s;
}

double epsilon(long train_step, const TrainSchedule& sched) {
    if (train_step < 0) throw std::invalid_argument("epsilon: negative training step");
    const long decay_steps =
        static_cast<long>(std::floor(sched.decay_fraction * static_cast<double>(sched.total_train_steps)));
    if (decay_steps <= 0 || train_step >= decay_steps) return sched.eps_end;
    const double f = static_cast<double>(train_step) / static_cast<double>(decay_steps);
    return sched.eps_start + (sched.eps_end - sched.eps_start) * f;
}

namespace {
int argmax_lowest(std::span<const float> values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[static_cast<size_t>(i)] > values[static_cast<size_t>(best)]) best = i;
    return best;
}
}  // namespace

int act(const AgentNets& nets, std::span<const float> state, double eps, Rng& rng) {
    const int n_actions = nets.q_target.output_dim();
    if (eps > 0.0 && rng.uniform() < eps) return rng.uniform_int(n_actions);
    std::vector<float> qv = forward(nets.q_target, state);
    return argmax_lowest(qv);
}

double train_batch(AgentNets& nets, AdamState& adam, const ReplayBuffer& buffer,
                   const TrainSchedule& sched, Rng& rng) {
    if (buffer.size() < static_cast<size_t>(sched.batch))
        throw std::invalid_argument("train_batch: buffer holds fewer transitions than the batch size");
    MlpGrads grads = zero_grads_like(nets.q);
    double loss_sum = 0.0;
    const float inv_batch = 1.0f / static_cast<float>(sched.batch);
    ForwardCache cache;
    for (int k = 0; k < sched.batch; ++k) {
        const Transition& t = buffer.sample(rng);
        std::vector<float> q_next = forward(nets.q, t.next_state);
        const int a_star = argmax_lowest(q_next);
        std::vector<float> q_next_target = forward(nets.q_target, t.next_state);
        const double y = t.reward + sched.gamma * q_next_target[static_cast<size_t>(a_star)];
        const auto& q_now = forward_cached(nets.q, t.state, cache);
        HuberResult h = huber(q_now[static_cast<size_t>(t.action)], y);
        loss_sum += h.loss;
        backward(nets.q, cache, t.action, static_cast<float>(h.dloss_dpred) * inv_batch, grads);
    }
    adam_step(nets.q, adam, grads);
    return loss_sum / sched.batch;
}

DdqlCore::DdqlCore(int input_dim, int n_actions, const AgentConfig& cfg)
    : cfg_(cfg), sched_(cfg.schedule),
      buffer_(static_cast<size_t>(cfg.schedule.capacity)),
      rng_(derive_seed(cfg.seed, 0x41435421ULL)) {
    if (input_dim <= 0 || n_actions <= 0) throw std::invalid_argument("DdqlCore: bad dimensions");
    std::vector<int> sizes;
    sizes.push_back(input_dim);
    for (int h : cfg.hidden) sizes.push_back(h);
    sizes.push_back(n_actions);
    nets_.q = init_mlp(sizes, derive_seed(cfg.seed, 0x4e455453ULL));
    nets_.q_target = nets_.q;
    adam_ = make_adam(nets_.q, cfg.lr);
}

void DdqlCore::sync_target() { nets_.q_target = nets_.q; }

void DdqlCore::load_params(const MlpParams& p) {
    if (!same_shape(p, nets_.q)) throw std::invalid_argument("load_params: architecture mismatch");
    nets_.q = p;
    nets_.q_target = p;
}

int DdqlCore::step(std::span<const float> state, float delayed_reward, AgentPhase phase) {
    if (has_prev_ && phase != AgentPhase::Eval) {
        Transition t;
        t.state = prev_state_;
        t.action = prev_action_;
        t.reward = delayed_reward;
        t.next_state.assign(state.begin(), state.end());
        buffer_.push(std::move(t));
    }
    if (has_prev_) episode_return_ += delayed_reward;

    if (phase == AgentPhase::Train) {
        ++decision_steps_;
        if (decision_steps_ % sched_.train_period == 0 && train_steps_ < sched_.total_train_steps &&
            buffer_.size() >= static_cast<size_t>(sched_.batch)) {
            double loss = train_batch(nets_, adam_, buffer_, sched_, rng_);
            ++train_steps_;
            if (observer_) observer_->on_train_step(decision_steps_, train_steps_, loss, nets_);
        }
        if (decision_steps_ % sched_.target_period == 0) {
            sync_target();
            if (observer_) observer_->on_target_sync(decision_steps_, train_steps_, nets_);
        }
    }

    int action;
    switch (phase) {
        case AgentPhase::Prefill: action = rng_.uniform_int(nets_.q.output_dim()); break;
        case AgentPhase::Train: action = act(nets_, state, epsilon(train_steps_, sched_), rng_); break;
        case AgentPhase::Eval: action = act(nets_, state, 0.0, rng_); break;
        default: throw std::logic_error("bad agent phase");
    }
    prev_state_.assign(state.begin(), state.end());
    prev_action_ = action;
    has_prev_ = true;
    return action;
}

void DdqlCore::end_episode() {
    has_prev_ = false;
    prev_state_.clear();
    last_episode_return_ = episode_return_;
    episode_return_ = 0.0;
}

ParlAgent::ParlAgent(const Topology& topo, int n_categories, const AgentConfig& cfg)
    : n_actions_(static_cast<int>(topo.fog_ids().size())),
      n_clusters_(static_cast<int>(topo.cluster_ids().size())),
      n_categories_(n_categories),
      dist_(n_actions_, n_clusters_, n_categories_) {
    core_ = std::make_unique<DdqlCore>(parl_state_dim(n_actions_, n_clusters_, n_categories_),
                                       n_actions_, cfg);
}

int ParlAgent::decide(const DecisionContext& ctx, double delayed_reward) {
    if (prev_) dist_ = dist_update(dist_, prev_->action, prev_->cluster, prev_->category);
    const int category = static_cast<int>(ctx.app.category);
    std::vector<float> state = encode_parl_state(ctx.cluster_index, category, dist_);
    int action = core_->step(state, static_cast<float>(delayed_reward), phase_);
    prev_ = PrevAssign{action, ctx.cluster_index, category};
    return ctx.fog_node_ids[static_cast<size_t>(action)];
}

void ParlAgent::end_episode() {
    core_->end_episode();
    dist_ = DistTensor(n_actions_, n_clusters_, n_categories_);
    prev_.reset();
}

PlrlAgent::PlrlAgent(const Topology& topo, PlrlFlavor flavor, const AgentConfig& cfg,
                     int queue_capacity)
    : topo_(topo), flavor_(flavor), reward_(flavor), queue_capacity_(queue_capacity),
      n_actions_(static_cast<int>(topo.fog_ids().size())),
      n_clusters_(static_cast<int>(topo.cluster_ids().size())) {
    core_ = std::make_unique<DdqlCore>(plrl_state_dim(n_actions_, n_clusters_), n_actions_, cfg);
}

std::string PlrlAgent::name() const {
    switch (flavor_) {
        case PlrlFlavor::ED: return "plrl-ed";
        case PlrlFlavor::QL: return "plrl-ql";
        case PlrlFlavor::EDQL: return "plrl-edql";
    }
    throw std::logic_error("bad plrl flavor");
}

int PlrlAgent::decide(const DecisionContext& ctx, double) {
    if (ctx.privileged == nullptr) throw std::logic_error("plrl agent needs the privileged view");
    const auto& fog = ctx.privileged->fog;
    std::vector<int> queue_lengths;
    queue_lengths.reserve(fog.size());
    for (const PrivilegedNodeInfo& f : fog) queue_lengths.push_back(f.waiting);
    std::vector<float> state = encode_plrl_state(ctx.cluster_index, n_clusters_, queue_lengths);

    float r = 0.0f;
    if (prev_)
        r = static_cast<float>(
            reward_(prev_->exec_delay_ms, queue_lengths[static_cast<size_t>(prev_->action)],
                    prev_->overflow));
    int action = core_->step(state, r, phase_);

    // Execution-delay estimate of this assignment, scored at the next decision.
    const long bytes = std::lround(ctx.app.req_bytes);
    auto key = std::make_pair(ctx.workload.source_cluster, bytes);
    auto it = latency_cache_.find(key);
    if (it == latency_cache_.end()) {
        std::vector<double> lats;
        lats.reserve(ctx.fog_node_ids.size());
        for (int f : ctx.fog_node_ids)
            lats.push_back(fastest_path(topo_, ctx.workload.source_cluster, f, ctx.app.req_bytes).latency_ms);
        it = latency_cache_.emplace(key, std::move(lats)).first;
    }
    const PrivilegedNodeInfo& chosen = fog[static_cast<size_t>(action)];
    double ed = it->second[static_cast<size_t>(action)] +
                (chosen.backlog_instr + ctx.app.fog_instr) / chosen.ipt;
    bool overflow = queue_capacity_ > 0 && chosen.waiting >= queue_capacity_;
    prev_ = PrevAssign{action, ed, overflow};
    return ctx.fog_node_ids[static_cast<size_t>(action)];
}

void PlrlAgent::end_episode() {
    core_->end_episode();
    reward_.end_episode();
    prev_.reset();
}

TrainingResult run_training(const Topology& topo, const std::vector<AppSpec>& apps,
                            const GenConfig& gen, RlAgent& agent, double horizon_ms,
                            uint64_t seed, TrainingObserver* observer) {
    TrainingResult result;
    DdqlCore& core = agent.core();
    core.set_observer(observer);
    const TrainSchedule& sched = core.schedule();

    const long max_episodes = 1000000;
    agent.set_phase(AgentPhase::Prefill);
    while (core.buffer().size() < static_cast<size_t>(sched.prefill)) {
        if (result.prefill_episodes >= max_episodes)
            throw std::runtime_error("run_training: prefill makes no progress");
        run_episode(topo, apps, gen, agent,
                    horizon_ms, derive_seed(seed, 0x50524546ULL + static_cast<uint64_t>(result.prefill_episodes)));
        ++result.prefill_episodes;
    }

    agent.set_phase(AgentPhase::Train);
    std::vector<double> returns;
    while (core.train_steps() < sched.total_train_steps) {
        if (result.train_episodes >= max_episodes)
            throw std::runtime_error("run_training: training makes no progress");
        long before = core.decision_steps();
        run_episode(topo, apps, gen, agent,
                    horizon_ms, derive_seed(seed, 0x45500000ULL + static_cast<uint64_t>(result.train_episodes)));
        ++result.train_episodes;
        if (core.decision_steps() == before)
            throw std::runtime_error("run_training: episode produced no decisions");
        returns.push_back(core.last_episode_return());
        result.curve.push_back({result.train_episodes, core.last_episode_return(),
                                moving_average_last(returns, 10)});
    }

    core.sync_target();
    core.set_observer(nullptr);
    result.train_steps = core.train_steps();
    return result;
}

EpisodeResult evaluate(const Topology& topo, const std::vector<AppSpec>& apps, const GenConfig& gen,
                       RlAgent& agent, double horizon_ms, uint64_t seed) {
    agent.set_phase(AgentPhase::Eval);
    return run_episode(topo, apps, gen, agent, horizon_ms, seed);
}

void save_agent(const std::string& path, const RlAgent& agent, uint64_t seed) {
    const DdqlCore& core = agent.core();
    CheckpointMeta meta;
    meta.agent = agent.name();
    meta.n_actions = core.nets().q.output_dim();
    meta.n_clusters = agent.n_clusters();
    meta.n_categories = agent.n_categories();
    meta.train_steps = core.train_steps();
    meta.seed = seed;
    save_checkpoint(path, core.nets().q, meta);
}

std::unique_ptr<RlAgent> load_agent(const std::string& path, const Topology& topo,
                                    const AgentConfig& cfg) {
    Checkpoint ck = load_checkpoint(path);
    AgentConfig agent_cfg = cfg;
    agent_cfg.hidden.assign(ck.params.sizes.begin() + 1, ck.params.sizes.end() - 1);
    std::unique_ptr<RlAgent> agent;
    if (ck.meta.agent == "ddql") {
        agent = std::make_unique<ParlAgent>(topo, 3, agent_cfg);
    } else if (ck.meta.agent == "plrl-ed") {
        agent = std::make_unique<PlrlAgent>(topo, PlrlFlavor::ED, agent_cfg);
    } else if (ck.meta.agent == "plrl-ql") {
        agent = std::make_unique<PlrlAgent>(topo, PlrlFlavor::QL, agent_cfg);
    } else if (ck.meta.agent == "plrl-edql") {
        agent = std::make_unique<PlrlAgent>(topo, PlrlFlavor::EDQL, agent_cfg);
    } else {
        throw std::runtime_error("checkpoint holds unknown agent kind: " + ck.meta.agent);
    }
    agent->core().load_params(ck.params);
    agent->set_phase(AgentPhase::Eval);
    return agent;
}

}  // namespace fogsim
