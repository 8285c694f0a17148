#include "fogsim/des.hpp"

#include <algorithm>
#include <stdexcept>

namespace fogsim {

long sum_waiting(std::span<const NodeQueue> queues) {
    long total = 0;
    for (const NodeQueue& q : queues) total += static_cast<long>(q.waiting.size());
    return total;
}

DelayRecord record_delays(const Workload& w, const AppSpec& app) {
    if (!w.ts.emit || !w.ts.arrive || !w.ts.service_start || !w.ts.service_end)
        throw std::invalid_argument("record_delays: workload is missing timestamps");
    if (!w.assigned_node) throw std::invalid_argument("record_delays: workload was never assigned");
    DelayRecord r;
    r.uid = w.uid;
    r.app_id = w.app_id;
    r.category = app.category;
    r.cluster = w.source_cluster;
    r.node = *w.assigned_node;
    r.loop = Loop::FogLoop;
    r.latency_ms = *w.ts.arrive - *w.ts.emit;
    r.waiting_ms = *w.ts.service_start - *w.ts.arrive;
    r.service_ms = *w.ts.service_end - *w.ts.service_start;
    r.response_ms = r.waiting_ms + r.service_ms;
    r.total_response_ms = r.latency_ms + r.response_ms;
    return r;
}

Engine::Engine(const Topology& topo, const std::vector<AppSpec>& apps, const GenConfig& gen,
               PlacementPolicy& policy, double horizon_ms, uint64_t seed)
    : topo_(topo), apps_(apps), policy_(policy), horizon_(horizon_ms),
      rng_(derive_seed(seed, 0x454e474eULL)), gen_(gen) {
    if (gen_.beta <= 0.0) throw std::invalid_argument("gen config: beta must be positive");
    if (!gen_.app_mix.empty()) {
        if (gen_.app_mix.size() != apps_.size())
            throw std::invalid_argument("gen config: app mix size must match app count");
        double sum = 0.0;
        for (double p : gen_.app_mix) {
            if (p < 0.0) throw std::invalid_argument("gen config: app mix entries must be non-negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("gen config: app mix must sum to 1");
    }
    init(horizon_ms);

    // One renewal stream per (cluster, app); with an explicit mix, one stream
    // per cluster sampling the app on each arrival.
    const auto& clusters = topo_.cluster_ids();
    for (size_t ci = 0; ci < clusters.size(); ++ci) {
        if (gen_.app_mix.empty()) {
            for (size_t ai = 0; ai < apps_.size(); ++ai)
                streams_.push_back({clusters[ci], static_cast<int>(ci), static_cast<int>(ai)});
        } else {
            streams_.push_back({clusters[ci], static_cast<int>(ci), -1});
        }
    }
    for (size_t s = 0; s < streams_.size(); ++s)
        schedule(next_interarrival(rng_, gen_.beta), EventKind::Generate, -1, -1, Leg::FogRequest,
                 static_cast<int>(s));
}

Engine::Engine(const Topology& topo, const std::vector<AppSpec>& apps, std::vector<ScriptEntry> script,
               PlacementPolicy& policy, double horizon_ms, uint64_t seed)
    : topo_(topo), apps_(apps), policy_(policy), horizon_(horizon_ms),
      rng_(derive_seed(seed, 0x454e474eULL)), scripted_(true) {
    init(horizon_ms);
    const auto& clusters = topo_.cluster_ids();
    for (const ScriptEntry& e : script) {
        auto it = std::find(clusters.begin(), clusters.end(), e.cluster);
        if (it == clusters.end()) throw std::invalid_argument("script entry: unknown cluster node");
        if (e.app_index < 0 || e.app_index >= static_cast<int>(apps_.size()))
            throw std::invalid_argument("script entry: app index out of range");
        if (e.time < 0.0) throw std::invalid_argument("script entry: negative time");
        streams_.push_back({e.cluster, static_cast<int>(it - clusters.begin()), e.app_index});
        schedule(e.time, EventKind::Generate, -1, -1, Leg::FogRequest,
                 static_cast<int>(streams_.size()) - 1);
    }
}

void Engine::init(double horizon_ms) {
    if (horizon_ms < 0.0) throw std::invalid_argument("horizon must be non-negative");
    if (apps_.empty()) throw std::invalid_argument("app list is empty");
    for (int f : topo_.fog_ids()) {
        queue_index_[f] = queues_.size();
        queues_.push_back(NodeQueue{f, {}, std::nullopt, false});
    }
    queue_index_[topo_.cloud_id()] = queues_.size();
    queues_.push_back(NodeQueue{topo_.cloud_id(), {}, std::nullopt, false});
    // Scheduled first so it wins the tie against any event at exactly the
    // horizon instant.
    schedule(horizon_, EventKind::EpisodeEnd, -1, -1, Leg::FogRequest, -1);
}

void Engine::schedule(double time, EventKind kind, long uid, int node, Leg leg, int stream) {
    Event ev;
    ev.time = time;
    ev.seq = next_seq_++;
    ev.kind = kind;
    ev.uid = uid;
    ev.node = node;
    ev.leg = leg;
    ev.stream = stream;
    events_.push(ev);
}

NodeQueue& Engine::queue_of(int node) {
    auto it = queue_index_.find(node);
    if (it == queue_index_.end()) throw std::logic_error("no queue for node");
    return queues_[it->second];
}

double Engine::service_instr(const JobRef& job) const {
    const AppSpec& app = apps_[static_cast<size_t>(live_.at(job.uid).app_index)];
    return job.phase == Leg::FogRequest ? app.fog_instr : app.cloud_instr;
}

void Engine::maybe_start_service(int node) {
    NodeQueue& q = queue_of(node);
    if (!q.in_service && !q.start_pending && !q.waiting.empty()) {
        q.start_pending = true;
        schedule(now_, EventKind::ServiceStart, -1, node, Leg::FogRequest, -1);
    }
}

PrivilegedView Engine::build_privileged() const {
    PrivilegedView view;
    view.fog.reserve(topo_.fog_ids().size());
    for (int f : topo_.fog_ids()) {
        const NodeQueue& q = queues_[queue_index_.at(f)];
        PrivilegedNodeInfo info;
        info.node_id = f;
        info.waiting = static_cast<int>(q.waiting.size());
        info.ipt = topo_.node(f).ipt;
        double backlog = 0.0;
        for (const JobRef& j : q.waiting) backlog += service_instr(j);
        if (q.in_service) backlog += (q.in_service->end_time - now_) * info.ipt;
        info.backlog_instr = backlog;
        view.fog.push_back(info);
    }
    return view;
}

void Engine::on_generate(const Event& ev) {
    const GenStream& stream = streams_[static_cast<size_t>(ev.stream)];
    if (!scripted_)
        schedule(now_ + next_interarrival(rng_, gen_.beta), EventKind::Generate, -1, -1,
                 Leg::FogRequest, ev.stream);

    int app_index = stream.app_index;
    if (app_index < 0) {
        double u = rng_.uniform();
        double acc = 0.0;
        app_index = static_cast<int>(apps_.size()) - 1;
        for (size_t i = 0; i < gen_.app_mix.size(); ++i) {
            acc += gen_.app_mix[i];
            if (u < acc) {
                app_index = static_cast<int>(i);
                break;
            }
        }
    }
    const AppSpec& app = apps_[static_cast<size_t>(app_index)];

    WorkloadState st;
    st.app_index = app_index;
    st.cluster_index = stream.cluster_index;
    st.wl.uid = next_uid_++;
    st.wl.app_id = app.id;
    st.wl.source_cluster = stream.cluster;
    st.wl.created_at = now_;
    st.wl.ts.emit = now_;
    ++result_.counters.generated;

    // Decision step: the policy observes the delayed reward for its previous
    // action together with the current workload, then places it.
    long q_now = total_waiting();
    double reward = first_decision_ ? 0.0 : static_cast<double>(q_prev_ - q_now);
    PrivilegedView view;
    DecisionContext ctx{st.wl, app, st.cluster_index, topo_.fog_ids(), now_, nullptr};
    if (policy_.needs_privileged()) {
        view = build_privileged();
        ctx.privileged = &view;
    }
    int chosen = policy_.decide(ctx, reward);
    const auto& fogs = topo_.fog_ids();
    auto fit = std::find(fogs.begin(), fogs.end(), chosen);
    if (fit == fogs.end())
        throw std::runtime_error("policy returned node " + std::to_string(chosen) +
                                 ", which is not a fog node");

    TrajStep step;
    step.time = now_;
    step.uid = st.wl.uid;
    step.cluster = st.wl.source_cluster;
    step.cluster_index = st.cluster_index;
    step.category = app.category;
    step.action_node = chosen;
    step.action_index = static_cast<int>(fit - fogs.begin());
    step.reward = reward;
    step.q_census = q_now;
    result_.trajectory.push_back(step);
    result_.episode_return += reward;
    ++result_.decisions;
    q_prev_ = q_now;
    first_decision_ = false;

    st.wl.assigned_node = chosen;
    st.req_latency = topo_.transit_ms(st.wl.source_cluster, chosen, app.req_bytes);
    const long uid = st.wl.uid;
    const double req_latency = st.req_latency;
    live_.emplace(uid, std::move(st));
    ++result_.counters.in_transit_req;
    schedule(now_ + req_latency, EventKind::Arrive, uid, chosen, Leg::FogRequest, -1);
}

void Engine::on_arrive(const Event& ev) {
    WorkloadState& st = live_.at(ev.uid);
    if (ev.leg == Leg::FogRequest) {
        --result_.counters.in_transit_req;
        ++result_.counters.fog_arrivals;
        st.wl.ts.arrive = now_;
        queue_of(ev.node).waiting.push_back({ev.uid, Leg::FogRequest});
    } else {
        --result_.counters.in_transit_cloud_req;
        ++result_.counters.cloud_arrivals;
        st.cloud_arrive = now_;
        queue_of(ev.node).waiting.push_back({ev.uid, Leg::CloudRequest});
    }
    maybe_start_service(ev.node);
}

void Engine::on_service_start(const Event& ev) {
    NodeQueue& q = queue_of(ev.node);
    q.start_pending = false;
    if (q.in_service || q.waiting.empty()) return;  // stale wakeup
    JobRef job = q.waiting.front();
    q.waiting.pop_front();
    double duration = service_instr(job) / topo_.node(ev.node).ipt;
    q.in_service = NodeQueue::InService{job, now_ + duration};
    WorkloadState& st = live_.at(job.uid);
    if (job.phase == Leg::FogRequest) {
        st.wl.ts.service_start = now_;
        ++result_.counters.fog_started;
    } else {
        st.cloud_start = now_;
        ++result_.counters.cloud_started;
    }
    schedule(now_ + duration, EventKind::ServiceEnd, job.uid, ev.node, job.phase, -1);
}

void Engine::on_service_end(const Event& ev) {
    NodeQueue& q = queue_of(ev.node);
    if (!q.in_service || q.in_service->job.uid != ev.uid)
        throw std::logic_error("service end does not match the job in service");
    JobRef job = q.in_service->job;
    q.in_service.reset();
    maybe_start_service(ev.node);

    WorkloadState& st = live_.at(ev.uid);
    const AppSpec& app = apps_[static_cast<size_t>(st.app_index)];
    if (job.phase == Leg::FogRequest) {
        ++result_.counters.fog_completed;
        st.wl.ts.service_end = now_;
        st.fog_resp_latency = topo_.transit_ms(ev.node, st.wl.source_cluster, app.fog_resp_bytes);
        ++result_.counters.in_transit_fog_resp;
        schedule(now_ + st.fog_resp_latency, EventKind::FeedbackArrive, ev.uid,
                 st.wl.source_cluster, Leg::FogResponse, -1);

        st.route = route_fog_result(rng_, app);
        if (st.route != FogResultRoute::Done) {
            ++result_.counters.cloud_spawned;
            ++result_.counters.in_transit_cloud_req;
            st.cloud_req_latency = topo_.transit_ms(ev.node, topo_.cloud_id(), app.cloud_agg_bytes);
            schedule(now_ + st.cloud_req_latency, EventKind::Arrive, ev.uid, topo_.cloud_id(),
                     Leg::CloudRequest, -1);
        }
    } else {
        ++result_.counters.cloud_completed;
        st.cloud_end = now_;
        if (st.route == FogResultRoute::ToCloudThenFeedback) {
            ++result_.counters.cloud_resp_spawned;
            ++result_.counters.in_transit_cloud_resp;
            st.cloud_resp_latency =
                topo_.transit_ms(ev.node, st.wl.source_cluster, app.cloud_resp_bytes);
            schedule(now_ + st.cloud_resp_latency, EventKind::FeedbackArrive, ev.uid,
                     st.wl.source_cluster, Leg::CloudResponse, -1);
        } else {
            // Aggregation without feedback: the cloud loop closes here.
            ++result_.counters.cloud_loop_completed;
            DelayRecord r = record_delays(st.wl, app);
            r.loop = Loop::CloudLoop;
            r.latency_ms = st.req_latency + st.cloud_req_latency;
            r.waiting_ms += *st.cloud_start - *st.cloud_arrive;
            r.service_ms += *st.cloud_end - *st.cloud_start;
            r.response_ms = r.waiting_ms + r.service_ms;
            r.total_response_ms = r.latency_ms + r.response_ms;
            result_.records.push_back(r);
        }
    }
}

void Engine::on_feedback(const Event& ev) {
    WorkloadState& st = live_.at(ev.uid);
    const AppSpec& app = apps_[static_cast<size_t>(st.app_index)];
    if (ev.leg == Leg::FogResponse) {
        --result_.counters.in_transit_fog_resp;
        ++result_.counters.fog_loop_completed;
        st.wl.ts.feedback_arrive = now_;
        DelayRecord r = record_delays(st.wl, app);
        r.latency_ms += st.fog_resp_latency;
        r.total_response_ms += st.fog_resp_latency;
        result_.records.push_back(r);
    } else {
        --result_.counters.in_transit_cloud_resp;
        ++result_.counters.cloud_loop_completed;
        DelayRecord r = record_delays(st.wl, app);
        r.loop = Loop::CloudLoop;
        r.latency_ms = st.req_latency + st.cloud_req_latency + st.cloud_resp_latency;
        r.waiting_ms += *st.cloud_start - *st.cloud_arrive;
        r.service_ms += *st.cloud_end - *st.cloud_start;
        r.response_ms = r.waiting_ms + r.service_ms;
        r.total_response_ms = r.latency_ms + r.response_ms;
        result_.records.push_back(r);
    }
}

EpisodeResult Engine::run() {
    if (finished_) throw std::logic_error("engine already ran");
    finished_ = true;
    while (!events_.empty()) {
        Event ev = events_.top();
        events_.pop();
        if (ev.time < now_) throw std::logic_error("event scheduled in the past");
        now_ = ev.time;
        if (ev.kind == EventKind::EpisodeEnd) break;
        switch (ev.kind) {
            case EventKind::Generate: on_generate(ev); break;
            case EventKind::Arrive: on_arrive(ev); break;
            case EventKind::ServiceStart: on_service_start(ev); break;
            case EventKind::ServiceEnd: on_service_end(ev); break;
            case EventKind::FeedbackArrive: on_feedback(ev); break;
            case EventKind::EpisodeEnd: break;
        }
    }
    policy_.end_episode();
    for (const NodeQueue& q : queues_)
        result_.final_census.push_back(
            {q.node_id, static_cast<long>(q.waiting.size()), q.in_service.has_value()});
    return std::move(result_);
}

EpisodeResult run_episode(const Topology& topo, const std::vector<AppSpec>& apps,
                          const GenConfig& gen, PlacementPolicy& policy, double horizon_ms,
                          uint64_t seed) {
    Engine engine(topo, apps, gen, policy, horizon_ms, seed);
    return engine.run();
}

}  // namespace fogsim
