#include "fogsim/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fogsim {

int RandomPolicy::decide(const DecisionContext& ctx, double) {
    const auto& ids = ctx.fog_node_ids;
    if (ids.empty()) throw std::invalid_argument("no fog nodes to choose from");
    return ids[static_cast<size_t>(rng_.uniform_int(static_cast<int>(ids.size())))];
}

int RoundRobinPolicy::decide(const DecisionContext& ctx, double) {
    const auto& ids = ctx.fog_node_ids;
    if (ids.empty()) throw std::invalid_argument("no fog nodes to choose from");
    int chosen = ids[next_ % ids.size()];
    ++next_;
    return chosen;
}

int NearestPolicy::decide(const DecisionContext& ctx, double) {
    const long bytes = std::lround(ctx.app.req_bytes);
    auto key = std::make_pair(ctx.workload.source_cluster, bytes);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    int best = -1;
    double best_lat = std::numeric_limits<double>::infinity();
    for (int f : ctx.fog_node_ids) {
        double lat = fastest_path(topo_, ctx.workload.source_cluster, f, ctx.app.req_bytes).latency_ms;
        if (lat < best_lat) {
            best_lat = lat;
            best = f;
        }
    }
    cache_[key] = best;
    return best;
}

double FastestPolicy::estimate_ms(double path_latency_ms, double backlog_instr, double fog_instr,
                                  double ipt, bool include_backlog) {
    double est = path_latency_ms + fog_instr / ipt;
    if (include_backlog) est += backlog_instr / ipt;
    return est;
}

int FastestPolicy::decide(const DecisionContext& ctx, double) {
    if (ctx.privileged == nullptr) throw std::logic_error("fastest policy needs the privileged view");
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
    const auto& lats = it->second;

    int best = -1;
    double best_est = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ctx.fog_node_ids.size(); ++i) {
        const PrivilegedNodeInfo& info = ctx.privileged->fog[i];
        double est = estimate_ms(lats[i], info.backlog_instr, ctx.app.fog_instr, info.ipt, include_backlog_);
        if (est < best_est) {
            best_est = est;
            best = ctx.fog_node_ids[i];
        }
    }
    return best;
}

int ElectrePolicy::decide(const DecisionContext&, double) {
    throw std::runtime_error("electre policy is not implemented in this artifact");
}

}  // namespace fogsim
