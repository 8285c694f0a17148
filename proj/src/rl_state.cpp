#include "fogsim/rl_state.hpp"

#include <numeric>
#include <stdexcept>

namespace fogsim {

DistTensor::DistTensor(int n_actions, int n_clusters, int n_categories)
    : a_(n_actions), c_(n_clusters), w_(n_categories) {
    if (n_actions <= 0 || n_clusters <= 0 || n_categories <= 0)
        throw std::invalid_argument("DistTensor: dimensions must be positive");
    values_.assign(static_cast<size_t>(a_) * c_ * w_, 0.0);
}

size_t DistTensor::index(int a, int c, int w) const {
    if (a < 0 || a >= a_ || c < 0 || c >= c_ || w < 0 || w >= w_)
        throw std::out_of_range("DistTensor index out of range");
    return (static_cast<size_t>(a) * c_ + c) * w_ + w;
}

double DistTensor::at(int a, int c, int w) const { return values_[index(a, c, w)]; }

double DistTensor::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

DistTensor dist_update(const DistTensor& d, int a, int c, int w) {
    DistTensor out = d;
    out.values_[out.index(a, c, w)] += 1.0;
    // Renormalize against the true total to keep drift out.
    double total = out.sum();
    for (double& v : out.values_) v /= total;
    return out;
}

int parl_state_dim(int n_actions, int n_clusters, int n_categories) {
    return n_clusters + n_categories + n_actions * n_clusters * n_categories;
}

std::vector<float> encode_parl_state(int cluster_index, int category_index, const DistTensor& d) {
    if (cluster_index < 0 || cluster_index >= d.n_clusters())
        throw std::out_of_range("encode_parl_state: cluster index out of range");
    if (category_index < 0 || category_index >= d.n_categories())
        throw std::out_of_range("encode_parl_state: category index out of range");
    std::vector<float> s;
    s.reserve(static_cast<size_t>(parl_state_dim(d.n_actions(), d.n_clusters(), d.n_categories())));
    for (int c = 0; c < d.n_clusters(); ++c) s.push_back(c == cluster_index ? 1.0f : 0.0f);
    for (int w = 0; w < d.n_categories(); ++w) s.push_back(w == category_index ? 1.0f : 0.0f);
    for (double v : d.flat()) s.push_back(static_cast<float>(v));
    return s;
}

int plrl_state_dim(int n_actions, int n_clusters) { return n_clusters + n_actions; }

std::vector<float> encode_plrl_state(int cluster_index, int n_clusters,
                                     const std::vector<int>& queue_lengths) {
    if (cluster_index < 0 || cluster_index >= n_clusters)
        throw std::out_of_range("encode_plrl_state: cluster index out of range");
    std::vector<float> s;
    s.reserve(static_cast<size_t>(n_clusters) + queue_lengths.size());
    for (int c = 0; c < n_clusters; ++c) s.push_back(c == cluster_index ? 1.0f : 0.0f);
    for (int q : queue_lengths) {
        if (q < 0) throw std::invalid_argument("encode_plrl_state: negative queue length");
        s.push_back(static_cast<float>(q));
    }
    return s;
}

double parl_reward(long prev_total_waiting, long curr_total_waiting) {
    if (prev_total_waiting < 0 || curr_total_waiting < 0)
        throw std::invalid_argument("parl_reward: queue totals must be non-negative");
    return static_cast<double>(prev_total_waiting - curr_total_waiting);
}

void PlrlReward::MinMax::observe(double v) {
    if (!seen) {
        lo = hi = v;
        seen = true;
    } else {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
}

double PlrlReward::MinMax::normalize(double v) const {
    if (!seen || hi == lo) return 0.0;
    return (v - lo) / (hi - lo);
}

double PlrlReward::operator()(double exec_delay_ms, long queue_len, bool overflow) {
    if (exec_delay_ms < 0.0) throw std::invalid_argument("plrl reward: negative execution delay");
    if (queue_len < 0) throw std::invalid_argument("plrl reward: negative queue length");
    switch (flavor_) {
        case PlrlFlavor::ED: return -exec_delay_ms;
        case PlrlFlavor::QL: return -static_cast<double>(queue_len);
        case PlrlFlavor::EDQL: {
            ed_.observe(exec_delay_ms);
            ql_.observe(static_cast<double>(queue_len));
            double r = -(ed_.normalize(exec_delay_ms) + ql_.normalize(static_cast<double>(queue_len)));
            if (overflow) r -= overflow_penalty_;
            return r;
        }
    }
    throw std::logic_error("plrl reward: bad flavor");
}

void PlrlReward::end_episode() {
    ed_ = MinMax{};
    ql_ = MinMax{};
}

}  // namespace fogsim
