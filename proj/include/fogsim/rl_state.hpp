// Privacy-aware state and reward construction: the vanishing-normalized load
// distribution tensor, the state encoders, and both reward families.
#pragma once

#include <cstddef>
#include <vector>

namespace fogsim {

// 3-D distribution of recent assignments over actions x clusters x workload
// categories. Starts all-zero; each update adds one to a cell and
// renormalizes, so the weight of an assignment halves with every later
// decision. Updates are pure: they return the new tensor.
class DistTensor {
public:
    DistTensor(int n_actions, int n_clusters, int n_categories);

    int n_actions() const { return a_; }
    int n_clusters() const { return c_; }
    int n_categories() const { return w_; }
    double at(int a, int c, int w) const;
    // Row-major (action, then cluster, then category).
    const std::vector<double>& flat() const { return values_; }
    double sum() const;

private:
    friend DistTensor dist_update(const DistTensor& d, int a, int c, int w);
    size_t index(int a, int c, int w) const;
    int a_, c_, w_;
    std::vector<double> values_;
};

DistTensor dist_update(const DistTensor& d, int a, int c, int w);

// One-hot cluster and category blocks followed by the flattened distribution.
std::vector<float> encode_parl_state(int cluster_index, int category_index, const DistTensor& d);
int parl_state_dim(int n_actions, int n_clusters, int n_categories);

// One-hot source cluster followed by raw per-fog waiting counts.
std::vector<float> encode_plrl_state(int cluster_index, int n_clusters,
                                     const std::vector<int>& queue_lengths);
int plrl_state_dim(int n_actions, int n_clusters);

// Decrease in the total number of queued jobs since the previous decision.
double parl_reward(long prev_total_waiting, long curr_total_waiting);

enum class PlrlFlavor { ED, QL, EDQL };

// Reward of the privacy-lacking ablations. ED and QL are the plain negated
// quantities; EDQL combines both after min-max normalization by running
// per-episode statistics, plus a penalty when the chosen queue overflowed.
class PlrlReward {
public:
    explicit PlrlReward(PlrlFlavor flavor, double overflow_penalty = 1.0)
        : flavor_(flavor), overflow_penalty_(overflow_penalty) {}

    double operator()(double exec_delay_ms, long queue_len, bool overflow);
    void end_episode();
    PlrlFlavor flavor() const { return flavor_; }

private:
    struct MinMax {
        bool seen = false;
        double lo = 0.0, hi = 0.0;
        void observe(double v);
        double normalize(double v) const;
    };
    PlrlFlavor flavor_;
    double overflow_penalty_;
    MinMax ed_, ql_;
};

}  // namespace fogsim
