// Minimal dense Q-network: forward pass, backprop through a selected output
// unit, Huber loss, Adam, and checkpoint I/O. All parameters and accumulation
// are 32-bit; loops are plain and sequential so fixed seeds reproduce bitwise.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fogsim {

struct MlpParams {
    std::vector<int> sizes;              // {input, hidden..., output}
    std::vector<std::vector<float>> w;   // w[l]: sizes[l+1] x sizes[l], row-major
    std::vector<std::vector<float>> b;   // b[l]: sizes[l+1]

    int n_layers() const { return static_cast<int>(sizes.size()) - 1; }
    int input_dim() const { return sizes.front(); }
    int output_dim() const { return sizes.back(); }
    size_t param_count() const;
};

bool same_shape(const MlpParams& a, const MlpParams& b);
bool bitwise_equal(const MlpParams& a, const MlpParams& b);

// He-style uniform fan-in initialization for the weights, zero biases.
MlpParams init_mlp(const std::vector<int>& sizes, uint64_t seed);

// Rectified-linear hidden layers, linear output head.
std::vector<float> forward(const MlpParams& p, std::span<const float> x);

struct ForwardCache {
    std::vector<std::vector<float>> pre;  // pre-activations per layer
    std::vector<std::vector<float>> act;  // act[0] = input, act[l+1] = layer output
};
const std::vector<float>& forward_cached(const MlpParams& p, std::span<const float> x,
                                         ForwardCache& cache);

// Huber loss with delta = 1 and its derivative w.r.t. the prediction.
struct HuberResult {
    double loss = 0.0;
    double dloss_dpred = 0.0;
};
HuberResult huber(double pred, double target);

struct MlpGrads {
    std::vector<std::vector<float>> w, b;
};
MlpGrads zero_grads_like(const MlpParams& p);

// Accumulates into grads: d(dloss_dq * Q[action_index]) / d(params), using
// the activations cached by forward_cached.
void backward(const MlpParams& p, const ForwardCache& cache, int action_index, float dloss_dq,
              MlpGrads& grads);

struct AdamState {
    std::vector<std::vector<float>> mw, vw, mb, vb;
    long step = 0;
    float lr = 2.5e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};
AdamState make_adam(const MlpParams& p, float lr = 2.5e-4f);

// Bias-corrected Adam update. Throws if any parameter stops being finite.
void adam_step(MlpParams& p, AdamState& adam, const MlpGrads& grads);

struct CheckpointMeta {
    std::string agent = "none";  // ddql | plrl-ed | plrl-ql | plrl-edql | none
    int n_actions = 0;
    int n_clusters = 0;
    int n_categories = 0;
    long train_steps = 0;
    uint64_t seed = 0;
};

// Text header (agent, layer sizes, dims, step count, seed) followed by the
// raw parameters as little-endian float32, layer by layer, weights row-major
// then biases.
void save_checkpoint(const std::string& path, const MlpParams& p, const CheckpointMeta& meta);

struct Checkpoint {
    MlpParams params;
    CheckpointMeta meta;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fogsim
