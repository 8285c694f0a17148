#include "fogsim/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fogsim/rng.hpp"

namespace fogsim {

size_t MlpParams::param_count() const {
    size_t n = 0;
    for (size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
    return n;
}

bool same_shape(const MlpParams& a, const MlpParams& b) { return a.sizes == b.sizes; }

bool bitwise_equal(const MlpParams& a, const MlpParams& b) {
    if (!same_shape(a, b)) return false;
    auto eq = [](const std::vector<float>& x, const std::vector<float>& y) {
        return std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) == 0;
    };
    for (size_t l = 0; l < a.w.size(); ++l)
        if (!eq(a.w[l], b.w[l]) || !eq(a.b[l], b.b[l])) return false;
    return true;
}

MlpParams init_mlp(const std::vector<int>& sizes, uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("init_mlp: need at least input and output sizes");
    for (int s : sizes)
        if (s <= 0) throw std::invalid_argument("init_mlp: layer sizes must be positive");
    MlpParams p;
    p.sizes = sizes;
    Rng rng(derive_seed(seed, 0x494e4954ULL));  // "INIT"
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / fan_in);
        std::vector<float> w(static_cast<size_t>(fan_out) * fan_in);
        for (float& x : w) x = static_cast<float>((rng.uniform() * 2.0 - 1.0) * limit);
        p.w.push_back(std::move(w));
        p.b.emplace_back(static_cast<size_t>(fan_out), 0.0f);
    }
    return p;
}

namespace {
void layer_forward(const std::vector<float>& w, const std::vector<float>& b,
                   const std::vector<float>& in, std::vector<float>& out) {
    const size_t n_out = b.size();
    const size_t n_in = in.size();
    out.resize(n_out);
    for (size_t j = 0; j < n_out; ++j) {
        float acc = b[j];
        const float* row = w.data() + j * n_in;
        for (size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
        out[j] = acc;
    }
}
}  // namespace

const std::vector<float>& forward_cached(const MlpParams& p, std::span<const float> x,
                                         ForwardCache& cache) {
    if (static_cast<int>(x.size()) != p.input_dim())
        throw std::invalid_argument("forward: input dimension mismatch");
    const int layers = p.n_layers();
    cache.pre.resize(static_cast<size_t>(layers));
    cache.act.resize(static_cast<size_t>(layers) + 1);
    cache.act[0].assign(x.begin(), x.end());
    for (int l = 0; l < layers; ++l) {
        layer_forward(p.w[static_cast<size_t>(l)], p.b[static_cast<size_t>(l)],
                      cache.act[static_cast<size_t>(l)], cache.pre[static_cast<size_t>(l)]);
        auto& out = cache.act[static_cast<size_t>(l) + 1];
        out = cache.pre[static_cast<size_t>(l)];
        if (l + 1 < layers)
            for (float& v : out) v = v > 0.0f ? v : 0.0f;
    }
    return cache.act.back();
}

std::vector<float> forward(const MlpParams& p, std::span<const float> x) {
    ForwardCache cache;
    return forward_cached(p, x, cache);
}

HuberResult huber(double pred, double target) {
    if (!std::isfinite(pred) || !std::isfinite(target))
        throw std::invalid_argument("huber: inputs must be finite");
    const double e = pred - target;
    if (std::abs(e) <= 1.0) return {0.5 * e * e, e};
    return {std::abs(e) - 0.5, e > 0.0 ? 1.0 : -1.0};
}

MlpGrads zero_grads_like(const MlpParams& p) {
    MlpGrads g;
    for (size_t l = 0; l < p.w.size(); ++l) {
        g.w.emplace_back(p.w[l].size(), 0.0f);
        g.b.emplace_back(p.b[l].size(), 0.0f);
    }
    return g;
}

void backward(const MlpParams& p, const ForwardCache& cache, int action_index, float dloss_dq,
              MlpGrads& grads) {
    const int layers = p.n_layers();
    if (static_cast<int>(cache.pre.size()) != layers || cache.act.size() != cache.pre.size() + 1)
        throw std::invalid_argument("backward: cache does not match network");
    if (action_index < 0 || action_index >= p.output_dim())
        throw std::invalid_argument("backward: action index out of range");

    // Linear head: only the selected unit carries gradient.
    std::vector<float> delta(static_cast<size_t>(p.output_dim()), 0.0f);
    delta[static_cast<size_t>(action_index)] = dloss_dq;

    for (int l = layers - 1; l >= 0; --l) {
        const auto& in = cache.act[static_cast<size_t>(l)];
        const size_t n_in = in.size();
        const size_t n_out = delta.size();
        auto& gw = grads.w[static_cast<size_t>(l)];
        auto& gb = grads.b[static_cast<size_t>(l)];
        for (size_t j = 0; j < n_out; ++j) {
            const float dj = delta[j];
            if (dj == 0.0f) continue;
            gb[j] += dj;
            float* grow = gw.data() + j * n_in;
            for (size_t i = 0; i < n_in; ++i) grow[i] += dj * in[i];
        }
        if (l == 0) break;
        std::vector<float> prev(n_in, 0.0f);
        const auto& w = p.w[static_cast<size_t>(l)];
        for (size_t j = 0; j < n_out; ++j) {
            const float dj = delta[j];
            if (dj == 0.0f) continue;
            const float* row = w.data() + j * n_in;
            for (size_t i = 0; i < n_in; ++i) prev[i] += dj * row[i];
        }
        const auto& pre = cache.pre[static_cast<size_t>(l) - 1];
        for (size_t i = 0; i < n_in; ++i)
            if (pre[i] <= 0.0f) prev[i] = 0.0f;
        delta = std::move(prev);
    }
}

AdamState make_adam(const MlpParams& p, float lr) {
    AdamState a;
    a.lr = lr;
    for (size_t l = 0; l < p.w.size(); ++l) {
        a.mw.emplace_back(p.w[l].size(), 0.0f);
        a.vw.emplace_back(p.w[l].size(), 0.0f);
        a.mb.emplace_back(p.b[l].size(), 0.0f);
        a.vb.emplace_back(p.b[l].size(), 0.0f);
    }
    return a;
}

void adam_step(MlpParams& p, AdamState& adam, const MlpGrads& grads) {
    if (adam.mw.size() != p.w.size()) throw std::invalid_argument("adam_step: state shape mismatch");
    ++adam.step;
    const float c1 = 1.0f - static_cast<float>(std::pow(adam.beta1, adam.step));
    const float c2 = 1.0f - static_cast<float>(std::pow(adam.beta2, adam.step));
    auto update = [&](std::vector<float>& theta, std::vector<float>& m, std::vector<float>& v,
                      const std::vector<float>& g) {
        for (size_t i = 0; i < theta.size(); ++i) {
            m[i] = adam.beta1 * m[i] + (1.0f - adam.beta1) * g[i];
            v[i] = adam.beta2 * v[i] + (1.0f - adam.beta2) * g[i] * g[i];
            const float mhat = m[i] / c1;
            const float vhat = v[i] / c2;
            theta[i] -= adam.lr * mhat / (std::sqrt(vhat) + adam.eps);
            if (!std::isfinite(theta[i])) throw std::runtime_error("adam_step: parameter became non-finite");
        }
    };
    for (size_t l = 0; l < p.w.size(); ++l) {
        update(p.w[l], adam.mw[l], adam.vw[l], grads.w[l]);
        update(p.b[l], adam.mb[l], adam.vb[l], grads.b[l]);
    }
}

namespace {
void write_f32_le(std::ostream& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                     static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
    out.write(bytes, 4);
}

float read_f32_le(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw std::runtime_error("checkpoint: truncated parameter block");
    uint32_t bits = static_cast<uint32_t>(bytes[0]) | (static_cast<uint32_t>(bytes[1]) << 8) |
                    (static_cast<uint32_t>(bytes[2]) << 16) | (static_cast<uint32_t>(bytes[3]) << 24);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}
}  // namespace

void save_checkpoint(const std::string& path, const MlpParams& p, const CheckpointMeta& meta) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
    f << "fogsim-checkpoint v1\n";
    f << "agent " << meta.agent << "\n";
    f << "layers";
    for (int s : p.sizes) f << " " << s;
    f << "\n";
    f << "dims " << meta.n_actions << " " << meta.n_clusters << " " << meta.n_categories << "\n";
    f << "train_steps " << meta.train_steps << "\n";
    f << "seed " << meta.seed << "\n";
    f << "params\n";
    for (size_t l = 0; l < p.w.size(); ++l) {
        for (float v : p.w[l]) write_f32_le(f, v);
        for (float v : p.b[l]) write_f32_le(f, v);
    }
    if (!f) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string magic, version;
    f >> magic >> version;
    if (magic != "fogsim-checkpoint" || version != "v1")
        throw std::runtime_error("not a fogsim checkpoint: " + path);
    Checkpoint ck;
    std::string key, line;
    f >> key >> ck.meta.agent;
    if (key != "agent") throw std::runtime_error("checkpoint: expected agent line");
    f >> key;
    if (key != "layers") throw std::runtime_error("checkpoint: expected layers line");
    std::getline(f, line);
    {
        std::istringstream ls(line);
        int s;
        while (ls >> s) ck.params.sizes.push_back(s);
    }
    if (ck.params.sizes.size() < 2) throw std::runtime_error("checkpoint: bad layer list");
    f >> key >> ck.meta.n_actions >> ck.meta.n_clusters >> ck.meta.n_categories;
    if (key != "dims") throw std::runtime_error("checkpoint: expected dims line");
    f >> key >> ck.meta.train_steps;
    if (key != "train_steps") throw std::runtime_error("checkpoint: expected train_steps line");
    f >> key >> ck.meta.seed;
    if (key != "seed") throw std::runtime_error("checkpoint: expected seed line");
    f >> key;
    if (key != "params") throw std::runtime_error("checkpoint: expected params block");
    f.get();  // newline before the binary block
    for (size_t l = 0; l + 1 < ck.params.sizes.size(); ++l) {
        const size_t n_in = static_cast<size_t>(ck.params.sizes[l]);
        const size_t n_out = static_cast<size_t>(ck.params.sizes[l + 1]);
        std::vector<float> w(n_out * n_in), b(n_out);
        for (float& v : w) v = read_f32_le(f);
        for (float& v : b) v = read_f32_le(f);
        ck.params.w.push_back(std::move(w));
        ck.params.b.push_back(std::move(b));
    }
    return ck;
}

}  // namespace fogsim
