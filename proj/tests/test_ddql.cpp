#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "fogsim/ddql.hpp"
#include "toy_env.hpp"

using namespace fogsim;

TEST_CASE("epsilon decays linearly over the first 75% of training steps") {
    TrainSchedule sched = TrainSchedule::paper();
    CHECK(epsilon(0, sched) == 1.0);
    CHECK(epsilon(112500, sched) == 0.01);
    CHECK(epsilon(150000, sched) == 0.01);
    CHECK(epsilon(56250, sched) == doctest::Approx(0.505));

    double prev = 2.0;
    for (long s = 0; s <= 150000; s += 1500) {
        double e = epsilon(s, sched);
        CHECK(e <= prev);
        CHECK(e >= 0.01);
        prev = e;
    }
    CHECK_THROWS_AS(epsilon(-1, sched), std::invalid_argument);
}

namespace {
AgentNets nets_with_bias(int in, int actions, int favored) {
    AgentConfig cfg;
    cfg.hidden = {4};
    MlpParams p = init_mlp({in, 4, actions}, 1);
    for (auto& layer : p.w)
        for (float& v : layer) v = 0.0f;
    p.b[1][static_cast<size_t>(favored)] = 1.0f;
    return AgentNets{p, p};
}
}  // namespace

TEST_CASE("action selection is greedy on the target network with lowest-index ties") {
    Rng rng(8);
    std::vector<float> state{0.5f, -0.5f};

    AgentNets favor3 = nets_with_bias(2, 5, 3);
    CHECK(act(favor3, state, 0.0, rng) == 3);

    AgentNets flat = nets_with_bias(2, 5, 0);
    flat.q_target.b[1][0] = 0.0f;  // all outputs equal now
    CHECK(act(flat, state, 0.0, rng) == 0);
}

TEST_CASE("epsilon one explores uniformly") {
    Rng rng(77);
    AgentNets nets = nets_with_bias(2, 4, 2);
    std::vector<float> state{1.0f, 0.0f};
    std::map<int, int> counts;
    const int n = 40000;
    for (int i = 0; i < n; ++i) ++counts[act(nets, state, 1.0, rng)];
    for (int a = 0; a < 4; ++a)
        CHECK(std::abs(counts[a] / static_cast<double>(n) - 0.25) < 0.02);
}

TEST_CASE("replay buffer evicts oldest entries first and samples uniformly") {
    ReplayBuffer buf(3);
    auto tr = [](float r) {
        Transition t;
        t.state = {r};
        t.reward = r;
        t.next_state = {r};
        return t;
    };
    buf.push(tr(1));
    buf.push(tr(2));
    buf.push(tr(3));
    CHECK(buf.size() == 3);
    buf.push(tr(4));  // evicts reward 1
    CHECK(buf.size() == 3);
    std::set<float> contents;
    for (size_t i = 0; i < buf.size(); ++i) contents.insert(buf.at(i).reward);
    CHECK(contents == std::set<float>{2.0f, 3.0f, 4.0f});

    // Uniformity within 3 sigma of the multinomial expectation per slot.
    ReplayBuffer big(100);
    for (int i = 0; i < 100; ++i) big.push(tr(static_cast<float>(i)));
    Rng rng(3);
    std::map<int, int> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
        ++counts[static_cast<int>(big.sample(rng).reward)];
    const double expected = draws / 100.0;
    const double sigma = std::sqrt(draws * (1.0 / 100.0) * (99.0 / 100.0));
    for (int i = 0; i < 100; ++i)
        CHECK(std::abs(counts[i] - expected) <= 3.0 * sigma);
}

TEST_CASE("gamma zero reduces targets to plain rewards") {
    AgentConfig cfg;
    cfg.hidden = {8};
    cfg.seed = 5;
    cfg.schedule.gamma = 0.0;
    cfg.schedule.batch = 4;
    cfg.schedule.capacity = 16;
    DdqlCore core(2, 2, cfg);

    ReplayBuffer buf(16);
    Rng fill(3);
    for (int i = 0; i < 16; ++i) {
        Transition t;
        t.state = {static_cast<float>(fill.uniform()), static_cast<float>(fill.uniform())};
        t.action = fill.uniform_int(2);
        t.reward = static_cast<float>(fill.uniform() * 4.0 - 2.0);
        t.next_state = {static_cast<float>(fill.uniform()), static_cast<float>(fill.uniform())};
        buf.push(std::move(t));
    }

    // Replicate the sampling stream to compute the expected mean Huber loss
    // against plain rewards using the pre-update network.
    AgentNets nets = core.nets();
    AdamState adam = make_adam(nets.q, cfg.lr);
    Rng rng_run(777), rng_ref(777);
    double expected = 0.0;
    for (int k = 0; k < cfg.schedule.batch; ++k) {
        const Transition& t = buf.sample(rng_ref);
        double q = forward(nets.q, t.state)[static_cast<size_t>(t.action)];
        expected += huber(q, t.reward).loss;
    }
    expected /= cfg.schedule.batch;
    double loss = train_batch(nets, adam, buf, cfg.schedule, rng_run);
    CHECK(loss == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("training on a constant target drives the loss down monotonically") {
    AgentConfig cfg;
    cfg.hidden = {16};
    cfg.seed = 11;
    cfg.schedule.gamma = 0.0;
    cfg.schedule.batch = 8;
    DdqlCore core(2, 2, cfg);
    AgentNets nets = core.nets();
    AdamState adam = make_adam(nets.q, 1e-3f);

    ReplayBuffer buf(8);
    for (int i = 0; i < 8; ++i) {
        Transition t;
        t.state = {1.0f, 0.0f};
        t.action = 0;
        t.reward = 1.0f;
        t.next_state = {1.0f, 0.0f};
        buf.push(std::move(t));
    }
    Rng rng(2);
    double first = -1.0, prev = 1e300;
    double q_before = forward(nets.q, std::vector<float>{1.0f, 0.0f})[0];
    for (int k = 0; k < 50; ++k) {
        double loss = train_batch(nets, adam, buf, cfg.schedule, rng);
        CHECK(loss <= prev + 1e-9);
        if (first < 0.0) first = loss;
        prev = loss;
    }
    CHECK(prev < first);
    CHECK(forward(nets.q, std::vector<float>{1.0f, 0.0f})[0] > q_before);
}

TEST_CASE("train_batch requires a filled buffer and leaves the target untouched") {
    AgentConfig cfg;
    cfg.hidden = {8};
    cfg.seed = 21;
    DdqlCore core(2, 2, cfg);
    AgentNets nets = core.nets();
    AdamState adam = make_adam(nets.q, cfg.lr);
    ReplayBuffer buf(100);
    Rng rng(1);
    CHECK_THROWS_AS(train_batch(nets, adam, buf, cfg.schedule, rng), std::invalid_argument);

    Transition t;
    t.state = {0.0f, 1.0f};
    t.action = 1;
    t.reward = 0.5f;
    t.next_state = {1.0f, 0.0f};
    for (int i = 0; i < 60; ++i) buf.push(t);
    MlpParams target_before = nets.q_target;
    MlpParams online_before = nets.q;
    train_batch(nets, adam, buf, cfg.schedule, rng);
    CHECK(bitwise_equal(nets.q_target, target_before));
    CHECK(!bitwise_equal(nets.q, online_before));
}

TEST_CASE("consecutive decision steps chain transitions within an episode") {
    AgentConfig cfg;
    cfg.hidden = {8};
    cfg.seed = 31;
    cfg.schedule.capacity = 1000;
    DdqlCore core(3, 2, cfg);
    Rng rng(5);
    std::vector<std::vector<float>> states;
    for (int i = 0; i < 20; ++i)
        states.push_back({static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()),
                          static_cast<float>(rng.uniform())});
    for (int i = 0; i < 20; ++i) core.step(states[static_cast<size_t>(i)], 0.25f, AgentPhase::Prefill);
    REQUIRE(core.buffer().size() == 19);  // first decision stores nothing
    for (size_t i = 0; i + 1 < core.buffer().size(); ++i)
        CHECK(core.buffer().at(i).next_state == core.buffer().at(i + 1).state);
    for (size_t i = 0; i < core.buffer().size(); ++i)
        CHECK(core.buffer().at(i).state == states[i]);

    // Episode boundary breaks the chain: no transition crosses it.
    core.end_episode();
    core.step(states[0], 9.0f, AgentPhase::Prefill);
    CHECK(core.buffer().size() == 19);
    core.step(states[1], 0.5f, AgentPhase::Prefill);
    CHECK(core.buffer().size() == 20);
    CHECK(core.buffer().at(19).state == states[0]);
}

TEST_CASE("eval phase neither stores nor trains") {
    AgentConfig cfg;
    cfg.hidden = {8};
    cfg.seed = 41;
    DdqlCore core(2, 2, cfg);
    for (int i = 0; i < 10; ++i)
        core.step(std::vector<float>{1.0f, 0.0f}, 1.0f, AgentPhase::Eval);
    CHECK(core.buffer().size() == 0);
    CHECK(core.train_steps() == 0);
}

namespace {
struct SyncRecorder final : TrainingObserver {
    std::vector<bool> equal_at_sync;
    std::vector<bool> equal_mid_training;
    long last_sync_decisions = -1;
    void on_target_sync(long, long, const AgentNets& nets) override {
        equal_at_sync.push_back(bitwise_equal(nets.q, nets.q_target));
    }
    void on_train_step(long, long, double, const AgentNets& nets) override {
        equal_mid_training.push_back(bitwise_equal(nets.q, nets.q_target));
    }
};
}  // namespace

TEST_CASE("target copies are bitwise at sync points and drift between them") {
    AgentConfig cfg;
    cfg.hidden = {8};
    cfg.seed = 51;
    cfg.schedule.total_train_steps = 64;
    cfg.schedule.train_period = 1;
    cfg.schedule.target_period = 16;
    cfg.schedule.batch = 8;
    cfg.schedule.capacity = 500;
    cfg.schedule.prefill = 8;
    DdqlCore core(2, 2, cfg);
    SyncRecorder rec;
    core.set_observer(&rec);

    Rng rng(9);
    int s = 0;
    oracles::ToyMdp mdp;
    float r = 0.0f;
    while (core.buffer().size() < 8) {
        int a = core.step(toy::onehot(s, 2), r, AgentPhase::Prefill);
        r = static_cast<float>(mdp.reward[s][a]);
        s = mdp.next[s][a];
    }
    while (core.train_steps() < 64) {
        int a = core.step(toy::onehot(s, 2), r, AgentPhase::Train);
        r = static_cast<float>(mdp.reward[s][a]);
        s = mdp.next[s][a];
    }
    REQUIRE(!rec.equal_at_sync.empty());
    for (bool eq : rec.equal_at_sync) CHECK(eq);
    // Training steps between syncs leave the copies different.
    int drift = 0;
    for (bool eq : rec.equal_mid_training)
        if (!eq) ++drift;
    CHECK(drift > 0);
}

TEST_CASE("the agent loop solves the deterministic toy MDP") {
    oracles::ToyMdp mdp;
    auto q = oracles::q_iteration(mdp, 2000);
    auto optimal = oracles::greedy_policy(q);
    REQUIRE(optimal == std::vector<int>{1, 1});

    auto run = toy::train_on_toy(mdp, 97, 2000, 250);
    CHECK(run.greedy == optimal);
    CHECK(run.train_steps == 2000);
}

TEST_CASE("training is reproducible for a fixed seed") {
    oracles::ToyMdp mdp;
    auto a = toy::train_on_toy(mdp, 13, 300, 100);
    auto b = toy::train_on_toy(mdp, 13, 300, 100);
    CHECK(a.greedy == b.greedy);

    AgentConfig cfg;
    cfg.hidden = {16, 16};
    cfg.seed = 23;
    cfg.schedule.total_train_steps = 100;
    cfg.schedule.train_period = 1;
    cfg.schedule.batch = 10;
    cfg.schedule.prefill = 20;
    cfg.schedule.capacity = 1000;
    cfg.schedule.gamma = 0.9;
    DdqlCore c1(2, 2, cfg), c2(2, 2, cfg);
    for (DdqlCore* core : {&c1, &c2}) {
        int s = 0;
        float r = 0.0f;
        while (core->buffer().size() < 20) {
            int a = core->step(toy::onehot(s, 2), r, AgentPhase::Prefill);
            r = static_cast<float>(mdp.reward[s][a]);
            s = mdp.next[s][a];
        }
        while (core->train_steps() < 100) {
            int a = core->step(toy::onehot(s, 2), r, AgentPhase::Train);
            r = static_cast<float>(mdp.reward[s][a]);
            s = mdp.next[s][a];
        }
    }
    CHECK(bitwise_equal(c1.nets().q, c2.nets().q));
}
