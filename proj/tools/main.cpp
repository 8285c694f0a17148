// fogsim command line: topology generation, agent training and evaluation,
// the full benchmark grid, and config validation.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "fogsim/config.hpp"
#include "fogsim/des.hpp"
#include "fogsim/experiment.hpp"
#include "fogsim/metrics.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int cmd_topo_gen(int nodes, int clusters, uint64_t seed, const std::string& out) {
    fogsim::TopoParams params;
    params.n_nodes = nodes;
    params.n_clusters = clusters;
    params.seed = seed;
    fogsim::Topology topo = fogsim::Topology::generate(params);
    topo.save(out);
    std::cout << "wrote " << out << " (" << topo.nodes().size() << " nodes, "
              << topo.links().size() << " links, " << topo.fog_ids().size() << " fog)\n";
    return kExitOk;
}

int cmd_validate(const std::string& config_path) {
    fogsim::ExperimentConfig cfg = fogsim::validate_config(config_path);
    std::cout << "config ok: " << cfg.betas.size() << " betas x " << cfg.policies.size()
              << " policies x " << cfg.horizons.size() << " horizons x " << cfg.seeds.size()
              << " seeds\n";
    return kExitOk;
}

int cmd_train(const std::string& config_path, uint64_t seed, const std::string& out,
              const std::string& policy, double beta_flag) {
    fogsim::ExperimentConfig cfg = fogsim::validate_config(config_path);
    if (!fogsim::is_rl_policy(policy))
        throw fogsim::ConfigError({"train: policy must be one of ddql, plrl-ed, plrl-ql, plrl-edql"});
    double beta = beta_flag > 0 ? beta_flag : cfg.betas.front();
    fogsim::Topology topo = fogsim::build_topology(cfg);
    fogsim::GenConfig gen;
    gen.beta = beta;
    gen.app_mix = cfg.app_mix;
    auto agent = fogsim::make_rl_agent(policy, cfg, topo, seed);
    std::cout << "training " << policy << " at beta=" << beta << " seed=" << seed << " ...\n";
    fogsim::TrainingResult result = fogsim::run_training(topo, cfg.apps, gen, *agent, 10000.0, seed);
    fogsim::save_agent(out, *agent, seed);
    double final_ma = result.curve.empty() ? 0.0 : result.curve.back().ma10;
    std::cout << "trained " << result.train_steps << " steps over " << result.train_episodes
              << " episodes (prefill " << result.prefill_episodes
              << " episodes); final 10-episode mean return " << final_ma << "\n";
    std::cout << "wrote " << out << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& ckpt, double horizon, uint64_t seed,
             const std::string& config_path, double beta_flag, const std::string& out_csv) {
    fogsim::ExperimentConfig cfg = fogsim::validate_config(config_path);
    double beta = beta_flag > 0 ? beta_flag : cfg.betas.front();
    fogsim::Topology topo = fogsim::build_topology(cfg);
    fogsim::GenConfig gen;
    gen.beta = beta;
    gen.app_mix = cfg.app_mix;
    fogsim::AgentConfig agent_cfg;
    agent_cfg.schedule = cfg.train_schedule();
    agent_cfg.seed = seed;
    auto agent = fogsim::load_agent(ckpt, topo, agent_cfg);
    fogsim::EpisodeResult res = fogsim::evaluate(topo, cfg.apps, gen, *agent, horizon, seed);
    if (!out_csv.empty()) {
        fogsim::export_csv(res.records, out_csv);
        std::cout << "wrote " << out_csv << "\n";
    }
    double mean_reward =
        res.decisions > 1 ? res.episode_return / static_cast<double>(res.decisions - 1) : 0.0;
    std::cout << "decisions " << res.decisions << ", return " << res.episode_return
              << ", per-decision mean reward " << mean_reward << "\n";
    for (fogsim::Loop loop : {fogsim::Loop::FogLoop, fogsim::Loop::CloudLoop}) {
        bool any = false;
        for (const auto& r : res.records)
            if (r.loop == loop) any = true;
        if (!any) continue;
        std::cout << fogsim::loop_name(loop)
                  << " loop: mean total response " << fogsim::mean_loop_delay(res.records, loop)
                  << " ms, mean waiting " << fogsim::mean_waiting(res.records, loop) << " ms\n";
    }
    return kExitOk;
}

int cmd_bench(const std::string& config_path) {
    fogsim::ExperimentConfig cfg = fogsim::validate_config(config_path);
    fogsim::GridOutcome outcome = fogsim::run_grid(cfg);
    std::cout << "grid: " << (outcome.total_cells - outcome.failed_cells) << "/"
              << outcome.total_cells << " cells succeeded\n";
    for (const std::string& f : outcome.failures) std::cerr << "failed: " << f << "\n";
    std::cout << "summary: " << outcome.summary_path << "\n";
    if (outcome.total_cells > 0 && outcome.failed_cells == outcome.total_cells) return kExitRuntime;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fogsim: fog-network load balancing simulator"};
    app.require_subcommand(1);

    auto* topo = app.add_subcommand("topo", "topology tools");
    auto* topo_gen = topo->add_subcommand("gen", "generate a topology file");
    int nodes = 10, clusters = 5;
    uint64_t seed = 1;
    std::string out_file = "topology.txt";
    topo_gen->add_option("--nodes", nodes, "total node count")->required();
    topo_gen->add_option("--clusters", clusters, "iot cluster count")->required();
    topo_gen->add_option("--seed", seed, "generation seed")->required();
    topo_gen->add_option("--out", out_file, "output path")->required();

    auto* validate = app.add_subcommand("validate", "check an experiment config");
    std::string config_path = "experiment.json";
    validate->add_option("--config", config_path, "config file")->required();

    auto* train = app.add_subcommand("train", "train an RL agent");
    std::string train_config, ckpt_out = "agent.ckpt", train_policy = "ddql";
    uint64_t train_seed = 1;
    double train_beta = 0.0;
    train->add_option("--config", train_config, "config file")->required();
    train->add_option("--seed", train_seed, "training seed")->required();
    train->add_option("--out", ckpt_out, "checkpoint output path")->required();
    train->add_option("--policy", train_policy, "ddql | plrl-ed | plrl-ql | plrl-edql");
    train->add_option("--beta", train_beta, "generation rate scale (default: first beta in config)");

    auto* eval = app.add_subcommand("eval", "evaluate a trained checkpoint");
    std::string eval_ckpt, eval_config, eval_csv;
    double eval_horizon = 10000.0, eval_beta = 0.0;
    uint64_t eval_seed = 1;
    eval->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
    eval->add_option("--horizon", eval_horizon, "episode length in ms (10000 or 100000)")->required();
    eval->add_option("--seed", eval_seed, "evaluation seed")->required();
    eval->add_option("--config", eval_config, "config file")->required();
    eval->add_option("--beta", eval_beta, "generation rate scale (default: first beta in config)");
    eval->add_option("--out", eval_csv, "delay records CSV output");

    auto* bench = app.add_subcommand("bench", "run the full experiment grid");
    std::string bench_config;
    bench->add_option("--config", bench_config, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (topo_gen->parsed()) return cmd_topo_gen(nodes, clusters, seed, out_file);
        if (validate->parsed()) return cmd_validate(config_path);
        if (train->parsed()) return cmd_train(train_config, train_seed, ckpt_out, train_policy, train_beta);
        if (eval->parsed()) return cmd_eval(eval_ckpt, eval_horizon, eval_seed, eval_config, eval_beta, eval_csv);
        if (bench->parsed()) return cmd_bench(bench_config);
        std::cerr << "no subcommand\n";
        return kExitConfig;
    } catch (const fogsim::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
