#include "fogsim/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "fogsim/des.hpp"
#include "fogsim/metrics.hpp"

namespace fogsim {

namespace {
std::string num_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}
}  // namespace

std::string run_csv_name(const std::string& policy, double beta, double horizon, uint64_t seed) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s_beta%s_h%s_seed%llu.csv", policy.c_str(),
                  num_tag(beta).c_str(), num_tag(horizon).c_str(),
                  static_cast<unsigned long long>(seed));
    return buf;
}

std::string checkpoint_name(const std::string& policy, double beta, uint64_t seed) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s_beta%s_seed%llu.ckpt", policy.c_str(),
                  num_tag(beta).c_str(), static_cast<unsigned long long>(seed));
    return buf;
}

GridOutcome run_grid(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    GridOutcome outcome;
    fs::create_directories(cfg.out_dir);
    Topology topo = build_topology(cfg);

    std::vector<SummaryRow> summary;
    std::map<std::string, std::vector<double>> ci_samples;  // key -> per-seed means

    auto record_run = [&](const std::string& policy, double beta, double horizon, uint64_t seed,
                          const EpisodeResult& result) {
        fs::path csv_path = fs::path(cfg.out_dir) / run_csv_name(policy, beta, horizon, seed);
        export_csv(result.records, csv_path.string());
        outcome.run_files.push_back(csv_path.string());
        for (Loop loop : {Loop::FogLoop, Loop::CloudLoop}) {
            bool any = false;
            for (const DelayRecord& r : result.records)
                if (r.loop == loop) {
                    any = true;
                    break;
                }
            if (!any) continue;
            SummaryRow row;
            row.policy = policy;
            row.beta = beta;
            row.horizon = horizon;
            row.seed = seed;
            row.loop = loop;
            row.mean_total_response_ms = mean_loop_delay(result.records, loop);
            row.mean_waiting_ms = mean_waiting(result.records, loop);
            summary.push_back(row);
            ci_samples[policy + "," + num_tag(beta) + "," + num_tag(horizon) + "," + loop_name(loop)]
                .push_back(row.mean_total_response_ms);
        }
    };

    for (double beta : cfg.betas) {
        GenConfig gen;
        gen.beta = beta;
        gen.app_mix = cfg.app_mix;
        for (const std::string& policy : cfg.policies) {
            if (is_rl_policy(policy)) {
                for (uint64_t seed : cfg.seeds) {
                    std::string cell_tag = policy + " beta=" + num_tag(beta) +
                                           " seed=" + std::to_string(seed);
                    try {
                        auto agent = make_rl_agent(policy, cfg, topo, seed);
                        run_training(topo, cfg.apps, gen, *agent, 10000.0, seed);
                        fs::path ckpt = fs::path(cfg.out_dir) / checkpoint_name(policy, beta, seed);
                        save_agent(ckpt.string(), *agent, seed);
                        for (double horizon : cfg.horizons) {
                            ++outcome.total_cells;
                            try {
                                EpisodeResult res =
                                    evaluate(topo, cfg.apps, gen, *agent, horizon, seed);
                                record_run(policy, beta, horizon, seed, res);
                            } catch (const std::exception& e) {
                                ++outcome.failed_cells;
                                outcome.failures.push_back(cell_tag + " h=" + num_tag(horizon) +
                                                           ": " + e.what());
                            }
                        }
                    } catch (const std::exception& e) {
                        // Training failed: every horizon cell of this seed fails.
                        outcome.total_cells += static_cast<int>(cfg.horizons.size());
                        outcome.failed_cells += static_cast<int>(cfg.horizons.size());
                        outcome.failures.push_back(cell_tag + ": " + e.what());
                    }
                }
            } else {
                for (double horizon : cfg.horizons) {
                    for (uint64_t seed : cfg.seeds) {
                        ++outcome.total_cells;
                        try {
                            auto pol = make_baseline_policy(policy, cfg, topo, seed);
                            EpisodeResult res = run_episode(topo, cfg.apps, gen, *pol, horizon, seed);
                            record_run(policy, beta, horizon, seed, res);
                        } catch (const std::exception& e) {
                            ++outcome.failed_cells;
                            outcome.failures.push_back(policy + " beta=" + num_tag(beta) +
                                                       " h=" + num_tag(horizon) +
                                                       " seed=" + std::to_string(seed) + ": " +
                                                       e.what());
                        }
                    }
                }
            }
        }
    }

    fs::path summary_path = fs::path(cfg.out_dir) / "summary.csv";
    {
        std::ofstream f(summary_path);
        if (!f) throw std::runtime_error("cannot write summary: " + summary_path.string());
        f << summary_to_csv(summary);
    }
    outcome.summary_path = summary_path.string();

    // Seed-aggregated means with bootstrap intervals.
    {
        fs::path ci_path = fs::path(cfg.out_dir) / "summary_ci.csv";
        std::ofstream f(ci_path);
        if (!f) throw std::runtime_error("cannot write summary_ci: " + ci_path.string());
        f << "policy,beta,horizon,loop,mean_total_response_ms,ci95_lo,ci95_hi,n_seeds\n";
        for (const auto& [key, values] : ci_samples) {
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            ConfInterval ci = values.size() > 1 ? bootstrap_ci95(values, 1000, 17)
                                                : ConfInterval{mean, mean};
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%zu\n", key.c_str(), mean, ci.lo,
                          ci.hi, values.size());
            f << buf;
        }
    }
    return outcome;
}

}  // namespace fogsim
