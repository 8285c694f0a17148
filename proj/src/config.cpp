#include "fogsim/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fogsim {

using nlohmann::json;

TrainSchedule ExperimentConfig::train_schedule() const {
    if (schedule == "paper") return TrainSchedule::paper();
    if (schedule == "desk") return TrainSchedule::desk();
    throw ConfigError({"unknown schedule preset: " + schedule});
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

std::string ConfigError::join(const std::vector<std::string>& v) {
    std::ostringstream out;
    out << "invalid configuration (" << v.size() << " problem" << (v.size() == 1 ? "" : "s") << "):";
    for (const std::string& s : v) out << "\n  - " << s;
    return out.str();
}

namespace {

AppSpec app_from_json(const json& j) {
    AppSpec a;
    a.id = j.at("id").get<int>();
    a.category = category_from_name(j.at("category").get<std::string>());
    a.fog_instr = j.at("fog_instr").get<double>();
    a.cloud_instr = j.at("cloud_instr").get<double>();
    a.req_bytes = j.at("req_bytes").get<double>();
    a.fog_resp_bytes = j.at("fog_resp_bytes").get<double>();
    a.cloud_agg_bytes = j.at("cloud_agg_bytes").get<double>();
    a.cloud_resp_bytes = j.at("cloud_resp_bytes").get<double>();
    a.p_cloud = j.value("p_cloud", 0.10);
    a.p_cloud_feedback = j.value("p_cloud_feedback", 0.50);
    return a;
}

std::vector<uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<uint64_t> seeds;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    return seeds;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("JSON parse error: ") + e.what()});
    }
    try {
        ExperimentConfig cfg;
        cfg.base_dir = base_dir;
        if (j.contains("topology")) {
            const json& t = j["topology"];
            if (t.contains("file")) {
                cfg.topology_file = t["file"].get<std::string>();
            } else {
                cfg.topo.n_nodes = t.value("nodes", cfg.topo.n_nodes);
                cfg.topo.n_clusters = t.value("clusters", cfg.topo.n_clusters);
                cfg.topo.seed = t.value("seed", cfg.topo.seed);
                cfg.topo.cloud_ipt = t.value("cloud_ipt", cfg.topo.cloud_ipt);
                if (t.contains("fog_ipt_tiers"))
                    cfg.topo.fog_ipt_tiers = t["fog_ipt_tiers"].get<std::vector<double>>();
                if (t.contains("link_bw_choices"))
                    cfg.topo.link_bw_choices = t["link_bw_choices"].get<std::vector<double>>();
                cfg.topo.link_pr_min = t.value("link_pr_min", cfg.topo.link_pr_min);
                cfg.topo.link_pr_max = t.value("link_pr_max", cfg.topo.link_pr_max);
                cfg.topo.ref_msg_bytes = t.value("ref_msg_bytes", cfg.topo.ref_msg_bytes);
            }
        }
        if (j.contains("apps")) {
            cfg.apps.clear();
            for (const json& a : j["apps"]) cfg.apps.push_back(app_from_json(a));
        }
        if (j.contains("app_mix")) cfg.app_mix = j["app_mix"].get<std::vector<double>>();
        if (j.contains("betas")) cfg.betas = j["betas"].get<std::vector<double>>();
        if (j.contains("policies")) cfg.policies = j["policies"].get<std::vector<std::string>>();
        if (j.contains("horizons")) cfg.horizons = j["horizons"].get<std::vector<double>>();
        if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<uint64_t>>();
        cfg.schedule = j.value("schedule", cfg.schedule);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        cfg.fastest_backlog = j.value("fastest_backlog", cfg.fastest_backlog);
        cfg.plrl_queue_capacity = j.value("plrl_queue_capacity", cfg.plrl_queue_capacity);

        if (const char* env_seeds = std::getenv("FOGSIM_SEEDS")) {
            auto seeds = parse_seed_list(env_seeds);
            if (!seeds.empty()) cfg.seeds = std::move(seeds);
        }
        if (const char* env_out = std::getenv("FOGSIM_OUT_DIR")) cfg.out_dir = env_out;
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError({std::string("config field error: ") + e.what()});
    }
}

const std::vector<std::string>& known_policies() {
    static const std::vector<std::string> names{"random",  "rr",      "nearest", "fastest", "electre",
                                                "ddql",    "plrl-ed", "plrl-ql", "plrl-edql"};
    return names;
}

bool is_rl_policy(const std::string& name) {
    return name == "ddql" || name == "plrl-ed" || name == "plrl-ql" || name == "plrl-edql";
}

std::vector<std::string> check_config(const ExperimentConfig& cfg) {
    std::vector<std::string> errs;
    for (double b : cfg.betas)
        if (b <= 0.0) errs.push_back("beta must be positive");
    if (cfg.betas.empty()) errs.push_back("betas list is empty");
    if (cfg.policies.empty()) errs.push_back("policies list is empty");
    for (const std::string& p : cfg.policies)
        if (std::find(known_policies().begin(), known_policies().end(), p) == known_policies().end())
            errs.push_back("unknown policy: " + p);
    if (cfg.horizons.empty()) errs.push_back("horizons list is empty");
    for (double h : cfg.horizons)
        if (h <= 0.0) errs.push_back("horizon must be positive");
    if (cfg.seeds.empty()) errs.push_back("seeds list is empty");
    if (cfg.schedule != "desk" && cfg.schedule != "paper")
        errs.push_back("unknown schedule preset: " + cfg.schedule);
    for (const std::string& e : check_apps(cfg.apps)) errs.push_back(e);
    if (!cfg.app_mix.empty()) {
        if (cfg.app_mix.size() != cfg.apps.size()) {
            errs.push_back("app_mix size must match the number of apps");
        } else {
            double sum = 0.0;
            bool neg = false;
            for (double p : cfg.app_mix) {
                if (p < 0) neg = true;
                sum += p;
            }
            if (neg) errs.push_back("app_mix entries must be non-negative");
            if (std::abs(sum - 1.0) > 1e-9) errs.push_back("app_mix must sum to 1");
        }
    }
    if (cfg.topology_file) {
        std::filesystem::path p = std::filesystem::path(cfg.base_dir) / *cfg.topology_file;
        if (!std::filesystem::exists(p))
            errs.push_back("topology file does not exist: " + p.string());
    } else {
        if (cfg.topo.n_clusters < 1) errs.push_back("topology needs at least one cluster");
        if (cfg.topo.n_nodes < cfg.topo.n_clusters + 2)
            errs.push_back("topology nodes must be at least clusters + 2");
    }
    return errs;
}

ExperimentConfig validate_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError({"cannot open config file: " + path});
    std::ostringstream buf;
    buf << f.rdbuf();
    std::string base = std::filesystem::path(path).parent_path().string();
    if (base.empty()) base = ".";
    ExperimentConfig cfg = parse_config(buf.str(), base);
    std::vector<std::string> errs = check_config(cfg);
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

Topology build_topology(const ExperimentConfig& cfg) {
    if (cfg.topology_file) {
        std::filesystem::path p = std::filesystem::path(cfg.base_dir) / *cfg.topology_file;
        return Topology::load(p.string());
    }
    return Topology::generate(cfg.topo);
}

std::unique_ptr<PlacementPolicy> make_baseline_policy(const std::string& name,
                                                      const ExperimentConfig& cfg,
                                                      const Topology& topo, uint64_t seed) {
    if (name == "random") return std::make_unique<RandomPolicy>(derive_seed(seed, 0x52414e44ULL));
    if (name == "rr") return std::make_unique<RoundRobinPolicy>();
    if (name == "nearest") return std::make_unique<NearestPolicy>(topo);
    if (name == "fastest") return std::make_unique<FastestPolicy>(topo, cfg.fastest_backlog);
    if (name == "electre") return std::make_unique<ElectrePolicy>();
    throw std::invalid_argument("not a baseline policy: " + name);
}

std::unique_ptr<RlAgent> make_rl_agent(const std::string& name, const ExperimentConfig& cfg,
                                       const Topology& topo, uint64_t seed) {
    AgentConfig agent_cfg;
    agent_cfg.schedule = cfg.train_schedule();
    agent_cfg.seed = seed;
    if (name == "ddql") return std::make_unique<ParlAgent>(topo, 3, agent_cfg);
    if (name == "plrl-ed")
        return std::make_unique<PlrlAgent>(topo, PlrlFlavor::ED, agent_cfg, cfg.plrl_queue_capacity);
    if (name == "plrl-ql")
        return std::make_unique<PlrlAgent>(topo, PlrlFlavor::QL, agent_cfg, cfg.plrl_queue_capacity);
    if (name == "plrl-edql")
        return std::make_unique<PlrlAgent>(topo, PlrlFlavor::EDQL, agent_cfg, cfg.plrl_queue_capacity);
    throw std::invalid_argument("not an RL policy: " + name);
}

}  // namespace fogsim
