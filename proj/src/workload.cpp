#include "fogsim/workload.hpp"

#include <sstream>
#include <stdexcept>

namespace fogsim {

const char* category_name(Category c) {
    switch (c) {
        case Category::Light: return "Light";
        case Category::Moderate: return "Moderate";
        case Category::Heavy: return "Heavy";
    }
    throw std::logic_error("category_name: bad category");
}

Category category_from_name(const std::string& name) {
    if (name == "Light") return Category::Light;
    if (name == "Moderate") return Category::Moderate;
    if (name == "Heavy") return Category::Heavy;
    throw std::invalid_argument("unknown workload category: " + name);
}

std::vector<AppSpec> default_apps() {
    std::vector<AppSpec> apps(3);
    apps[0] = {0, Category::Light, 1000.0, 500.0, 500.0, 500.0, 1000.0, 500.0, 0.10, 0.50};
    apps[1] = {1, Category::Moderate, 5000.0, 2500.0, 1500.0, 1000.0, 2000.0, 1000.0, 0.10, 0.50};
    apps[2] = {2, Category::Heavy, 20000.0, 10000.0, 5000.0, 2000.0, 3000.0, 2000.0, 0.10, 0.50};
    return apps;
}

std::vector<std::string> check_apps(const std::vector<AppSpec>& apps) {
    std::vector<std::string> errs;
    if (apps.empty()) {
        errs.push_back("app list is empty");
        return errs;
    }
    double light = -1.0, moderate = -1.0, heavy = -1.0;
    for (const AppSpec& a : apps) {
        std::ostringstream tag;
        tag << "app " << a.id << ": ";
        if (a.fog_instr <= 0) errs.push_back(tag.str() + "fog_instr must be positive");
        if (a.cloud_instr <= 0) errs.push_back(tag.str() + "cloud_instr must be positive");
        for (double b : {a.req_bytes, a.fog_resp_bytes, a.cloud_agg_bytes, a.cloud_resp_bytes})
            if (b < 0) {
                errs.push_back(tag.str() + "message sizes must be non-negative");
                break;
            }
        if (a.p_cloud < 0 || a.p_cloud > 1) errs.push_back(tag.str() + "p_cloud must be in [0,1]");
        if (a.p_cloud_feedback < 0 || a.p_cloud_feedback > 1)
            errs.push_back(tag.str() + "p_cloud_feedback must be in [0,1]");
        switch (a.category) {
            case Category::Light: light = a.fog_instr; break;
            case Category::Moderate: moderate = a.fog_instr; break;
            case Category::Heavy: heavy = a.fog_instr; break;
        }
    }
    if (light > 0 && moderate > 0 && light >= moderate)
        errs.push_back("category ordering violated: Light fog_instr must be < Moderate");
    if (moderate > 0 && heavy > 0 && moderate >= heavy)
        errs.push_back("category ordering violated: Moderate fog_instr must be < Heavy");
    if (light > 0 && heavy > 0 && light >= heavy)
        errs.push_back("category ordering violated: Light fog_instr must be < Heavy");
    return errs;
}

double next_interarrival(Rng& rng, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("next_interarrival: beta must be positive");
    return rng.exponential_ms(beta);
}

FogResultRoute route_fog_result(Rng& rng, const AppSpec& app) {
    if (!rng.bernoulli(app.p_cloud)) return FogResultRoute::Done;
    return rng.bernoulli(app.p_cloud_feedback) ? FogResultRoute::ToCloudThenFeedback
                                               : FogResultRoute::ToCloud;
}

}  // namespace fogsim
