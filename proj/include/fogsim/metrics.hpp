// Per-workload delay records, aggregation, and CSV export.
#pragma once

#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fogsim/workload.hpp"

namespace fogsim {

enum class Loop { FogLoop, CloudLoop };

const char* loop_name(Loop l);
Loop loop_from_name(const std::string& name);

struct DelayRecord {
    long uid = -1;
    int app_id = 0;
    Category category = Category::Light;
    int cluster = -1;
    int node = -1;  // chosen fog node
    Loop loop = Loop::FogLoop;
    double latency_ms = 0.0;  // all network legs of the loop
    double waiting_ms = 0.0;
    double service_ms = 0.0;
    double response_ms = 0.0;        // waiting + service
    double total_response_ms = 0.0;  // latency + response
};

// Arithmetic mean of total_response_ms over records of the given loop.
double mean_loop_delay(std::span<const DelayRecord> records, Loop loop);
double mean_waiting(std::span<const DelayRecord> records, Loop loop);

std::string records_to_csv(std::span<const DelayRecord> records);
void export_csv(std::span<const DelayRecord> records, const std::string& path);
std::vector<DelayRecord> parse_csv(const std::string& csv);

// Tally of fog-loop assignments by (app, cluster, fog node).
class DistributionMatrix {
public:
    long at(int app_id, int cluster, int node) const;
    const std::map<std::tuple<int, int, int>, long>& counts() const { return counts_; }
    long total() const;
    void add(int app_id, int cluster, int node);

private:
    std::map<std::tuple<int, int, int>, long> counts_;
};

DistributionMatrix distribution_matrix(std::span<const DelayRecord> records);

struct SummaryRow {
    std::string policy;
    double beta = 0.0;
    double horizon = 0.0;
    uint64_t seed = 0;
    Loop loop = Loop::FogLoop;
    double mean_total_response_ms = 0.0;
    double mean_waiting_ms = 0.0;
};

std::string summary_to_csv(std::span<const SummaryRow> rows);

// Percentile bootstrap confidence interval over a small sample (used for the
// per-policy seed aggregates).
struct ConfInterval {
    double lo = 0.0;
    double hi = 0.0;
};
ConfInterval bootstrap_ci95(std::span<const double> values, int resamples, uint64_t seed);

// Mean of the trailing k values (training-curve smoothing).
double moving_average_last(std::span<const double> values, size_t k);

}  // namespace fogsim
