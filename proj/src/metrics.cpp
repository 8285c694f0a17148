#include "fogsim/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fogsim/rng.hpp"

namespace fogsim {

const char* loop_name(Loop l) {
    switch (l) {
        case Loop::FogLoop: return "fog";
        case Loop::CloudLoop: return "cloud";
    }
    throw std::logic_error("loop_name: bad loop");
}

Loop loop_from_name(const std::string& name) {
    if (name == "fog") return Loop::FogLoop;
    if (name == "cloud") return Loop::CloudLoop;
    throw std::invalid_argument("unknown loop: " + name);
}

double mean_loop_delay(std::span<const DelayRecord> records, Loop loop) {
    double sum = 0.0;
    long n = 0;
    for (const DelayRecord& r : records) {
        if (r.loop != loop) continue;
        sum += r.total_response_ms;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("mean_loop_delay: no records for loop");
    return sum / static_cast<double>(n);
}

double mean_waiting(std::span<const DelayRecord> records, Loop loop) {
    double sum = 0.0;
    long n = 0;
    for (const DelayRecord& r : records) {
        if (r.loop != loop) continue;
        sum += r.waiting_ms;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("mean_waiting: no records for loop");
    return sum / static_cast<double>(n);
}

namespace {
constexpr const char* kCsvHeader =
    "uid,app,category,cluster,node,loop,latency_ms,waiting_ms,service_ms,response_ms,total_response_ms";

void append_row(std::string& out, const DelayRecord& r) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%ld,%d,%s,%d,%d,%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.uid, r.app_id,
                  category_name(r.category), r.cluster, r.node, loop_name(r.loop), r.latency_ms,
                  r.waiting_ms, r.service_ms, r.response_ms, r.total_response_ms);
    out += buf;
}
}  // namespace

std::string records_to_csv(std::span<const DelayRecord> records) {
    std::string out = kCsvHeader;
    out += "\n";
    for (const DelayRecord& r : records) append_row(out, r);
    return out;
}

void export_csv(std::span<const DelayRecord> records, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write csv file: " + path);
    f << records_to_csv(records);
    if (!f) throw std::runtime_error("failed writing csv file: " + path);
}

std::vector<DelayRecord> parse_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::invalid_argument("csv header mismatch");
    std::vector<DelayRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 11) throw std::invalid_argument("csv row has wrong field count");
        DelayRecord r;
        r.uid = std::stol(fields[0]);
        r.app_id = std::stoi(fields[1]);
        r.category = category_from_name(fields[2]);
        r.cluster = std::stoi(fields[3]);
        r.node = std::stoi(fields[4]);
        r.loop = loop_from_name(fields[5]);
        r.latency_ms = std::stod(fields[6]);
        r.waiting_ms = std::stod(fields[7]);
        r.service_ms = std::stod(fields[8]);
        r.response_ms = std::stod(fields[9]);
        r.total_response_ms = std::stod(fields[10]);
        out.push_back(r);
    }
    return out;
}

long DistributionMatrix::at(int app_id, int cluster, int node) const {
    auto it = counts_.find({app_id, cluster, node});
    return it == counts_.end() ? 0 : it->second;
}

long DistributionMatrix::total() const {
    long t = 0;
    for (const auto& [k, v] : counts_) t += v;
    return t;
}

void DistributionMatrix::add(int app_id, int cluster, int node) { ++counts_[{app_id, cluster, node}]; }

DistributionMatrix distribution_matrix(std::span<const DelayRecord> records) {
    DistributionMatrix m;
    for (const DelayRecord& r : records)
        if (r.loop == Loop::FogLoop) m.add(r.app_id, r.cluster, r.node);
    return m;
}

std::string summary_to_csv(std::span<const SummaryRow> rows) {
    std::string out = "policy,beta,horizon,seed,loop,mean_total_response_ms,mean_waiting_ms\n";
    for (const SummaryRow& r : rows) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%g,%g,%llu,%s,%.6f,%.6f\n", r.policy.c_str(), r.beta,
                      r.horizon, static_cast<unsigned long long>(r.seed), loop_name(r.loop),
                      r.mean_total_response_ms, r.mean_waiting_ms);
        out += buf;
    }
    return out;
}

ConfInterval bootstrap_ci95(std::span<const double> values, int resamples, uint64_t seed) {
    if (values.empty()) throw std::invalid_argument("bootstrap_ci95: empty sample");
    if (resamples < 1) throw std::invalid_argument("bootstrap_ci95: need at least one resample");
    Rng rng(seed);
    std::vector<double> means;
    means.reserve(static_cast<size_t>(resamples));
    const int n = static_cast<int>(values.size());
    for (int i = 0; i < resamples; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += values[static_cast<size_t>(rng.uniform_int(n))];
        means.push_back(sum / n);
    }
    std::sort(means.begin(), means.end());
    auto pick = [&](double q) {
        double pos = q * static_cast<double>(means.size() - 1);
        return means[static_cast<size_t>(std::lround(pos))];
    };
    return {pick(0.025), pick(0.975)};
}

double moving_average_last(std::span<const double> values, size_t k) {
    if (values.empty()) throw std::invalid_argument("moving_average_last: empty input");
    size_t take = std::min(k, values.size());
    double sum = std::accumulate(values.end() - static_cast<long>(take), values.end(), 0.0);
    return sum / static_cast<double>(take);
}

}  // namespace fogsim
