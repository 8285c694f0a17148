#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fogsim/des.hpp"
#include "fogsim/metrics.hpp"
#include "fogsim/policy.hpp"

using namespace fogsim;

namespace {
DelayRecord rec(long uid, Loop loop, double total, double waiting = 1.0) {
    DelayRecord r;
    r.uid = uid;
    r.app_id = 0;
    r.category = Category::Light;
    r.cluster = 0;
    r.node = 1;
    r.loop = loop;
    r.waiting_ms = waiting;
    r.service_ms = 2.0;
    r.response_ms = r.waiting_ms + r.service_ms;
    r.latency_ms = total - r.response_ms;
    r.total_response_ms = total;
    return r;
}
}  // namespace

TEST_CASE("mean loop delay averages total response per loop") {
    std::vector<DelayRecord> rs{rec(0, Loop::FogLoop, 16.0)};
    CHECK(mean_loop_delay(rs, Loop::FogLoop) == doctest::Approx(16.0));

    rs = {rec(0, Loop::FogLoop, 10.0), rec(1, Loop::FogLoop, 20.0), rec(2, Loop::FogLoop, 30.0),
          rec(3, Loop::CloudLoop, 500.0)};
    CHECK(mean_loop_delay(rs, Loop::FogLoop) == doctest::Approx(20.0));
    CHECK(mean_loop_delay(rs, Loop::CloudLoop) == doctest::Approx(500.0));
    CHECK_THROWS_AS(mean_loop_delay(std::vector<DelayRecord>{}, Loop::FogLoop),
                    std::invalid_argument);
}

TEST_CASE("mean loop delay agrees with a hand-traced queueing example") {
    // Two jobs, 1 ms apart, 10 ms service, zero transit: totals 10 and 19.
    std::vector<Node> nodes{{0, Role::IotCluster, 0, 0}, {1, Role::Fog, 100, 0},
                            {2, Role::Cloud, 1000, 0}};
    std::vector<Link> links{{0, 1, 1e12, 0}, {1, 2, 1e12, 0}};
    Topology t = Topology::from_parts(nodes, links, 1000);
    auto apps = std::vector<AppSpec>{default_apps()[0]};
    apps[0].p_cloud = 0.0;

    struct Pin final : PlacementPolicy {
        int decide(const DecisionContext&, double) override { return 1; }
        std::string name() const override { return "pin"; }
    } pin;
    Engine e(t, apps, std::vector<ScriptEntry>{{0.0, 0, 0}, {1.0, 0, 0}}, pin, 1e6, 1);
    auto res = e.run();
    CHECK(mean_loop_delay(res.records, Loop::FogLoop) == doctest::Approx((10.0 + 19.0) / 2.0));
    CHECK(mean_waiting(res.records, Loop::FogLoop) == doctest::Approx(4.5));
}

TEST_CASE("csv export writes the exact header and one row per record") {
    CHECK(records_to_csv({}) ==
          "uid,app,category,cluster,node,loop,latency_ms,waiting_ms,service_ms,response_ms,"
          "total_response_ms\n");

    std::vector<DelayRecord> rs{rec(0, Loop::FogLoop, 16.0), rec(1, Loop::CloudLoop, 42.5)};
    std::string csv = records_to_csv(rs);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.back() == '\n');

    auto path = (std::filesystem::temp_directory_path() / "fogsim_metrics_test.csv").string();
    export_csv(rs, path);
    std::ifstream f(path);
    std::string on_disk((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(on_disk == csv);
    std::filesystem::remove(path);
}

TEST_CASE("csv parses back to the identical serialization") {
    std::vector<DelayRecord> rs;
    for (int i = 0; i < 25; ++i)
        rs.push_back(rec(i, i % 3 == 0 ? Loop::CloudLoop : Loop::FogLoop, 10.0 + 0.1234567 * i));
    std::string csv = records_to_csv(rs);
    auto parsed = parse_csv(csv);
    REQUIRE(parsed.size() == rs.size());
    CHECK(records_to_csv(parsed) == csv);
    CHECK_THROWS_AS(parse_csv("bogus\n"), std::invalid_argument);
}

TEST_CASE("distribution matrix tallies fog-loop assignments") {
    CHECK(distribution_matrix({}).total() == 0);

    std::vector<DelayRecord> rs;
    DelayRecord a = rec(0, Loop::FogLoop, 10.0);
    a.app_id = 1;
    a.cluster = 3;
    a.node = 7;
    rs.push_back(a);
    rs.push_back(a);
    DelayRecord b = a;
    b.loop = Loop::CloudLoop;  // ignored by the tally
    rs.push_back(b);
    auto m = distribution_matrix(rs);
    CHECK(m.at(1, 3, 7) == 2);
    CHECK(m.at(0, 0, 0) == 0);
    CHECK(m.total() == 2);
}

TEST_CASE("round robin spreads each pair's workloads within the cycle bound") {
    // Deterministic rotation over (app, cluster) pairs against a 3-node cycle.
    std::vector<int> fogs{0, 1, 2};
    RoundRobinPolicy rr;
    DistributionMatrix m;
    AppSpec apps[2] = {default_apps()[0], default_apps()[1]};
    for (int i = 0; i < 1000; ++i) {
        int pair = i % 4;  // (app, cluster) in {0,1} x {10, 20}
        int app = pair % 2;
        int cluster = pair < 2 ? 10 : 20;
        Workload wl;
        wl.uid = i;
        wl.source_cluster = cluster;
        DecisionContext ctx{wl, apps[app], 0, fogs, 0.0, nullptr};
        m.add(app, cluster, rr.decide(ctx, 0.0));
    }
    for (int app = 0; app < 2; ++app)
        for (int cluster : {10, 20}) {
            long lo = 1 << 30, hi = 0;
            for (int node : fogs) {
                lo = std::min(lo, m.at(app, cluster, node));
                hi = std::max(hi, m.at(app, cluster, node));
            }
            CHECK(hi - lo <= static_cast<long>(fogs.size()));
        }
    CHECK(m.total() == 1000);
}

TEST_CASE("summary csv carries the documented columns") {
    std::vector<SummaryRow> rows{{"rr", 100.0, 10000.0, 3, Loop::FogLoop, 12.5, 4.25}};
    std::string csv = summary_to_csv(rows);
    CHECK(csv.rfind("policy,beta,horizon,seed,loop,mean_total_response_ms,mean_waiting_ms\n", 0) == 0);
    CHECK(csv.find("rr,100,10000,3,fog,12.500000,4.250000\n") != std::string::npos);
}

TEST_CASE("bootstrap interval brackets the sample mean") {
    std::vector<double> constant{5.0, 5.0, 5.0, 5.0};
    auto ci = bootstrap_ci95(constant, 200, 1);
    CHECK(ci.lo == doctest::Approx(5.0));
    CHECK(ci.hi == doctest::Approx(5.0));

    std::vector<double> sample{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    auto ci2 = bootstrap_ci95(sample, 1000, 2);
    CHECK(ci2.lo <= 3.5);
    CHECK(ci2.hi >= 3.5);
    CHECK(ci2.lo < ci2.hi);
    CHECK_THROWS_AS(bootstrap_ci95({}, 100, 1), std::invalid_argument);
}

TEST_CASE("trailing moving average") {
    std::vector<double> vals;
    for (int i = 1; i <= 20; ++i) vals.push_back(i);
    CHECK(moving_average_last(vals, 10) == doctest::Approx(15.5));
    CHECK(moving_average_last(vals, 100) == doctest::Approx(10.5));
    CHECK_THROWS_AS(moving_average_last({}, 10), std::invalid_argument);
}
