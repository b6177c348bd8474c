#include "doctest.h"

#include <set>

#include "fanet/errors.hpp"
#include "fanet/features.hpp"

using namespace fanet;

namespace {

SimConfig tiny_config() {
    SimConfig cfg;
    cfg.node_count = 3;
    cfg.duration_s = 10.0;
    cfg.window_s = 5.0;
    cfg.traffic_connections = 1;
    return cfg;
}

std::vector<WindowSnapshot> flat_snapshots(int total_nodes) {
    return std::vector<WindowSnapshot>(static_cast<std::size_t>(total_nodes));
}

}  // namespace

TEST_CASE("feature names are unique and ordered to match the indices") {
    const auto& names = feature_names();
    std::set<std::string> uniq(names.begin(), names.end());
    CHECK(uniq.size() == kFeatureCount);
    CHECK(names[F_RreqSent] == "rreq_sent");
    CHECK(names[F_DeliveryRatioWindow] == "delivery_ratio_window");
    CHECK(names[F_AvgDestSeqDelta] == "avg_dest_seq_delta");
    CHECK(names[F_LinkBreaksDetected] == "link_breaks_detected");
    CHECK(names[F_DistanceTraveledM] == "distance_traveled_m");
}

TEST_CASE("idle node emits all-zero features") {
    SimConfig cfg = tiny_config();
    Collector col(cfg, {});
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    CHECK(!col.window_open());
    const auto& samples = col.samples();
    REQUIRE(samples.size() == 6);  // 3 nodes x 2 windows, ground station excluded
    for (const Sample& s : samples) {
        CHECK(s.node_id >= 1);
        CHECK(s.label == 0);
        for (double v : s.f) CHECK(v == 0.0);
    }
    CHECK(samples[0].window_start_s == 0.0);
    CHECK(samples[3].window_start_s == 5.0);
}

TEST_CASE("counters land in the right window and reset between windows") {
    SimConfig cfg = tiny_config();
    Collector col(cfg, {});
    col.bump(1, Counter::RreqSent);
    col.bump(1, Counter::RreqSent);
    col.bump(2, Counter::DataFwd, 3.0);
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.bump(1, Counter::RreqSent);
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    const auto& samples = col.samples();
    REQUIRE(samples.size() == 6);
    // ordering within a window follows node id
    CHECK(samples[0].node_id == 1);
    CHECK(samples[0].f[F_RreqSent] == 2.0);
    CHECK(samples[1].f[F_DataFwd] == 3.0);
    CHECK(samples[3].node_id == 1);
    CHECK(samples[3].f[F_RreqSent] == 1.0);
    CHECK(samples[4].f[F_DataFwd] == 0.0);
}

TEST_CASE("delivery ratio counts forwarded and received against dropped") {
    SimConfig cfg = tiny_config();
    Collector col(cfg, {});
    // node 1: 3 fwd + 1 recv vs 1 dropped -> 4/5
    col.bump(1, Counter::DataFwd, 3.0);
    col.bump(1, Counter::DataRecvAsDest);
    col.bump(1, Counter::DataDropped);
    // node 2: only drops -> 0
    col.bump(2, Counter::DataDropped, 4.0);
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    const auto& samples = col.samples();
    CHECK(samples[0].f[F_DeliveryRatioWindow] == doctest::Approx(0.8));
    CHECK(samples[1].f[F_DeliveryRatioWindow] == 0.0);
    CHECK(samples[2].f[F_DeliveryRatioWindow] == 0.0);  // no data at all
}

TEST_CASE("sequence statistics track max and mean delta over installs") {
    SimConfig cfg = tiny_config();
    Collector col(cfg, {});
    col.seq_observed(1, 10, 0, false);   // first install, no delta
    col.seq_observed(1, 14, 10, true);   // +4
    col.seq_observed(1, 114, 14, true);  // +100, a boosted reply
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    const auto& samples = col.samples();
    CHECK(samples[0].f[F_MaxDestSeqSeen] == 114.0);
    CHECK(samples[0].f[F_AvgDestSeqDelta] == doctest::Approx((0.0 + 4.0 + 100.0) / 3.0));
    // second window starts fresh
    CHECK(samples[3].f[F_MaxDestSeqSeen] == 0.0);
    CHECK(samples[3].f[F_AvgDestSeqDelta] == 0.0);
}

TEST_CASE("snapshots and kinematics fill the derived slots") {
    SimConfig cfg = tiny_config();
    Collector col(cfg, {});
    col.add_distance(1, 300.0);
    col.add_distance(1, 200.0);
    auto snaps = flat_snapshots(cfg.total_nodes());
    snaps[1].active_routes = 4;
    snaps[1].avg_hop_count = 2.5;
    snaps[1].neighbor_count = 7;
    col.close_window(5.0, snaps);
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    const auto& samples = col.samples();
    CHECK(samples[0].f[F_DistanceTraveledM] == doctest::Approx(500.0));
    CHECK(samples[0].f[F_AvgSpeedMps] == doctest::Approx(100.0));  // 500 m over 5 s
    CHECK(samples[0].f[F_ActiveRoutes] == 4.0);
    CHECK(samples[0].f[F_AvgHopCount] == 2.5);
    CHECK(samples[0].f[F_NeighborCount] == 7.0);
    // distance does not leak into the next window
    CHECK(samples[3].f[F_DistanceTraveledM] == 0.0);
    CHECK(samples[3].f[F_AvgSpeedMps] == 0.0);
}

TEST_CASE("attacker nodes are labeled malicious even when idle") {
    SimConfig cfg = tiny_config();
    cfg.attack_kind = AttackKind::Blackhole;
    cfg.attacker_ratio = 0.25;
    Collector col(cfg, {2});
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    for (const Sample& s : col.samples()) {
        CHECK(s.label == (s.node_id == 2 ? 1 : 0));
        CHECK(s.attack_kind == AttackKind::Blackhole);
        CHECK(s.attacker_ratio == 0.25);
    }
}

TEST_CASE("touching attacker-originated traffic marks the window") {
    SimConfig cfg = tiny_config();
    Collector col(cfg, {2});
    col.packet_touch(1, 2);  // node 1 relays something node 2 created
    col.packet_touch(3, 1);  // node 3 only saw honest traffic
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.packet_touch(3, 3);
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    const auto& samples = col.samples();
    CHECK(samples[0].label == 1);  // node 1, window 0
    CHECK(samples[1].label == 1);  // the attacker itself
    CHECK(samples[2].label == 0);  // node 3
    CHECK(samples[3].label == 0);  // node 1 clean again in window 1
    CHECK(samples[5].label == 0);
}

TEST_CASE("attacker-node-only labeling ignores propagation") {
    SimConfig cfg = tiny_config();
    cfg.label_mode = LabelMode::AttackerNodeOnly;
    Collector col(cfg, {2});
    col.packet_touch(1, 2);
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    const auto& samples = col.samples();
    CHECK(samples[0].label == 0);  // relay stays benign
    CHECK(samples[1].label == 1);  // attacker still flagged
}

TEST_CASE("ground station activity is tracked but emits no sample") {
    SimConfig cfg = tiny_config();
    Collector col(cfg, {});
    col.bump(0, Counter::DataRecvAsDest, 50.0);
    col.add_distance(0, 1.0);
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    for (const Sample& s : col.samples()) CHECK(s.node_id != 0);
}

TEST_CASE("window bookkeeping rejects out-of-order and past-the-end closes") {
    SimConfig cfg = tiny_config();
    Collector col(cfg, {});
    CHECK_THROWS_AS(col.close_window(7.5, flat_snapshots(cfg.total_nodes())), InternalError);
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    CHECK_THROWS_AS(col.close_window(5.0, flat_snapshots(cfg.total_nodes())), InternalError);
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    CHECK(!col.window_open());
    CHECK_THROWS_AS(col.close_window(15.0, flat_snapshots(cfg.total_nodes())), InternalError);
}

TEST_CASE("events after the final close are ignored") {
    SimConfig cfg = tiny_config();
    Collector col(cfg, {});
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    col.bump(1, Counter::RreqSent);  // late drain from the event loop
    col.packet_touch(1, 1);
    CHECK(col.samples().size() == 6);
    CHECK(col.samples()[0].f[F_RreqSent] == 0.0);
}

TEST_CASE("samples carry the run identity") {
    SimConfig cfg = tiny_config();
    cfg.topology_id = 4;
    cfg.attack_kind = AttackKind::Sinkhole;
    cfg.attacker_ratio = 0.15;
    Collector col(cfg, {3});
    col.close_window(5.0, flat_snapshots(cfg.total_nodes()));
    col.close_window(10.0, flat_snapshots(cfg.total_nodes()));
    for (const Sample& s : col.samples()) {
        CHECK(s.topology_id == 4);
        CHECK(s.attack_kind == AttackKind::Sinkhole);
        CHECK(s.attacker_ratio == 0.15);
    }
}
