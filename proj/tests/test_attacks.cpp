#include "doctest.h"

#include <algorithm>
#include <set>

#include "fanet/attacks.hpp"
#include "fanet/errors.hpp"
#include "test_helpers.hpp"

using namespace fanet;
using fanet::testing::TestNet;

namespace {

std::vector<int> uav_ids(int count) {
    std::vector<int> ids;
    for (int i = 1; i <= count; ++i) ids.push_back(i);
    return ids;
}

}  // namespace

TEST_CASE("zero ratio selects nobody") {
    auto a = assign_attackers(7, 0.0, {}, uav_ids(50), AttackKind::Blackhole);
    CHECK(a.attacker_ids.empty());
}

TEST_CASE("selection count rounds the ratio") {
    auto a = assign_attackers(7, 0.10, {}, uav_ids(50), AttackKind::Sinkhole);
    CHECK(a.attacker_ids.size() == 5);
    auto b = assign_attackers(7, 0.05, {}, uav_ids(50), AttackKind::Sinkhole);
    CHECK(b.attacker_ids.size() == 3);  // llround(2.5) rounds up
    auto c = assign_attackers(7, 0.25, {}, uav_ids(20), AttackKind::Sinkhole);
    CHECK(c.attacker_ids.size() == 5);
}

TEST_CASE("same seed and ratio pick the same nodes for every attack kind") {
    auto s = assign_attackers(42, 0.15, {}, uav_ids(50), AttackKind::Sinkhole);
    auto b = assign_attackers(42, 0.15, {}, uav_ids(50), AttackKind::Blackhole);
    auto f = assign_attackers(42, 0.15, {}, uav_ids(50), AttackKind::Flooding);
    CHECK(s.attacker_ids == b.attacker_ids);
    CHECK(s.attacker_ids == f.attacker_ids);
    CHECK(s.kind == AttackKind::Sinkhole);
    CHECK(f.kind == AttackKind::Flooding);
    // distinct seed moves the pick
    auto other = assign_attackers(43, 0.15, {}, uav_ids(50), AttackKind::Sinkhole);
    CHECK(s.attacker_ids != other.attacker_ids);
    auto wider = assign_attackers(42, 0.25, {}, uav_ids(50), AttackKind::Sinkhole);
    CHECK(wider.attacker_ids.size() == 13);
}

TEST_CASE("traffic endpoints are never attackers") {
    std::vector<std::pair<int, int>> pairs = {{1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto a = assign_attackers(seed, 0.25, pairs, uav_ids(50), AttackKind::Blackhole);
        CHECK(a.attacker_ids.size() == 13);
        for (int id : a.attacker_ids) {
            CHECK(id > 10);
            CHECK(id <= 50);
        }
    }
}

TEST_CASE("too few eligible nodes is a configuration error") {
    std::vector<std::pair<int, int>> pairs = {{1, 2}, {3, 4}, {5, 6}, {7, 8}};
    CHECK_THROWS_AS(assign_attackers(1, 0.25, pairs, uav_ids(10), AttackKind::Blackhole),
                    ConfigError);
}

TEST_CASE("forged reply advertises an inflated sequence at one hop") {
    Packet rreq;
    rreq.kind = PacketKind::Rreq;
    rreq.created_by = 3;
    rreq.size_bytes = 64;
    rreq.origin = 3;
    rreq.origin_seq = 4;
    rreq.rreq_id = 9;
    rreq.destination = 8;
    rreq.dest_seq = 12;
    rreq.hop_count = 2;
    rreq.from = 5;
    Packet forged = sinkhole_forged_rrep(6, rreq, 100, 64);
    CHECK(forged.kind == PacketKind::Rrep);
    CHECK(forged.created_by == 6);
    CHECK(forged.origin == 3);
    CHECK(forged.destination == 8);
    CHECK(forged.dest_seq == 112);
    CHECK(forged.hop_count == 1);
    CHECK(forged.size_bytes == 64);
}

TEST_CASE("sinkhole displaces a legitimate longer route") {
    // line 0-1-2-3-4 with attacker 5 adjacent to 0; real path to 4 is 4 hops
    TestNet net(6);
    net.link(0, 1);
    net.link(1, 2);
    net.link(2, 3);
    net.link(3, 4);
    net.link(0, 5);
    AttackerProfile p = profile_for(AttackKind::Sinkhole);
    net.node(5).set_profile(p);
    net.node(0).originate_data(4, 512, 0.0);
    net.pump(0.0);
    const RouteEntry* r = net.node(0).route(4);
    REQUIRE(r != nullptr);
    CHECK(r->valid);
    CHECK(r->next_hop == 5);
    CHECK(r->hop_count == 2);
    CHECK(r->dest_seq >= 100);
    auto& s = net.sink();
    CHECK(s.count(5, Counter::RrepOriginated) == 1);
    CHECK(s.count(5, Counter::RreqFwd) == 0);  // attracted, never relayed
}

TEST_CASE("sinkhole captures data and poisons its own rediscovery") {
    TestNet net(3);
    net.link(0, 1);
    net.link(1, 2);
    net.node(1).set_profile(profile_for(AttackKind::Sinkhole));
    net.node(0).originate_data(2, 512, 0.0);
    net.pump(0.0);
    auto& s = net.sink();
    // the attacker buffered the attracted packet and rediscovered, but the
    // victim answered from its forged-seq cache, so the packet circulates
    // between the two until the hop cap drains it; it never reaches 2
    CHECK(s.count(2, Counter::DataRecvAsDest) == 0);
    CHECK(s.count(1, Counter::DataBuffered) >= 1);
    double dropped = s.count(0, Counter::DataDropped) + s.count(1, Counter::DataDropped) +
                     s.count(2, Counter::DataDropped);
    CHECK(dropped == 1);
    // the inflated number came back around into the attacker's own table
    REQUIRE(net.node(1).route(2) != nullptr);
    CHECK(net.node(1).route(2)->dest_seq >= 100);
    // the genuine reply from the destination lost to the forged freshness
    CHECK(s.count(1, Counter::RrepRecv) == 2);
}

TEST_CASE("hop cap drains a two-node forwarding cycle") {
    TestNet net(2);
    net.link(0, 1);
    // hand-build a mutual route pair for an unreachable third node
    Packet fake;
    fake.kind = PacketKind::Rrep;
    fake.created_by = 1;
    fake.size_bytes = 64;
    fake.origin = 0;
    fake.destination = 9;
    fake.dest_seq = 50;
    fake.hop_count = 1;
    fake.from = 1;
    net.node(0).handle_packet(fake, 0.0);
    fake.created_by = 0;
    fake.origin = 1;
    fake.from = 0;
    net.node(1).handle_packet(fake, 0.0);
    REQUIRE(net.node(0).route(9)->next_hop == 1);
    REQUIRE(net.node(1).route(9)->next_hop == 0);
    net.node(0).originate_data(9, 512, 0.0);
    net.pump(0.0);
    auto& s = net.sink();
    double dropped = s.count(0, Counter::DataDropped) + s.count(1, Counter::DataDropped);
    CHECK(dropped == 1);
    double bounces = s.count(0, Counter::DataFwd) + s.count(1, Counter::DataFwd);
    CHECK(bounces <= 2 * 64 + 2);
    CHECK(bounces >= 64);
}

TEST_CASE("blackhole swallows every data packet") {
    TestNet net(3);
    net.link(0, 1);
    net.link(1, 2);
    net.node(1).set_profile(profile_for(AttackKind::Blackhole));
    Packet d;
    d.kind = PacketKind::Data;
    d.created_by = 0;
    d.size_bytes = 512;
    d.destination = 2;
    d.from = 0;
    for (int i = 0; i < 100; ++i) {
        d.data_id = i;
        net.node(1).handle_packet(d, 0.0);
    }
    auto& s = net.sink();
    CHECK(s.count(1, Counter::DataDropped) == 100);
    CHECK(s.count(1, Counter::DataFwd) == 0);
    CHECK(s.count(1, Counter::DataBuffered) == 0);
    CHECK(s.count(1, Counter::RerrSent) == 0);  // silent drop, no error report
    // control plane still lures like a sinkhole
    Packet rreq;
    rreq.kind = PacketKind::Rreq;
    rreq.created_by = 0;
    rreq.size_bytes = 64;
    rreq.origin = 0;
    rreq.origin_seq = 1;
    rreq.rreq_id = 1;
    rreq.destination = 2;
    rreq.dest_seq = 3;
    rreq.hop_count = 0;
    rreq.from = 0;
    net.node(1).handle_packet(rreq, 0.0);
    CHECK(s.count(1, Counter::RrepOriginated) == 1);
}

TEST_CASE("blackhole drops even packets addressed to itself") {
    TestNet net(2);
    net.link(0, 1);
    net.node(1).set_profile(profile_for(AttackKind::Blackhole));
    Packet d;
    d.kind = PacketKind::Data;
    d.created_by = 0;
    d.size_bytes = 512;
    d.destination = 1;
    d.from = 0;
    net.node(1).handle_packet(d, 0.0);
    auto& s = net.sink();
    CHECK(s.count(1, Counter::DataDropped) == 1);
    CHECK(s.count(1, Counter::DataRecvAsDest) == 0);
}

TEST_CASE("flooding burst emits ten fresh floods at one target") {
    TestNet net(6);
    net.link(0, 1);
    net.node(0).set_profile(profile_for(AttackKind::Flooding));
    Rng rng(seed_stream(7, "flooding", 0));
    std::vector<int> others = {1, 2, 3, 4, 5};
    std::size_t log_before = net.log().size();
    net.node(0).flooding_burst(10.0, rng, others);
    auto& s = net.sink();
    CHECK(s.count(0, Counter::RreqOriginated) == 10);
    CHECK(s.count(0, Counter::RreqSent) == 10);
    REQUIRE(net.log().size() == log_before + 10);
    const auto& log = net.log();
    int dest = log[log_before].destination;
    CHECK(std::find(others.begin(), others.end(), dest) != others.end());
    for (std::size_t i = 0; i < 10; ++i) {
        const Packet& p = log[log_before + i];
        CHECK(p.kind == PacketKind::Rreq);
        CHECK(p.origin == 0);
        CHECK(p.destination == dest);  // one target per burst
        if (i > 0) {
            CHECK(p.rreq_id == log[log_before + i - 1].rreq_id + 1);
            CHECK(p.origin_seq == log[log_before + i - 1].origin_seq + 1);
        }
    }
}

TEST_CASE("profiles map onto behaviors") {
    AttackerProfile s = profile_for(AttackKind::Sinkhole);
    CHECK(s.sinkhole);
    CHECK(!s.blackhole);
    CHECK(!s.flooding);
    AttackerProfile b = profile_for(AttackKind::Blackhole);
    CHECK(b.sinkhole);
    CHECK(b.blackhole);
    CHECK(!b.flooding);
    AttackerProfile f = profile_for(AttackKind::Flooding);
    CHECK(!f.sinkhole);
    CHECK(!f.blackhole);
    CHECK(f.flooding);
    AttackerProfile none = profile_for(AttackKind::None);
    CHECK(!none.sinkhole);
    CHECK(!none.blackhole);
    CHECK(!none.flooding);
}
