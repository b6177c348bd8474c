#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "fanet/config.hpp"
#include "fanet/errors.hpp"
#include "fanet/rng.hpp"
#include "fanet/textio.hpp"
#include "fanet/vec3.hpp"

using namespace fanet;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    std::string path = "/tmp/" + name;
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("fnv1a is deterministic and input-sensitive") {
    Fnv1a a, b;
    a.put_str("mobility");
    a.put_u64(7);
    b.put_str("mobility");
    b.put_u64(7);
    CHECK(a.value() == b.value());

    Fnv1a c;
    c.put_str("mobility");
    c.put_u64(8);
    CHECK(c.value() != a.value());

    // length mark keeps concatenation ambiguity out
    Fnv1a d, e;
    d.put_str("ab");
    d.put_str("c");
    e.put_str("a");
    e.put_str("bc");
    CHECK(d.value() != e.value());
}

TEST_CASE("seed_stream separates tags and indices") {
    std::set<std::uint64_t> seen;
    seen.insert(seed_stream(42, "topology", 0));
    seen.insert(seed_stream(42, "topology", 1));
    seen.insert(seed_stream(42, "traffic", 0));
    seen.insert(seed_stream(43, "topology", 0));
    seen.insert(seed_stream(42, "topology", 0, 1));
    CHECK(seen.size() == 5);
    CHECK(seed_stream(42, "topology", 3) == seed_stream(42, "topology", 3));
}

TEST_CASE("rng sequences repeat under the same seed") {
    Rng a(123), b(123), c(124);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        std::uint64_t x = a.next_u64();
        if (x != b.next_u64()) all_equal = false;
        if (x != c.next_u64()) any_diff = true;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform01 stays in [0,1) and covers the range") {
    Rng r(9);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("uniform_int is bounded and roughly flat") {
    Rng r(5);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        std::uint64_t v = r.uniform_int(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("normal draws match their first two moments") {
    Rng r(77);
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = r.normal();
        sum += x;
        sq += x * x;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.03);
    CHECK(std::fabs(var - 1.0) < 0.05);

    Rng r2(77);
    double shifted = 0.0;
    for (int i = 0; i < n; ++i) shifted += r2.normal(10.0, 2.0);
    CHECK(std::fabs(shifted / n - 10.0) < 0.1);
}

TEST_CASE("shuffle permutes without losing elements") {
    Rng r(3);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto orig = v;
    r.shuffle(v);
    CHECK(v != orig);  // 1/10! chance of false alarm, fixed seed makes it stable
    std::set<int> s(v.begin(), v.end());
    CHECK(s.size() == 10);
}

TEST_CASE("sample_without_replacement yields distinct in-range picks") {
    Rng r(11);
    auto picks = r.sample_without_replacement(50, 12);
    REQUIRE(picks.size() == 12);
    std::set<std::size_t> s(picks.begin(), picks.end());
    CHECK(s.size() == 12);
    for (auto p : picks) CHECK(p < 50);

    Rng r2(11);
    CHECK(r2.sample_without_replacement(50, 12) == picks);
}

TEST_CASE("vec3 arithmetic and distance") {
    Vec3 a{1.0, 2.0, 3.0}, b{4.0, 6.0, 3.0};
    CHECK(distance(a, b) == doctest::Approx(5.0));
    Vec3 c = (a + b) * 0.5;
    CHECK(c.x == doctest::Approx(2.5));
    CHECK(c[1] == doctest::Approx(4.0));
    CHECK((b - a).norm() == doctest::Approx(5.0));
}

TEST_CASE("format_double round-trips exactly") {
    std::vector<double> vals{0.0,   1.0,    -1.0,        0.1,     1.0 / 3.0, 2.5,
                             1e-8,  1e8,    372.4e-6,    -0.0625, 1e20,      123456.789,
                             1e-30, 0.9526, 1e300,       1e-300};
    Rng r(202);
    for (int i = 0; i < 500; ++i) vals.push_back(r.normal(0.0, 1e6));
    for (double v : vals) {
        std::string s = format_double(v);
        double back = parse_double(s);
        CHECK(back == v);
    }
    // integral doubles print without an exponent so spreadsheets stay happy
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("format helpers") {
    CHECK(format_percent(0.98333) == "98.33%");
    CHECK(format_fixed(2.5, 1) == "2.5");
}

TEST_CASE("parse helpers are strict") {
    CHECK(parse_double("2.5") == doctest::Approx(2.5));
    CHECK(parse_int("42") == 42);
    CHECK_THROWS(parse_double("2.5x"));
    CHECK_THROWS(parse_int(""));
    CHECK_THROWS(parse_int("4.2"));
}

TEST_CASE("default configuration is valid") {
    SimConfig c;
    CHECK(c.validate().empty());
    CHECK(c.total_nodes() == 51);
    CHECK(c.gbs_id() == 0);
    CHECK(c.area_center().x == doctest::Approx(6000.0));
    CHECK(c.area_center().z == doctest::Approx(150.0));
}

TEST_CASE("validate lists every violation at once") {
    SimConfig c;
    c.node_count = 0;
    c.attacker_ratio = 0.5;
    c.alpha_min = 0.0;
    c.duration_s = 7.0;  // not a whole number of 5 s windows
    auto v = c.validate();
    CHECK(v.size() >= 4);
    bool saw_ratio = false;
    for (const auto& s : v)
        if (s.find("attacker_ratio") != std::string::npos) saw_ratio = true;
    CHECK(saw_ratio);
    CHECK_THROWS_AS(c.validate_or_throw(), ConfigError);
}

TEST_CASE("attack kind and ratio must agree") {
    SimConfig c;
    c.attack_kind = AttackKind::Sinkhole;
    c.attacker_ratio = 0.0;
    CHECK(!c.validate().empty());
    c.attacker_ratio = 0.1;
    CHECK(c.validate().empty());
    c.attack_kind = AttackKind::None;
    CHECK(!c.validate().empty());
}

TEST_CASE("enum round trips") {
    for (auto k : {AttackKind::None, AttackKind::Sinkhole, AttackKind::Blackhole,
                   AttackKind::Flooding})
        CHECK(attack_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(attack_kind_from_string("wormhole"), ConfigError);
    for (auto m : {LabelMode::Propagate, LabelMode::AttackerNodeOnly})
        CHECK(label_mode_from_string(to_string(m)) == m);
}

TEST_CASE("grid accounting covers the full default sweep") {
    GridConfig g;
    CHECK(g.runs_per_topology() == 16);
    CHECK(g.total_runs() == 160);
}

TEST_CASE("simulate config loads from json") {
    auto path = write_temp("fanet_cfg_ok.json", R"({
      "sim": {
        "node_count": 20,
        "duration_s": 600,
        "area_m": [1500, 1500, 150],
        "avg_speed_mps": 25,
        "traffic_connections": 5,
        "aodv": {"buffer_capacity": 32},
        "label_mode": "propagate"
      },
      "grid": {"topologies": 3, "attacks": ["sinkhole", "flooding"], "ratios": [0.1, 0.25]}
    })");
    auto cfg = load_simulate_config(path);
    CHECK(cfg.sim.node_count == 20);
    CHECK(cfg.sim.duration_s == doctest::Approx(600.0));
    CHECK(cfg.sim.area_m.z == doctest::Approx(150.0));
    CHECK(cfg.sim.aodv.buffer_capacity == 32);
    CHECK(cfg.sim.tx_range_m == doctest::Approx(250.0));  // untouched default
    CHECK(cfg.grid.topologies == 3);
    REQUIRE(cfg.grid.attacks.size() == 2);
    CHECK(cfg.grid.attacks[1] == AttackKind::Flooding);
    CHECK(cfg.grid.total_runs() == 3 * (1 + 4));
}

TEST_CASE("unknown keys are rejected") {
    auto path = write_temp("fanet_cfg_bad_key.json",
                           R"({"sim": {"node_count": 20, "nodecount": 20}})");
    CHECK_THROWS_AS(load_simulate_config(path), ConfigError);
    auto path2 = write_temp("fanet_cfg_bad_root.json", R"({"simulation": {}})");
    CHECK_THROWS_AS(load_simulate_config(path2), ConfigError);
}

TEST_CASE("malformed json and missing files raise distinct categories") {
    auto path = write_temp("fanet_cfg_malformed.json", "{oops");
    CHECK_THROWS_AS(load_simulate_config(path), ConfigError);
    CHECK_THROWS_AS(load_simulate_config("/tmp/does_not_exist_fanet.json"), IoError);
}

TEST_CASE("loaded config is validated") {
    auto path = write_temp("fanet_cfg_invalid.json", R"({"sim": {"node_count": -3}})");
    CHECK_THROWS_AS(load_simulate_config(path), ConfigError);
    auto path2 = write_temp("fanet_cfg_bad_ratio.json", R"({"grid": {"ratios": [0.3]}})");
    CHECK_THROWS_AS(load_simulate_config(path2), ConfigError);
}
