#include "fanet/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fanet/errors.hpp"
#include "json.hpp"

namespace fanet {

const char* to_string(AttackKind k) {
    switch (k) {
        case AttackKind::None: return "none";
        case AttackKind::Sinkhole: return "sinkhole";
        case AttackKind::Blackhole: return "blackhole";
        case AttackKind::Flooding: return "flooding";
    }
    return "none";
}

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "none") return AttackKind::None;
    if (s == "sinkhole") return AttackKind::Sinkhole;
    if (s == "blackhole") return AttackKind::Blackhole;
    if (s == "flooding") return AttackKind::Flooding;
    throw ConfigError("unknown attack kind: '" + s + "'");
}

const char* to_string(LabelMode m) {
    return m == LabelMode::Propagate ? "propagate" : "attacker_node_only";
}

LabelMode label_mode_from_string(const std::string& s) {
    if (s == "propagate") return LabelMode::Propagate;
    if (s == "attacker_node_only") return LabelMode::AttackerNodeOnly;
    throw ConfigError("unknown label mode: '" + s + "'");
}

std::vector<std::string> SimConfig::validate() const {
    std::vector<std::string> v;
    auto positive = [&](double x, const char* name) {
        if (!(x > 0.0)) v.push_back(std::string(name) + " must be strictly positive");
    };
    positive(area_m.x, "area_m.x");
    positive(area_m.y, "area_m.y");
    positive(area_m.z, "area_m.z");
    positive(duration_s, "duration_s");
    positive(avg_speed_mps, "avg_speed_mps");
    positive(tx_range_m, "tx_range_m");
    positive(bandwidth_bps, "bandwidth_bps");
    positive(packet_rate_hz, "packet_rate_hz");
    positive(mobility_tick_s, "mobility_tick_s");
    positive(window_s, "window_s");
    if (packet_size_bytes <= 0) v.push_back("packet_size_bytes must be strictly positive");
    if (node_count < 1) v.push_back("node_count must be at least 1 UAV");
    if (total_nodes() < 2) v.push_back("need at least 2 nodes including the ground station");
    if (traffic_connections < 0) v.push_back("traffic_connections must be non-negative");
    if (2 * traffic_connections > node_count)
        v.push_back("traffic_connections needs 2 distinct UAV endpoints per connection");
    if (!(alpha_min > 0.0 && alpha_max < 1.0 && alpha_min <= alpha_max))
        v.push_back("alpha_range must satisfy 0 < min <= max < 1");
    if (!(attacker_ratio >= 0.0 && attacker_ratio <= 0.25))
        v.push_back("attacker_ratio must lie in [0, 0.25]");
    if (attack_kind != AttackKind::None && attacker_ratio <= 0.0)
        v.push_back("attacker_ratio must be positive when an attack is configured");
    if (attack_kind == AttackKind::None && attacker_ratio > 0.0)
        v.push_back("attacker_ratio must be 0 for attack-free runs");
    if (window_s > 0.0 && std::fmod(duration_s, window_s) != 0.0)
        v.push_back("duration_s must be a whole number of windows");
    if (mobility_tick_s > 0.0 && window_s > 0.0 && std::fmod(window_s, mobility_tick_s) != 0.0)
        v.push_back("window_s must be a whole number of mobility ticks");
    if (aodv.route_lifetime_s <= 0.0) v.push_back("aodv.route_lifetime_s must be strictly positive");
    if (aodv.discovery_timeout_s <= 0.0)
        v.push_back("aodv.discovery_timeout_s must be strictly positive");
    if (aodv.buffer_capacity < 1) v.push_back("aodv.buffer_capacity must be at least 1");
    if (aodv.ctrl_packet_bytes < 1) v.push_back("aodv.ctrl_packet_bytes must be at least 1");
    if (seq_boost < 1) v.push_back("attack.seq_boost must be at least 1");
    return v;
}

void SimConfig::validate_or_throw() const {
    auto v = validate();
    if (v.empty()) return;
    std::ostringstream os;
    os << "invalid configuration (" << v.size() << " violation" << (v.size() > 1 ? "s" : "")
       << "):";
    for (const auto& s : v) os << "\n  - " << s;
    throw ConfigError(os.str());
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void load_sim_section(const json& j, SimConfig& c) {
    reject_unknown_keys(j, {"area_m", "duration_s", "node_count", "avg_speed_mps", "tx_range_m",
                            "bandwidth_bps", "traffic_connections", "packet_size_bytes",
                            "packet_rate_hz", "alpha_range", "mobility_tick_s", "window_s",
                            "aodv", "attack", "label_mode"},
                        "sim");
    if (j.contains("area_m")) {
        auto a = j.at("area_m");
        if (!a.is_array() || a.size() != 3) throw ConfigError("sim.area_m must be [x, y, z]");
        c.area_m = {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
    }
    if (j.contains("duration_s")) c.duration_s = j.at("duration_s").get<double>();
    if (j.contains("node_count")) c.node_count = j.at("node_count").get<int>();
    if (j.contains("avg_speed_mps")) c.avg_speed_mps = j.at("avg_speed_mps").get<double>();
    if (j.contains("tx_range_m")) c.tx_range_m = j.at("tx_range_m").get<double>();
    if (j.contains("bandwidth_bps")) c.bandwidth_bps = j.at("bandwidth_bps").get<double>();
    if (j.contains("traffic_connections"))
        c.traffic_connections = j.at("traffic_connections").get<int>();
    if (j.contains("packet_size_bytes")) c.packet_size_bytes = j.at("packet_size_bytes").get<int>();
    if (j.contains("packet_rate_hz")) c.packet_rate_hz = j.at("packet_rate_hz").get<double>();
    if (j.contains("alpha_range")) {
        auto a = j.at("alpha_range");
        if (!a.is_array() || a.size() != 2) throw ConfigError("sim.alpha_range must be [min, max]");
        c.alpha_min = a[0].get<double>();
        c.alpha_max = a[1].get<double>();
    }
    if (j.contains("mobility_tick_s")) c.mobility_tick_s = j.at("mobility_tick_s").get<double>();
    if (j.contains("window_s")) c.window_s = j.at("window_s").get<double>();
    if (j.contains("label_mode"))
        c.label_mode = label_mode_from_string(j.at("label_mode").get<std::string>());
    if (j.contains("aodv")) {
        auto a = j.at("aodv");
        reject_unknown_keys(a, {"route_lifetime_s", "discovery_timeout_s", "buffer_capacity",
                                "ctrl_packet_bytes"},
                            "sim.aodv");
        if (a.contains("route_lifetime_s"))
            c.aodv.route_lifetime_s = a.at("route_lifetime_s").get<double>();
        if (a.contains("discovery_timeout_s"))
            c.aodv.discovery_timeout_s = a.at("discovery_timeout_s").get<double>();
        if (a.contains("buffer_capacity")) c.aodv.buffer_capacity = a.at("buffer_capacity").get<int>();
        if (a.contains("ctrl_packet_bytes"))
            c.aodv.ctrl_packet_bytes = a.at("ctrl_packet_bytes").get<int>();
    }
    if (j.contains("attack")) {
        auto a = j.at("attack");
        reject_unknown_keys(a, {"seq_boost"}, "sim.attack");
        if (a.contains("seq_boost")) c.seq_boost = a.at("seq_boost").get<long>();
    }
}

}  // namespace

SimulateConfig load_simulate_config(const std::string& path) {
    json j = parse_file(path);
    reject_unknown_keys(j, {"sim", "grid"}, "config root");
    SimulateConfig cfg;
    if (j.contains("sim")) load_sim_section(j.at("sim"), cfg.sim);
    if (j.contains("grid")) {
        auto g = j.at("grid");
        reject_unknown_keys(g, {"topologies", "attacks", "ratios"}, "grid");
        if (g.contains("topologies")) cfg.grid.topologies = g.at("topologies").get<int>();
        if (g.contains("attacks")) {
            cfg.grid.attacks.clear();
            for (const auto& s : g.at("attacks")) {
                AttackKind k = attack_kind_from_string(s.get<std::string>());
                if (k == AttackKind::None)
                    throw ConfigError("grid.attacks must not list 'none'; the attack-free run is implicit");
                cfg.grid.attacks.push_back(k);
            }
        }
        if (g.contains("ratios")) {
            cfg.grid.ratios.clear();
            for (const auto& r : g.at("ratios")) cfg.grid.ratios.push_back(r.get<double>());
        }
    }
    if (cfg.grid.topologies < 1) throw ConfigError("grid.topologies must be at least 1");
    for (double r : cfg.grid.ratios)
        if (!(r > 0.0 && r <= 0.25))
            throw ConfigError("grid.ratios entries must lie in (0, 0.25]");
    // validate the base simulation parameters on an attack-free instance
    SimConfig probe = cfg.sim;
    probe.attack_kind = AttackKind::None;
    probe.attacker_ratio = 0.0;
    probe.validate_or_throw();
    return cfg;
}

}  // namespace fanet
