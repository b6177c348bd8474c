// Simulation configuration: one network simulation plus the grid used by
// the simulate command. Loaded from JSON with strict unknown-key rejection.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fanet/vec3.hpp"

namespace fanet {

enum class AttackKind { None, Sinkhole, Blackhole, Flooding };

const char* to_string(AttackKind k);
AttackKind attack_kind_from_string(const std::string& s);

// propagate: a window is malicious if the node is an attacker or processed a
// packet originated by one. attacker_node_only: only attacker nodes' windows.
enum class LabelMode { Propagate, AttackerNodeOnly };

const char* to_string(LabelMode m);
LabelMode label_mode_from_string(const std::string& s);

struct AodvParams {
    double route_lifetime_s = 10.0;
    double discovery_timeout_s = 2.0;
    int buffer_capacity = 64;
    int ctrl_packet_bytes = 64;
};

struct SimConfig {
    Vec3 area_m{12000.0, 12000.0, 300.0};  // box extents; origin at 0
    double duration_s = 1800.0;
    int node_count = 50;  // UAVs; the immobile ground station is added as node 0
    double avg_speed_mps = 100.0;
    double tx_range_m = 250.0;
    double bandwidth_bps = 11e6;
    int traffic_connections = 10;
    int packet_size_bytes = 512;
    double packet_rate_hz = 1.0;
    double alpha_min = 0.25;
    double alpha_max = 0.7;
    double mobility_tick_s = 1.0;
    double window_s = 5.0;
    AodvParams aodv;
    long seq_boost = 100;
    LabelMode label_mode = LabelMode::Propagate;

    AttackKind attack_kind = AttackKind::None;
    double attacker_ratio = 0.0;
    std::uint64_t seed = 0;  // topology seed; derived from the root seed
    int topology_id = 0;     // assigned by the grid runner, not read from JSON

    int total_nodes() const { return node_count + 1; }
    int gbs_id() const { return 0; }
    Vec3 area_center() const { return {area_m.x / 2.0, area_m.y / 2.0, area_m.z / 2.0}; }

    std::vector<std::string> validate() const;
    void validate_or_throw() const;  // ConfigError listing every violation
};

struct GridConfig {
    int topologies = 10;
    std::vector<AttackKind> attacks{AttackKind::Sinkhole, AttackKind::Blackhole,
                                    AttackKind::Flooding};
    std::vector<double> ratios{0.05, 0.10, 0.15, 0.20, 0.25};

    // attack-free run + attacks x ratios, per topology
    int runs_per_topology() const {
        return 1 + static_cast<int>(attacks.size() * ratios.size());
    }
    int total_runs() const { return topologies * runs_per_topology(); }
};

struct SimulateConfig {
    SimConfig sim;
    GridConfig grid;
};

SimulateConfig load_simulate_config(const std::string& path);

}  // namespace fanet
