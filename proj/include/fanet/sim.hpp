// Discrete-event engine: Gauss-Markov motion ticks, unit-disk connectivity,
// serialization-delay packet delivery, periodic traffic, attack bursts, and
// 5 s feature windows. Identical (config, seed) pairs give bit-identical
// traces.
#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "fanet/config.hpp"
#include "fanet/features.hpp"
#include "fanet/vec3.hpp"

namespace fanet {

// Tie order at equal times: motion settles first, then the closing window
// snapshot, then new traffic and attack sends, then deliveries.
enum class EventKind : int {
    MobilityTick = 0,
    WindowClose = 1,
    TrafficTick = 2,
    AttackTick = 3,
    PacketArrival = 4,
};

struct ConnectionStat {
    int src = 0;
    int dst = 0;
    long originated = 0;
    long delivered = 0;
};

struct TraceStats {
    std::array<long, 5> events_by_kind{};
    std::array<long, 4> sends_by_packet_kind{};  // rreq, rrep, rerr, data
    long lost_unicasts = 0;
    std::vector<ConnectionStat> connections;

    double delivery_ratio() const {
        long orig = 0, del = 0;
        for (const auto& c : connections) {
            orig += c.originated;
            del += c.delivered;
        }
        return orig > 0 ? static_cast<double>(del) / static_cast<double>(orig) : 0.0;
    }
};

struct SimTrace {
    std::vector<Sample> samples;  // emitted per window close, node order inside
    std::uint64_t trace_digest = 0;
    std::uint64_t mobility_digest = 0;
    std::vector<int> attacker_ids;
    std::vector<std::pair<int, int>> traffic_pairs;
    TraceStats stats;
};

// Nodes within tx_range_m (boundary inclusive), excluding node_id itself.
// positions is indexed by node id; unknown ids are an error.
std::vector<int> neighbors_of(int node_id, const std::vector<Vec3>& positions,
                              double tx_range_m);

SimTrace run_simulation(const SimConfig& cfg);

}  // namespace fanet
