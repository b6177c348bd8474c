// Attacker selection and the three attacker behaviors. Selection is keyed
// by (topology seed, ratio) only, so the same nodes misbehave under every
// attack kind at a given ratio.
#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "fanet/config.hpp"
#include "fanet/packet.hpp"
#include "fanet/rng.hpp"

namespace fanet {

struct AttackerProfile {
    bool sinkhole = false;   // forged high-seq replies, no rebroadcast
    bool blackhole = false;  // sinkhole plus unconditional data drop
    bool flooding = false;   // periodic RREQ bursts, otherwise honest
};

AttackerProfile profile_for(AttackKind kind);

inline constexpr double kFloodPeriodS = 3.0;
inline constexpr int kFloodBurstSize = 10;

struct AttackerAssignment {
    AttackKind kind = AttackKind::None;
    double ratio = 0.0;
    std::set<int> attacker_ids;
};

// round(ratio * UAV count) nodes drawn from the UAVs that are neither
// traffic endpoints nor the ground station. The draw ignores the attack
// kind, so sets coincide across kinds for a fixed (seed, ratio).
AttackerAssignment assign_attackers(std::uint64_t topology_seed, double ratio,
                                    const std::vector<std::pair<int, int>>& traffic_pairs,
                                    const std::vector<int>& uav_ids, AttackKind kind);

// Reply a sinkhole sends instead of rebroadcasting someone else's flood:
// advertised seq = seq known at the origin + boost, one claimed hop.
Packet sinkhole_forged_rrep(int attacker_id, const Packet& rreq, long seq_boost, int ctrl_bytes);

}  // namespace fanet
