#include "fanet/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "fanet/errors.hpp"

namespace fanet {

AttackerProfile profile_for(AttackKind kind) {
    AttackerProfile p;
    switch (kind) {
        case AttackKind::None: break;
        case AttackKind::Sinkhole: p.sinkhole = true; break;
        case AttackKind::Blackhole:
            p.sinkhole = true;
            p.blackhole = true;
            break;
        case AttackKind::Flooding: p.flooding = true; break;
    }
    return p;
}

AttackerAssignment assign_attackers(std::uint64_t topology_seed, double ratio,
                                    const std::vector<std::pair<int, int>>& traffic_pairs,
                                    const std::vector<int>& uav_ids, AttackKind kind) {
    AttackerAssignment out;
    out.kind = kind;
    out.ratio = ratio;
    const long count = std::llround(ratio * static_cast<double>(uav_ids.size()));
    if (count == 0) return out;

    std::set<int> endpoints;
    for (const auto& [src, dst] : traffic_pairs) {
        endpoints.insert(src);
        endpoints.insert(dst);
    }
    std::vector<int> eligible;
    for (int id : uav_ids)
        if (!endpoints.count(id)) eligible.push_back(id);
    std::sort(eligible.begin(), eligible.end());

    if (count > static_cast<long>(eligible.size()))
        throw ConfigError("not enough non-endpoint UAVs to host " + std::to_string(count) +
                          " attackers");

    // keyed by (seed, ratio) only: kind must not perturb the draw
    Rng rng(seed_stream(topology_seed, "attackers",
                        static_cast<std::uint64_t>(std::llround(ratio * 10000.0))));
    auto picks = rng.sample_without_replacement(eligible.size(), static_cast<std::size_t>(count));
    for (auto i : picks) out.attacker_ids.insert(eligible[i]);
    return out;
}

Packet sinkhole_forged_rrep(int attacker_id, const Packet& rreq, long seq_boost, int ctrl_bytes) {
    Packet p;
    p.kind = PacketKind::Rrep;
    p.created_by = attacker_id;
    p.size_bytes = ctrl_bytes;
    p.origin = rreq.origin;
    p.destination = rreq.destination;
    p.dest_seq = rreq.dest_seq + seq_boost;  // fresher than anything legitimate
    p.hop_count = 1;                         // claims adjacency to the destination
    return p;
}

}  // namespace fanet
