// Wire-level packet record shared by the routing, attack, and engine layers.
// One struct covers all four kinds; unused fields stay at their defaults so
// trace digests are stable.
#pragma once

#include <utility>
#include <vector>

namespace fanet {

enum class PacketKind { Rreq, Rrep, Rerr, Data };

struct Packet {
    PacketKind kind = PacketKind::Data;
    int from = -1;        // link-layer sender, filled by the engine at send time
    int created_by = -1;  // originator, carried end to end for labeling
    int size_bytes = 0;

    int origin = -1;       // rreq/rrep: discovery source
    long origin_seq = 0;   // rreq
    long rreq_id = 0;      // rreq: flood id, unique per (origin, rreq_id)
    int destination = -1;  // rreq/rrep/data: target node
    long dest_seq = 0;     // rreq: last seq known at origin; rrep: advertised seq
    int hop_count = 0;     // rreq/rrep

    std::vector<std::pair<int, long>> unreachable;  // rerr: (destination, seq)

    long data_id = 0;  // data: per-source serial
};

}  // namespace fanet
