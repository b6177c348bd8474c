#include "fanet/aodv.hpp"

#include <algorithm>

#include "fanet/errors.hpp"

namespace fanet {

AodvNode::AodvNode(int id, const AodvParams& params, int ctrl_bytes, NetApi& net,
                   FeatureSink& sink, long seq_boost)
    : id_(id), params_(params), ctrl_bytes_(ctrl_bytes), net_(net), sink_(sink),
      seq_boost_(seq_boost) {}

void AodvNode::handle_packet(const Packet& p, double now) {
    switch (p.kind) {
        case PacketKind::Rreq: handle_rreq(p, now); break;
        case PacketKind::Rrep: handle_rrep(p, now); break;
        case PacketKind::Rerr: handle_rerr(p, now); break;
        case PacketKind::Data: handle_data(p, now); break;
    }
}

long AodvNode::known_seq(int dest) const {
    auto it = table_.find(dest);
    return it == table_.end() ? 0 : it->second.dest_seq;
}

RouteEntry* AodvNode::valid_route(int dest) {
    auto it = table_.find(dest);
    if (it == table_.end() || !it->second.valid) return nullptr;
    return &it->second;
}

const RouteEntry* AodvNode::route(int dest) const {
    auto it = table_.find(dest);
    return it == table_.end() ? nullptr : &it->second;
}

void AodvNode::refresh_route(RouteEntry& e, double now) {
    e.lifetime_expiry_s = std::max(e.lifetime_expiry_s, now + params_.route_lifetime_s);
}

// advertised_hops is the hop count the packet carries; the stored entry
// adds the hop to the sender. Freshness: higher seq wins; on a seq tie a
// packet advertising fewer hops than the stored count, or any packet when
// the entry is invalid, replaces it. Stored seq never decreases.
bool AodvNode::install_route(int dest, int next_hop, int advertised_hops, long seq, double now) {
    if (dest == id_) return false;  // own flood echoed back; no route to self
    auto it = table_.find(dest);
    bool had_prev = it != table_.end();
    long prev_seq = had_prev ? it->second.dest_seq : 0;
    bool accept;
    if (!had_prev)
        accept = true;
    else {
        const RouteEntry& e = it->second;
        accept = seq > e.dest_seq ||
                 (seq == e.dest_seq && (!e.valid || advertised_hops < e.hop_count));
    }
    if (!accept) return false;
    RouteEntry e;
    e.destination = dest;
    e.next_hop = next_hop;
    e.hop_count = advertised_hops + 1;
    e.dest_seq = seq;
    e.valid = true;
    e.lifetime_expiry_s = now + params_.route_lifetime_s;
    table_[dest] = e;
    sink_.bump(id_, Counter::RoutesAdded);
    sink_.seq_observed(id_, seq, prev_seq, had_prev);
    pending_discovery_.erase(dest);
    flush_buffer(dest, now);
    return true;
}

void AodvNode::flush_buffer(int dest, double now) {
    RouteEntry* e = valid_route(dest);
    if (!e) return;
    std::deque<Packet> keep;
    for (auto& p : buffer_) {
        if (p.destination == dest) {
            refresh_route(*e, now);
            net_.unicast(id_, e->next_hop, p);
        } else {
            keep.push_back(std::move(p));
        }
    }
    buffer_ = std::move(keep);
}

void AodvNode::originate_route_discovery(int dest, double now) {
    auto it = pending_discovery_.find(dest);
    if (it != pending_discovery_.end() && now < it->second + params_.discovery_timeout_s)
        return;  // one flood per destination per timeout span
    pending_discovery_[dest] = now;
    own_seq_ += 1;
    Packet p;
    p.kind = PacketKind::Rreq;
    p.created_by = id_;
    p.size_bytes = ctrl_bytes_;
    p.origin = id_;
    p.origin_seq = own_seq_;
    p.rreq_id = next_rreq_id_++;
    p.destination = dest;
    p.dest_seq = known_seq(dest);
    p.hop_count = 0;
    seen_floods_.insert({id_, p.rreq_id});
    sink_.bump(id_, Counter::RreqOriginated);
    sink_.bump(id_, Counter::RreqSent);
    net_.broadcast(id_, p);
}

void AodvNode::handle_rreq(const Packet& p, double now) {
    sink_.bump(id_, Counter::RreqRecv);
    sink_.packet_touch(id_, p.created_by);
    // reverse path toward the origin, kept fresh even on duplicates
    install_route(p.origin, p.from, p.hop_count, p.origin_seq, now);
    if (RouteEntry* rev = valid_route(p.origin)) refresh_route(*rev, now);
    if (seen_floods_.count({p.origin, p.rreq_id})) {
        sink_.bump(id_, Counter::DuplicateRreqDropped);
        return;
    }
    seen_floods_.insert({p.origin, p.rreq_id});

    if (profile_.sinkhole && p.origin != id_) {
        Packet forged = sinkhole_forged_rrep(id_, p, seq_boost_, ctrl_bytes_);
        sink_.bump(id_, Counter::RrepOriginated);
        sink_.bump(id_, Counter::RrepSent);
        net_.unicast(id_, p.from, forged);
        return;  // the flood stops here
    }

    if (p.destination == id_) {
        own_seq_ = std::max(own_seq_, p.dest_seq);
        Packet r;
        r.kind = PacketKind::Rrep;
        r.created_by = id_;
        r.size_bytes = ctrl_bytes_;
        r.origin = p.origin;
        r.destination = id_;
        r.dest_seq = own_seq_;
        r.hop_count = 0;
        sink_.bump(id_, Counter::RrepOriginated);
        sink_.bump(id_, Counter::RrepSent);
        net_.unicast(id_, p.from, r);
        return;
    }

    if (RouteEntry* e = valid_route(p.destination); e && e->dest_seq >= p.dest_seq) {
        Packet r;
        r.kind = PacketKind::Rrep;
        r.created_by = id_;
        r.size_bytes = ctrl_bytes_;
        r.origin = p.origin;
        r.destination = p.destination;
        r.dest_seq = e->dest_seq;
        r.hop_count = e->hop_count;
        sink_.bump(id_, Counter::RrepOriginated);
        sink_.bump(id_, Counter::RrepSent);
        net_.unicast(id_, p.from, r);
        return;
    }

    Packet fwd = p;
    fwd.hop_count += 1;
    sink_.bump(id_, Counter::RreqFwd);
    sink_.bump(id_, Counter::RreqSent);
    net_.broadcast(id_, fwd);
}

void AodvNode::handle_rrep(const Packet& p, double now) {
    sink_.bump(id_, Counter::RrepRecv);
    sink_.packet_touch(id_, p.created_by);
    install_route(p.destination, p.from, p.hop_count, p.dest_seq, now);
    if (p.origin == id_) return;  // consumed; install already flushed waiting data
    RouteEntry* rev = valid_route(p.origin);
    if (!rev) return;  // reverse path evaporated, reply dies here
    refresh_route(*rev, now);
    Packet fwd = p;
    fwd.hop_count += 1;
    sink_.bump(id_, Counter::RrepFwd);
    sink_.bump(id_, Counter::RrepSent);
    net_.unicast(id_, rev->next_hop, fwd);
}

void AodvNode::send_rerr(std::vector<std::pair<int, long>> broken, int created_by,
                         Counter sent_kind, double now) {
    (void)now;
    Packet e;
    e.kind = PacketKind::Rerr;
    e.created_by = created_by;
    e.size_bytes = ctrl_bytes_;
    e.unreachable = std::move(broken);
    if (sent_kind == Counter::RerrFwd) sink_.bump(id_, Counter::RerrFwd);
    sink_.bump(id_, Counter::RerrSent);
    sink_.bump(id_, Counter::RerrDestinationsListed,
               static_cast<double>(e.unreachable.size()));
    net_.broadcast(id_, e);
}

void AodvNode::handle_rerr(const Packet& p, double now) {
    sink_.bump(id_, Counter::RerrRecv);
    sink_.packet_touch(id_, p.created_by);
    std::vector<std::pair<int, long>> invalidated;
    for (const auto& [dest, seq] : p.unreachable) {
        auto it = table_.find(dest);
        if (it != table_.end() && it->second.valid && it->second.next_hop == p.from) {
            it->second.valid = false;
            sink_.bump(id_, Counter::RoutesInvalidated);
            invalidated.push_back({dest, it->second.dest_seq});
        }
    }
    if (!invalidated.empty())
        send_rerr(std::move(invalidated), p.created_by, Counter::RerrFwd, now);
}

void AodvNode::handle_data(const Packet& p, double now) {
    sink_.packet_touch(id_, p.created_by);
    if (profile_.blackhole) {
        sink_.bump(id_, Counter::DataDropped);
        return;
    }
    if (p.destination == id_) {
        sink_.bump(id_, Counter::DataRecvAsDest);
        return;
    }
    // forged routes can form forwarding cycles; a hop cap resolves them
    if (p.hop_count >= kMaxDataHops) {
        sink_.bump(id_, Counter::DataDropped);
        return;
    }
    if (RouteEntry* e = valid_route(p.destination)) {
        refresh_route(*e, now);
        sink_.bump(id_, Counter::DataFwd);
        Packet fwd = p;
        fwd.hop_count += 1;
        net_.unicast(id_, e->next_hop, fwd);
        return;
    }
    if (profile_.sinkhole) {
        // attracted traffic is kept and honestly rerouted, not reported broken
        buffer_and_discover(p, now);
        return;
    }
    sink_.bump(id_, Counter::DataDropped);
    send_rerr({{p.destination, known_seq(p.destination)}}, id_, Counter::RerrSent, now);
}

void AodvNode::originate_data(int dest, int size_bytes, double now) {
    sink_.bump(id_, Counter::DataOriginated);
    Packet p;
    p.kind = PacketKind::Data;
    p.created_by = id_;
    p.size_bytes = size_bytes;
    p.destination = dest;
    p.data_id = next_data_id_++;
    if (RouteEntry* e = valid_route(dest)) {
        refresh_route(*e, now);
        net_.unicast(id_, e->next_hop, p);
        return;
    }
    buffer_and_discover(p, now);
}

void AodvNode::buffer_and_discover(const Packet& data, double now) {
    if (static_cast<int>(buffer_.size()) >= params_.buffer_capacity) {
        buffer_.pop_front();
        sink_.bump(id_, Counter::DataDropped);
    }
    buffer_.push_back(data);
    sink_.bump(id_, Counter::DataBuffered);
    originate_route_discovery(data.destination, now);
}

void AodvNode::flooding_burst(double now, Rng& rng, const std::vector<int>& other_uavs) {
    (void)now;
    const int dest = other_uavs[rng.uniform_int(other_uavs.size())];
    for (int i = 0; i < kFloodBurstSize; ++i) {
        own_seq_ += 1;
        Packet p;
        p.kind = PacketKind::Rreq;
        p.created_by = id_;
        p.size_bytes = ctrl_bytes_;
        p.origin = id_;
        p.origin_seq = own_seq_;
        p.rreq_id = next_rreq_id_++;  // ten consecutive flood ids
        p.destination = dest;
        p.dest_seq = known_seq(dest);
        p.hop_count = 0;
        seen_floods_.insert({id_, p.rreq_id});
        sink_.bump(id_, Counter::RreqOriginated);
        sink_.bump(id_, Counter::RreqSent);
        net_.broadcast(id_, p);
    }
}

void AodvNode::on_neighbors_changed(const std::vector<int>& lost, double now) {
    for (int nb : lost) {
        std::vector<std::pair<int, long>> broken;
        for (auto& [dest, e] : table_) {
            if (e.valid && e.next_hop == nb) {
                e.valid = false;
                sink_.bump(id_, Counter::RoutesInvalidated);
                broken.push_back({dest, e.dest_seq});
            }
        }
        if (!broken.empty()) {
            sink_.bump(id_, Counter::LinkBreaksDetected);
            send_rerr(std::move(broken), id_, Counter::RerrSent, now);
        }
    }
}

void AodvNode::on_tick(double now) {
    for (auto& [dest, e] : table_) {
        if (e.valid && e.lifetime_expiry_s <= now) {
            e.valid = false;
            sink_.bump(id_, Counter::RoutesInvalidated);
        }
    }
    std::vector<int> expired;
    for (const auto& [dest, started] : pending_discovery_)
        if (now >= started + params_.discovery_timeout_s) expired.push_back(dest);
    for (int dest : expired) {
        pending_discovery_.erase(dest);
        std::deque<Packet> keep;
        for (auto& p : buffer_) {
            if (p.destination == dest)
                sink_.bump(id_, Counter::DataDropped);
            else
                keep.push_back(std::move(p));
        }
        buffer_ = std::move(keep);
    }
}

int AodvNode::active_route_count() const {
    int n = 0;
    for (const auto& [dest, e] : table_)
        if (e.valid) ++n;
    return n;
}

double AodvNode::avg_active_hop_count() const {
    int n = 0;
    double sum = 0.0;
    for (const auto& [dest, e] : table_) {
        if (e.valid) {
            ++n;
            sum += e.hop_count;
        }
    }
    return n > 0 ? sum / n : 0.0;
}

}  // namespace fanet
