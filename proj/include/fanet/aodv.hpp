// Reactive route discovery and maintenance (RREQ/RREP/RERR), simplified
// from full RFC semantics: soft route expiry, neighbor-diff link breaks
// instead of HELLO, unlimited flood reach, no local repair.
#pragma once

#include <deque>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "fanet/attacks.hpp"
#include "fanet/config.hpp"
#include "fanet/features.hpp"
#include "fanet/packet.hpp"
#include "fanet/rng.hpp"

namespace fanet {

// Data packets stop being forwarded past this many hops. Larger than any
// simple path at the supported network sizes; exists so that forwarding
// cycles built out of forged replies drain instead of bouncing forever.
inline constexpr int kMaxDataHops = 64;

struct RouteEntry {
    int destination = -1;
    int next_hop = -1;
    int hop_count = 0;
    long dest_seq = 0;
    bool valid = false;
    double lifetime_expiry_s = 0.0;
};

// Transmission services the engine provides to a node. The engine fills
// Packet::from and applies the serialization delay.
class NetApi {
public:
    virtual ~NetApi() = default;
    virtual void broadcast(int from, Packet p) = 0;
    virtual void unicast(int from, int to, Packet p) = 0;
};

class AodvNode {
public:
    AodvNode(int id, const AodvParams& params, int ctrl_bytes, NetApi& net, FeatureSink& sink,
             long seq_boost);

    void set_profile(const AttackerProfile& p) { profile_ = p; }
    const AttackerProfile& profile() const { return profile_; }
    int id() const { return id_; }

    void handle_packet(const Packet& p, double now);

    // data plane entry point for locally generated traffic
    void originate_data(int dest, int size_bytes, double now);

    // one burst: ten consecutive floods toward one random other UAV
    void flooding_burst(double now, Rng& rng, const std::vector<int>& other_uavs);

    // lost must list neighbors that just left the radio range
    void on_neighbors_changed(const std::vector<int>& lost, double now);

    // soft route expiry and discovery timeouts, run once per tick
    void on_tick(double now);

    int active_route_count() const;
    double avg_active_hop_count() const;
    const RouteEntry* route(int dest) const;
    long own_seq() const { return own_seq_; }
    std::size_t buffered_count() const { return buffer_.size(); }

private:
    void handle_rreq(const Packet& p, double now);
    void handle_rrep(const Packet& p, double now);
    void handle_rerr(const Packet& p, double now);
    void handle_data(const Packet& p, double now);

    bool install_route(int dest, int next_hop, int advertised_hops, long seq, double now);
    void refresh_route(RouteEntry& e, double now);
    long known_seq(int dest) const;
    RouteEntry* valid_route(int dest);
    void originate_route_discovery(int dest, double now);
    void buffer_and_discover(const Packet& data, double now);
    void flush_buffer(int dest, double now);
    void send_rerr(std::vector<std::pair<int, long>> broken, int created_by, Counter sent_kind,
                   double now);

    int id_;
    AodvParams params_;
    int ctrl_bytes_;
    NetApi& net_;
    FeatureSink& sink_;
    long seq_boost_;
    AttackerProfile profile_;

    long own_seq_ = 0;
    long next_rreq_id_ = 0;
    long next_data_id_ = 0;
    std::map<int, RouteEntry> table_;
    std::set<std::pair<int, long>> seen_floods_;
    std::map<int, double> pending_discovery_;  // destination -> start time
    std::deque<Packet> buffer_;
};

}  // namespace fanet
