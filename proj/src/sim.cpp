#include "fanet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "fanet/aodv.hpp"
#include "fanet/attacks.hpp"
#include "fanet/errors.hpp"
#include "fanet/mobility.hpp"
#include "fanet/rng.hpp"

namespace fanet {

std::vector<int> neighbors_of(int node_id, const std::vector<Vec3>& positions,
                              double tx_range_m) {
    if (node_id < 0 || node_id >= static_cast<int>(positions.size()))
        throw InternalError("neighbor query for unknown node " + std::to_string(node_id));
    std::vector<int> out;
    const Vec3& p = positions[static_cast<std::size_t>(node_id)];
    for (int other = 0; other < static_cast<int>(positions.size()); ++other) {
        if (other == node_id) continue;
        if (distance(p, positions[static_cast<std::size_t>(other)]) <= tx_range_m)
            out.push_back(other);
    }
    return out;
}

namespace {

struct Ev {
    double time = 0.0;
    EventKind kind = EventKind::MobilityTick;
    std::uint64_t seq = 0;
    int node = -1;
    Packet pkt;
};

struct EvAfter {
    bool operator()(const Ev& a, const Ev& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
        return a.seq > b.seq;
    }
};

class Engine : public NetApi {
public:
    explicit Engine(const SimConfig& cfg) : cfg_(cfg) {}

    SimTrace run();

    void broadcast(int from, Packet p) override {
        p.from = from;
        fold_packet(p);
        stats_.sends_by_packet_kind[static_cast<int>(p.kind)] += 1;
        const double at = now_ + tx_delay(p);
        for (int nb : adjacency_[static_cast<std::size_t>(from)])
            schedule(at, EventKind::PacketArrival, nb, p);
    }

    void unicast(int from, int to, Packet p) override {
        p.from = from;
        fold_packet(p);
        stats_.sends_by_packet_kind[static_cast<int>(p.kind)] += 1;
        const auto& nbs = adjacency_[static_cast<std::size_t>(from)];
        if (!std::binary_search(nbs.begin(), nbs.end(), to)) {
            stats_.lost_unicasts += 1;  // link gone since the route was learned
            return;
        }
        schedule(now_ + tx_delay(p), EventKind::PacketArrival, to, p);
    }

private:
    double tx_delay(const Packet& p) const {
        return static_cast<double>(p.size_bytes) * 8.0 / cfg_.bandwidth_bps;
    }

    void schedule(double t, EventKind k, int node, Packet pkt = {}) {
        queue_.push(Ev{t, k, next_seq_++, node, std::move(pkt)});
    }

    void fold_packet(const Packet& p) {
        digest_.put_u64(static_cast<std::uint64_t>(p.kind));
        digest_.put_i64(p.from);
        digest_.put_i64(p.created_by);
        digest_.put_i64(p.size_bytes);
        digest_.put_i64(p.origin);
        digest_.put_i64(p.origin_seq);
        digest_.put_i64(p.rreq_id);
        digest_.put_i64(p.destination);
        digest_.put_i64(p.dest_seq);
        digest_.put_i64(p.hop_count);
        digest_.put_u64(p.unreachable.size());
        for (const auto& [d, s] : p.unreachable) {
            digest_.put_i64(d);
            digest_.put_i64(s);
        }
        digest_.put_i64(p.data_id);
    }

    void rebuild_adjacency() {
        std::vector<Vec3> pos(states_.size());
        for (std::size_t i = 0; i < states_.size(); ++i) pos[i] = states_[i].pos;
        for (std::size_t i = 0; i < states_.size(); ++i)
            adjacency_[i] = neighbors_of(static_cast<int>(i), pos, cfg_.tx_range_m);
    }

    void handle_mobility_tick();
    void handle_window_close(Collector& collector);
    void handle_traffic_tick();

    SimConfig cfg_;
    std::vector<MotionState> states_;
    std::vector<Rng> mob_rngs_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<AodvNode> nodes_;
    std::priority_queue<Ev, std::vector<Ev>, EvAfter> queue_;
    std::uint64_t next_seq_ = 0;
    double now_ = 0.0;
    Fnv1a digest_;
    Fnv1a mob_digest_;
    TraceStats stats_;
    std::map<std::pair<int, int>, std::size_t> conn_index_;
    std::map<int, Rng> flood_rngs_;
    std::map<int, std::vector<int>> flood_targets_;
    Collector* collector_ = nullptr;
};

void Engine::handle_mobility_tick() {
    for (int id = 1; id <= cfg_.node_count; ++id) {
        auto& s = states_[static_cast<std::size_t>(id)];
        gm_step(s, cfg_.area_m, cfg_.avg_speed_mps, cfg_.mobility_tick_s,
                mob_rngs_[static_cast<std::size_t>(id)]);
        collector_->add_distance(id, s.vel.norm() * cfg_.mobility_tick_s);
    }
    std::vector<std::vector<int>> old = adjacency_;
    rebuild_adjacency();
    std::vector<std::vector<int>> lost_per_node(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        const auto& prev = old[i];
        const auto& cur = adjacency_[i];
        std::vector<int> lost, gained;
        std::set_difference(prev.begin(), prev.end(), cur.begin(), cur.end(),
                            std::back_inserter(lost));
        std::set_difference(cur.begin(), cur.end(), prev.begin(), prev.end(),
                            std::back_inserter(gained));
        if (!gained.empty())
            collector_->bump(static_cast<int>(i), Counter::NeighborAdded,
                             static_cast<double>(gained.size()));
        if (!lost.empty())
            collector_->bump(static_cast<int>(i), Counter::NeighborRemoved,
                             static_cast<double>(lost.size()));
        lost_per_node[i] = std::move(lost);
    }
    // route teardown sees the new adjacency so its RERRs reach live neighbors
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (!lost_per_node[i].empty())
            nodes_[i].on_neighbors_changed(lost_per_node[i], now_);
    for (auto& n : nodes_) n.on_tick(now_);
    for (const auto& s : states_) {
        mob_digest_.put_double(s.pos.x);
        mob_digest_.put_double(s.pos.y);
        mob_digest_.put_double(s.pos.z);
    }
}

void Engine::handle_window_close(Collector& collector) {
    std::vector<WindowSnapshot> snaps(states_.size());
    for (int id = 0; id < static_cast<int>(states_.size()); ++id) {
        auto& w = snaps[static_cast<std::size_t>(id)];
        w.active_routes = nodes_[static_cast<std::size_t>(id)].active_route_count();
        w.avg_hop_count = nodes_[static_cast<std::size_t>(id)].avg_active_hop_count();
        w.neighbor_count = static_cast<int>(adjacency_[static_cast<std::size_t>(id)].size());
    }
    collector.close_window(now_, snaps);
}

void Engine::handle_traffic_tick() {
    for (auto& c : stats_.connections) {
        c.originated += 1;
        nodes_[static_cast<std::size_t>(c.src)].originate_data(c.dst, cfg_.packet_size_bytes,
                                                               now_);
    }
}

SimTrace Engine::run() {
    cfg_.validate_or_throw();

    states_ = spawn_motion_states(cfg_);
    adjacency_.resize(states_.size());
    for (int id = 0; id < cfg_.total_nodes(); ++id)
        mob_rngs_.emplace_back(seed_stream(cfg_.seed, "mobility", static_cast<std::uint64_t>(id)));
    rebuild_adjacency();

    // endpoints fixed per topology; ordered pairs over distinct UAVs
    std::vector<std::pair<int, int>> pairs;
    {
        Rng tr(seed_stream(cfg_.seed, "traffic"));
        auto idx = tr.sample_without_replacement(
            static_cast<std::size_t>(cfg_.node_count),
            static_cast<std::size_t>(2 * cfg_.traffic_connections));
        for (std::size_t k = 0; k + 1 < idx.size(); k += 2)
            pairs.push_back({static_cast<int>(idx[k]) + 1, static_cast<int>(idx[k + 1]) + 1});
    }

    std::vector<int> uav_ids;
    for (int id = 1; id <= cfg_.node_count; ++id) uav_ids.push_back(id);
    AttackerAssignment assignment;
    if (cfg_.attack_kind != AttackKind::None)
        assignment = assign_attackers(cfg_.seed, cfg_.attacker_ratio, pairs, uav_ids,
                                      cfg_.attack_kind);

    Collector collector(cfg_, assignment.attacker_ids);
    collector_ = &collector;

    nodes_.reserve(states_.size());
    for (int id = 0; id < cfg_.total_nodes(); ++id)
        nodes_.emplace_back(id, cfg_.aodv, cfg_.aodv.ctrl_packet_bytes, *this, collector,
                            cfg_.seq_boost);
    const AttackerProfile profile = profile_for(cfg_.attack_kind);
    for (int a : assignment.attacker_ids) nodes_[static_cast<std::size_t>(a)].set_profile(profile);

    stats_.connections.clear();
    for (const auto& pr : pairs) {
        conn_index_[pr] = stats_.connections.size();
        stats_.connections.push_back({pr.first, pr.second, 0, 0});
    }

    const long mticks = std::llround(cfg_.duration_s / cfg_.mobility_tick_s);
    for (long i = 1; i <= mticks; ++i)
        schedule(static_cast<double>(i) * cfg_.mobility_tick_s, EventKind::MobilityTick, -1);
    const long wins = std::llround(cfg_.duration_s / cfg_.window_s);
    for (long j = 1; j <= wins; ++j)
        schedule(static_cast<double>(j) * cfg_.window_s, EventKind::WindowClose, -1);
    if (cfg_.traffic_connections > 0) {
        const double step = 1.0 / cfg_.packet_rate_hz;
        for (long k = 0; static_cast<double>(k) * step < cfg_.duration_s; ++k)
            schedule(static_cast<double>(k) * step, EventKind::TrafficTick, -1);
    }
    if (cfg_.attack_kind == AttackKind::Flooding) {
        const long bursts = static_cast<long>(std::floor(cfg_.duration_s / kFloodPeriodS));
        for (int a : assignment.attacker_ids) {
            Rng rng(seed_stream(cfg_.seed, "flooding", static_cast<std::uint64_t>(a)));
            const double phase = rng.uniform(0.0, kFloodPeriodS);
            flood_rngs_.emplace(a, std::move(rng));
            std::vector<int> others;
            for (int id : uav_ids)
                if (id != a) others.push_back(id);
            flood_targets_[a] = std::move(others);
            for (long k = 0; k < bursts; ++k)
                schedule(phase + kFloodPeriodS * static_cast<double>(k), EventKind::AttackTick, a);
        }
    }

    while (!queue_.empty()) {
        Ev e = queue_.top();
        if (e.time > cfg_.duration_s) break;
        queue_.pop();
        now_ = e.time;
        digest_.put_double(e.time);
        digest_.put_u64(static_cast<std::uint64_t>(e.kind));
        digest_.put_i64(e.node);
        stats_.events_by_kind[static_cast<int>(e.kind)] += 1;
        switch (e.kind) {
            case EventKind::MobilityTick: handle_mobility_tick(); break;
            case EventKind::WindowClose: handle_window_close(collector); break;
            case EventKind::TrafficTick: handle_traffic_tick(); break;
            case EventKind::AttackTick:
                nodes_[static_cast<std::size_t>(e.node)].flooding_burst(
                    now_, flood_rngs_.at(e.node), flood_targets_.at(e.node));
                break;
            case EventKind::PacketArrival: {
                if (e.pkt.kind == PacketKind::Data && e.pkt.destination == e.node &&
                    !nodes_[static_cast<std::size_t>(e.node)].profile().blackhole) {
                    auto it = conn_index_.find({e.pkt.created_by, e.pkt.destination});
                    if (it != conn_index_.end()) stats_.connections[it->second].delivered += 1;
                }
                nodes_[static_cast<std::size_t>(e.node)].handle_packet(e.pkt, now_);
                break;
            }
        }
    }
    if (collector.window_open())
        throw InternalError("event queue exhausted before the configured duration");

    SimTrace out;
    out.samples = collector.take_samples();
    out.trace_digest = digest_.value();
    out.mobility_digest = mob_digest_.value();
    out.attacker_ids.assign(assignment.attacker_ids.begin(), assignment.attacker_ids.end());
    out.traffic_pairs = pairs;
    out.stats = std::move(stats_);
    collector_ = nullptr;
    return out;
}

}  // namespace

SimTrace run_simulation(const SimConfig& cfg) {
    Engine engine(cfg);
    return engine.run();
}

}  // namespace fanet
