#include "fanet/features.hpp"

#include <cmath>

#include "fanet/errors.hpp"

namespace fanet {

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "rreq_sent",
        "rreq_recv",
        "rreq_fwd",
        "rrep_sent",
        "rrep_recv",
        "rrep_fwd",
        "rerr_sent",
        "rerr_recv",
        "rerr_fwd",
        "rreq_originated",
        "rrep_originated",
        "duplicate_rreq_dropped",
        "data_originated",
        "data_recv_as_dest",
        "data_fwd",
        "data_dropped",
        "data_buffered",
        "delivery_ratio_window",
        "routes_added",
        "routes_invalidated",
        "active_routes",
        "avg_hop_count",
        "max_dest_seq_seen",
        "avg_dest_seq_delta",
        "rerr_destinations_listed",
        "neighbor_count",
        "neighbor_added",
        "neighbor_removed",
        "avg_speed_mps",
        "distance_traveled_m",
        "link_breaks_detected",
    };
    return names;
}

Collector::Collector(const SimConfig& cfg, std::set<int> attacker_ids)
    : cfg_(cfg), attackers_(std::move(attacker_ids)) {
    acc_.resize(static_cast<std::size_t>(cfg.total_nodes()));
    window_total_ = static_cast<int>(std::llround(cfg.duration_s / cfg.window_s));
    samples_.reserve(static_cast<std::size_t>(window_total_) *
                     static_cast<std::size_t>(cfg.node_count));
}

void Collector::bump(int node, Counter c, double amount) {
    if (!open_) return;  // events at exactly t=duration land after the last close
    acc_[static_cast<std::size_t>(node)].f[static_cast<int>(c)] += amount;
}

void Collector::packet_touch(int node, int created_by) {
    if (!open_) return;
    if (attackers_.count(created_by))
        acc_[static_cast<std::size_t>(node)].touched_attacker = true;
}

void Collector::seq_observed(int node, long new_seq, long prev_seq, bool had_prev) {
    if (!open_) return;
    auto& a = acc_[static_cast<std::size_t>(node)];
    a.seq_delta_sum += had_prev ? static_cast<double>(new_seq - prev_seq) : 0.0;
    a.seq_obs += 1;
    a.max_seq = std::max(a.max_seq, static_cast<double>(new_seq));
}

void Collector::add_distance(int node, double meters) {
    if (!open_) return;
    acc_[static_cast<std::size_t>(node)].distance += meters;
}

void Collector::close_window(double close_time_s, const std::vector<WindowSnapshot>& snapshots) {
    if (!open_) throw InternalError("window close past the end of the run");
    const double expect = (window_index_ + 1) * cfg_.window_s;
    if (std::fabs(close_time_s - expect) > 1e-9)
        throw InternalError("window close out of sequence");
    const double start = window_index_ * cfg_.window_s;
    for (int node = 1; node <= cfg_.node_count; ++node) {
        auto& a = acc_[static_cast<std::size_t>(node)];
        const auto& snap = snapshots[static_cast<std::size_t>(node)];
        Sample s;
        s.topology_id = cfg_.topology_id;
        s.attack_kind = cfg_.attack_kind;
        s.attacker_ratio = cfg_.attacker_ratio;
        s.node_id = node;
        s.window_start_s = start;
        s.f = a.f;
        const double handled = a.f[F_DataFwd] + a.f[F_DataRecvAsDest];
        const double denom = handled + a.f[F_DataDropped];
        s.f[F_DeliveryRatioWindow] = denom > 0.0 ? handled / denom : 0.0;
        s.f[F_ActiveRoutes] = snap.active_routes;
        s.f[F_AvgHopCount] = snap.avg_hop_count;
        s.f[F_MaxDestSeqSeen] = a.max_seq;
        s.f[F_AvgDestSeqDelta] = a.seq_obs > 0 ? a.seq_delta_sum / static_cast<double>(a.seq_obs) : 0.0;
        s.f[F_NeighborCount] = snap.neighbor_count;
        s.f[F_AvgSpeedMps] = a.distance / cfg_.window_s;
        s.f[F_DistanceTraveledM] = a.distance;
        const bool is_attacker = attackers_.count(node) > 0;
        const bool touched = cfg_.label_mode == LabelMode::Propagate && a.touched_attacker;
        s.label = (is_attacker || touched) ? 1 : 0;
        samples_.push_back(std::move(s));
        a = Acc{};
    }
    acc_[0] = Collector::Acc{};  // ground station tracked but never emitted
    ++window_index_;
    if (window_index_ >= window_total_) open_ = false;
}

}  // namespace fanet
