// Per-node windowed feature extraction. 31 features in a frozen order form
// the on-disk schema; the Collector turns protocol events into labeled
// window samples.
#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fanet/config.hpp"

namespace fanet {

inline constexpr int kFeatureCount = 31;

// Frozen feature order. Counters the protocol can bump directly share the
// feature index; the remaining slots are derived or snapshotted at close.
enum FeatureIndex : int {
    F_RreqSent = 0,
    F_RreqRecv = 1,
    F_RreqFwd = 2,
    F_RrepSent = 3,
    F_RrepRecv = 4,
    F_RrepFwd = 5,
    F_RerrSent = 6,
    F_RerrRecv = 7,
    F_RerrFwd = 8,
    F_RreqOriginated = 9,
    F_RrepOriginated = 10,
    F_DuplicateRreqDropped = 11,
    F_DataOriginated = 12,
    F_DataRecvAsDest = 13,
    F_DataFwd = 14,
    F_DataDropped = 15,
    F_DataBuffered = 16,
    F_DeliveryRatioWindow = 17,
    F_RoutesAdded = 18,
    F_RoutesInvalidated = 19,
    F_ActiveRoutes = 20,
    F_AvgHopCount = 21,
    F_MaxDestSeqSeen = 22,
    F_AvgDestSeqDelta = 23,
    F_RerrDestinationsListed = 24,
    F_NeighborCount = 25,
    F_NeighborAdded = 26,
    F_NeighborRemoved = 27,
    F_AvgSpeedMps = 28,
    F_DistanceTraveledM = 29,
    F_LinkBreaksDetected = 30,
};

const std::array<std::string, kFeatureCount>& feature_names();

// Subset of features that are plain event counters.
enum class Counter : int {
    RreqSent = F_RreqSent,
    RreqRecv = F_RreqRecv,
    RreqFwd = F_RreqFwd,
    RrepSent = F_RrepSent,
    RrepRecv = F_RrepRecv,
    RrepFwd = F_RrepFwd,
    RerrSent = F_RerrSent,
    RerrRecv = F_RerrRecv,
    RerrFwd = F_RerrFwd,
    RreqOriginated = F_RreqOriginated,
    RrepOriginated = F_RrepOriginated,
    DuplicateRreqDropped = F_DuplicateRreqDropped,
    DataOriginated = F_DataOriginated,
    DataRecvAsDest = F_DataRecvAsDest,
    DataFwd = F_DataFwd,
    DataDropped = F_DataDropped,
    DataBuffered = F_DataBuffered,
    RoutesAdded = F_RoutesAdded,
    RoutesInvalidated = F_RoutesInvalidated,
    RerrDestinationsListed = F_RerrDestinationsListed,
    NeighborAdded = F_NeighborAdded,
    NeighborRemoved = F_NeighborRemoved,
    LinkBreaksDetected = F_LinkBreaksDetected,
};

// Event feed from the protocol layer into the per-window accumulators.
class FeatureSink {
public:
    virtual ~FeatureSink() = default;
    virtual void bump(int node, Counter c, double amount = 1.0) = 0;
    // Called once per packet a node processes; drives labeling.
    virtual void packet_touch(int node, int created_by) = 0;
    // Called on every accepted routing-table install or update.
    virtual void seq_observed(int node, long new_seq, long prev_seq, bool had_prev) = 0;
};

// Sink that discards everything; for protocol micro-tests.
class NullSink : public FeatureSink {
public:
    void bump(int, Counter, double) override {}
    void packet_touch(int, int) override {}
    void seq_observed(int, long, long, bool) override {}
};

struct Sample {
    int topology_id = 0;
    AttackKind attack_kind = AttackKind::None;
    double attacker_ratio = 0.0;
    int node_id = 0;
    double window_start_s = 0.0;
    std::array<double, kFeatureCount> f{};
    int label = 0;  // 0 benign, 1 malicious
};

// Table/neighborhood state captured by the engine at window close.
struct WindowSnapshot {
    int active_routes = 0;
    double avg_hop_count = 0.0;
    int neighbor_count = 0;
};

// Owns one accumulator per node per open window. Windows [k*w, (k+1)*w)
// tile [0, duration); close_window is called once per boundary in time
// order. Ground-station activity is tracked but emits no samples.
class Collector : public FeatureSink {
public:
    Collector(const SimConfig& cfg, std::set<int> attacker_ids);

    void bump(int node, Counter c, double amount = 1.0) override;
    void packet_touch(int node, int created_by) override;
    void seq_observed(int node, long new_seq, long prev_seq, bool had_prev) override;

    void add_distance(int node, double meters);

    // snapshots indexed by node id, [0, total_nodes)
    void close_window(double close_time_s, const std::vector<WindowSnapshot>& snapshots);

    bool window_open() const { return open_; }
    const std::vector<Sample>& samples() const { return samples_; }
    std::vector<Sample> take_samples() { return std::move(samples_); }

private:
    struct Acc {
        std::array<double, kFeatureCount> f{};
        double distance = 0.0;
        double seq_delta_sum = 0.0;
        long seq_obs = 0;
        double max_seq = 0.0;
        bool touched_attacker = false;
    };

    SimConfig cfg_;
    std::set<int> attackers_;
    std::vector<Acc> acc_;
    int window_index_ = 0;
    int window_total_ = 0;
    bool open_ = true;
    std::vector<Sample> samples_;
};

}  // namespace fanet
