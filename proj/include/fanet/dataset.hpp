// Turns paired simulation traces into balanced per-UAV two-class datasets:
// 50 s decimation for the few-shot track, the full 5 s stream for the
// federated baseline, nested shot reduction, stratified splitting, and the
// CSV on-disk schema.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fanet/features.hpp"

namespace fanet {

// every 10th 5 s window; 1800 s -> 36 per UAV per run
inline constexpr int kDecimationStride = 10;

struct UavPair {
    std::vector<Sample> benign;
    std::vector<Sample> malicious;
};

struct UavData {
    int topology_id = 0;
    int node_id = 0;
    UavPair full;       // one entry per 5 s window per class
    UavPair decimated;  // one entry per 50 s window per class
};

struct DatasetBuild {
    AttackKind attack_kind = AttackKind::None;
    double attacker_ratio = 0.0;
    std::vector<UavData> uavs;  // ordered by (topology, node)
    // one line per UAV that needed a balancing fallback, for the manifest
    std::vector<std::string> balance_notes;
};

// window index of a sample within its run
int window_index_of(const Sample& s, double window_s);

// attack_free and attacked are flattened sample streams covering the same
// topology ids; benign halves come from the attack-free twin, malicious
// halves from malicious-labeled attacked windows, balanced per class by
// seeded resampling when a UAV lacks malicious coverage.
DatasetBuild build_dataset(const std::vector<Sample>& attack_free,
                           const std::vector<Sample>& attacked, double duration_s,
                           double window_s, std::uint64_t root_seed);

// first k of a seeded per-class permutation, so smaller shots nest inside
// larger ones for a fixed seed
UavPair shot_subset(const UavData& uav, int k, std::uint64_t root_seed);

struct SplitPair {
    UavPair train;
    UavPair test;
};

// stratified: per class, floor(train_frac * m) to train after a seeded
// shuffle, remainder to test
SplitPair split_train_test(const UavPair& data, double train_frac, std::uint64_t seed);

// schema: topology_id,attack_kind,attacker_ratio,node_id,window_start_s,
// <31 feature names>,label; rows sorted by (topology, node, window start);
// values in decimal notation that parses back bit-identically
void export_samples_csv(const std::vector<Sample>& samples, const std::string& path);
std::vector<Sample> import_samples_csv(const std::string& path);

}  // namespace fanet
