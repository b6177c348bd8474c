#include "fanet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "fanet/errors.hpp"
#include "fanet/rng.hpp"
#include "fanet/textio.hpp"

namespace fanet {

int window_index_of(const Sample& s, double window_s) {
    return static_cast<int>(std::llround(s.window_start_s / window_s));
}

namespace {

using NodeKey = std::pair<int, int>;  // topology, node

void sort_by_window(std::vector<Sample>& v) {
    std::stable_sort(v.begin(), v.end(), [](const Sample& a, const Sample& b) {
        return a.window_start_s < b.window_start_s;
    });
}

// everything the pool has, topped up by seeded draws with replacement
std::vector<Sample> top_up(const std::vector<Sample>& pool, int target, Rng& rng) {
    std::vector<Sample> out = pool;
    while (static_cast<int>(out.size()) < target)
        out.push_back(pool[rng.uniform_int(pool.size())]);
    return out;
}

// seeded subset when the pool is larger than needed
std::vector<Sample> draw_subset(const std::vector<Sample>& pool, int target, Rng& rng) {
    auto idx = rng.sample_without_replacement(pool.size(), static_cast<std::size_t>(target));
    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(target));
    for (auto i : idx) out.push_back(pool[i]);
    return out;
}

std::vector<Sample> balance_class(const std::vector<Sample>& uav_pool,
                                  const std::vector<Sample>& uav_wide_pool,
                                  const std::vector<Sample>& topo_pool, int target, Rng& rng,
                                  const NodeKey& key, const char* resolution,
                                  std::vector<std::string>& notes) {
    if (static_cast<int>(uav_pool.size()) == target) return uav_pool;
    char line[160];
    if (!uav_pool.empty()) {
        std::snprintf(line, sizeof(line),
                      "topology %d node %d: %s malicious pool %zu < %d, resampled",
                      key.first, key.second, resolution, uav_pool.size(), target);
        notes.push_back(line);
        return top_up(uav_pool, target, rng);
    }
    if (!uav_wide_pool.empty()) {
        std::snprintf(line, sizeof(line),
                      "topology %d node %d: no %s malicious windows, filled from the node's "
                      "5 s stream",
                      key.first, key.second, resolution);
        notes.push_back(line);
        if (static_cast<int>(uav_wide_pool.size()) >= target)
            return draw_subset(uav_wide_pool, target, rng);
        return top_up(uav_wide_pool, target, rng);
    }
    if (topo_pool.empty())
        throw ConfigError("attacked run carries no malicious samples for topology " +
                          std::to_string(key.first));
    std::snprintf(line, sizeof(line),
                  "topology %d node %d: node never touched attack traffic, %s class filled "
                  "from the topology pool",
                  key.first, key.second, resolution);
    notes.push_back(line);
    if (static_cast<int>(topo_pool.size()) >= target) return draw_subset(topo_pool, target, rng);
    return top_up(topo_pool, target, rng);
}

}  // namespace

DatasetBuild build_dataset(const std::vector<Sample>& attack_free,
                           const std::vector<Sample>& attacked, double duration_s,
                           double window_s, std::uint64_t root_seed) {
    if (attack_free.empty()) throw ConfigError("attack-free sample stream is empty");
    if (attacked.empty()) throw ConfigError("attacked sample stream is empty");
    const int total_windows = static_cast<int>(std::llround(duration_s / window_s));
    const int dec_target = (total_windows + kDecimationStride - 1) / kDecimationStride;

    DatasetBuild build;
    build.attack_kind = attacked.front().attack_kind;
    build.attacker_ratio = attacked.front().attacker_ratio;
    if (build.attack_kind == AttackKind::None)
        throw ConfigError("attacked stream comes from an attack-free run");

    std::map<NodeKey, std::vector<Sample>> benign_by_node;
    for (const Sample& s : attack_free) {
        if (s.attack_kind != AttackKind::None || s.label != 0)
            throw ConfigError("attack-free stream contains attacked or malicious samples");
        benign_by_node[{s.topology_id, s.node_id}].push_back(s);
    }
    std::map<NodeKey, std::vector<Sample>> malicious_by_node;
    std::map<int, std::vector<Sample>> malicious_by_topology;
    for (const Sample& s : attacked) {
        if (s.attack_kind != build.attack_kind || s.attacker_ratio != build.attacker_ratio)
            throw ConfigError("attacked stream mixes runs of different attack settings");
        if (s.label != 1) continue;
        malicious_by_node[{s.topology_id, s.node_id}].push_back(s);
        malicious_by_topology[s.topology_id].push_back(s);
    }

    for (auto& [key, benign] : benign_by_node) {
        sort_by_window(benign);
        if (static_cast<int>(benign.size()) != total_windows)
            throw ConfigError("attack-free run for topology " + std::to_string(key.first) +
                              " node " + std::to_string(key.second) + " has " +
                              std::to_string(benign.size()) + " windows, expected " +
                              std::to_string(total_windows));
        UavData uav;
        uav.topology_id = key.first;
        uav.node_id = key.second;
        uav.full.benign = benign;
        for (const Sample& s : benign)
            if (window_index_of(s, window_s) % kDecimationStride == 0)
                uav.decimated.benign.push_back(s);

        std::vector<Sample> mal_full = malicious_by_node[key];
        sort_by_window(mal_full);
        std::vector<Sample> mal_dec;
        for (const Sample& s : mal_full)
            if (window_index_of(s, window_s) % kDecimationStride == 0) mal_dec.push_back(s);
        const auto& topo_pool = malicious_by_topology[key.first];

        Rng dec_rng(seed_stream(root_seed, "balance", key.first, key.second, 0));
        uav.decimated.malicious = balance_class(mal_dec, mal_full, topo_pool, dec_target,
                                                dec_rng, key, "decimated", build.balance_notes);
        Rng full_rng(seed_stream(root_seed, "balance", key.first, key.second, 1));
        uav.full.malicious = balance_class(mal_full, mal_full, topo_pool, total_windows,
                                           full_rng, key, "full-rate", build.balance_notes);
        build.uavs.push_back(std::move(uav));
    }
    return build;
}

UavPair shot_subset(const UavData& uav, int k, std::uint64_t root_seed) {
    if (k < 1) throw ConfigError("shot size must be at least 1");
    const auto& dec = uav.decimated;
    if (k > static_cast<int>(dec.benign.size()) || k > static_cast<int>(dec.malicious.size()))
        throw ConfigError("shot size " + std::to_string(k) + " exceeds the per-class pool of " +
                          std::to_string(dec.benign.size()));
    UavPair out;
    for (int cls = 0; cls < 2; ++cls) {
        const auto& pool = cls == 0 ? dec.benign : dec.malicious;
        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(seed_stream(root_seed, "shots", uav.topology_id, uav.node_id, cls));
        rng.shuffle(order);
        auto& dst = cls == 0 ? out.benign : out.malicious;
        for (int i = 0; i < k; ++i) dst.push_back(pool[order[static_cast<std::size_t>(i)]]);
    }
    return out;
}

SplitPair split_train_test(const UavPair& data, double train_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw ConfigError("train fraction must lie strictly between 0 and 1");
    SplitPair out;
    for (int cls = 0; cls < 2; ++cls) {
        const auto& pool = cls == 0 ? data.benign : data.malicious;
        const int m = static_cast<int>(pool.size());
        if (m < 2)
            throw ConfigError("need at least 2 samples per class to split, have " +
                              std::to_string(m));
        const int train_n = static_cast<int>(std::floor(train_frac * m));
        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(seed_stream(seed, "split", cls));
        rng.shuffle(order);
        auto& train = cls == 0 ? out.train.benign : out.train.malicious;
        auto& test = cls == 0 ? out.test.benign : out.test.malicious;
        for (int i = 0; i < m; ++i) {
            const Sample& s = pool[order[static_cast<std::size_t>(i)]];
            (i < train_n ? train : test).push_back(s);
        }
    }
    return out;
}

namespace {

std::string csv_header() {
    std::string h = "topology_id,attack_kind,attacker_ratio,node_id,window_start_s";
    for (const auto& name : feature_names()) {
        h += ',';
        h += name;
    }
    h += ",label";
    return h;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

void export_samples_csv(const std::vector<Sample>& samples, const std::string& path) {
    std::vector<Sample> rows = samples;
    std::stable_sort(rows.begin(), rows.end(), [](const Sample& a, const Sample& b) {
        if (a.topology_id != b.topology_id) return a.topology_id < b.topology_id;
        if (a.node_id != b.node_id) return a.node_id < b.node_id;
        return a.window_start_s < b.window_start_s;
    });
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << csv_header() << '\n';
    for (const Sample& s : rows) {
        out << s.topology_id << ',' << to_string(s.attack_kind) << ','
            << format_csv_value(s.attacker_ratio) << ',' << s.node_id << ','
            << format_csv_value(s.window_start_s);
        for (double v : s.f) out << ',' << format_csv_value(v);
        out << ',' << s.label << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

std::vector<Sample> import_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file, expected a header");
    if (line == csv_header() + "\r") line.pop_back();
    if (line != csv_header()) throw ConfigError(path + ": unexpected csv header");
    std::vector<Sample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != 6 + kFeatureCount)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(6 + kFeatureCount) + " fields, got " +
                              std::to_string(fields.size()));
        try {
            Sample s;
            s.topology_id = static_cast<int>(parse_int(fields[0]));
            s.attack_kind = attack_kind_from_string(std::string(fields[1]));
            s.attacker_ratio = parse_double(fields[2]);
            s.node_id = static_cast<int>(parse_int(fields[3]));
            s.window_start_s = parse_double(fields[4]);
            for (int i = 0; i < kFeatureCount; ++i)
                s.f[static_cast<std::size_t>(i)] = parse_double(fields[static_cast<std::size_t>(5 + i)]);
            long label = parse_int(fields[5 + kFeatureCount]);
            if (label != 0 && label != 1)
                throw std::runtime_error("label must be 0 or 1");
            s.label = static_cast<int>(label);
            samples.push_back(s);
        } catch (const std::exception& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return samples;
}

}  // namespace fanet
