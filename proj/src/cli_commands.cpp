// Subcommand implementations. Each stage hashes its inputs and outputs into
// a manifest so reruns with unchanged digests become no-ops, and every
// random choice descends from the root seed through named substreams.

#include "fanet/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fanet/config.hpp"
#include "fanet/dataset.hpp"
#include "fanet/errors.hpp"
#include "fanet/eval.hpp"
#include "fanet/federated.hpp"
#include "fanet/hyperband.hpp"
#include "fanet/nn.hpp"
#include "fanet/privacy.hpp"
#include "fanet/rng.hpp"
#include "fanet/sim.hpp"
#include "fanet/textio.hpp"

namespace fanet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

std::string file_digest_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file for hashing: " + path);
    Fnv1a h;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h.put_bytes(buf, static_cast<std::size_t>(in.gcount()));
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(h.value()));
    return hex;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("short write on " + path);
}

int ratio_percent(double ratio) { return static_cast<int>(std::lround(ratio * 100.0)); }

// ---------------------------------------------------------------- simulate

struct RunSpec {
    int topology = 0;
    AttackKind kind = AttackKind::None;
    double ratio = 0.0;
    std::uint64_t sim_seed = 0;
    std::string file;
};

std::vector<RunSpec> grid_runs(const SimulateConfig& cfg, std::uint64_t root) {
    std::vector<RunSpec> runs;
    for (int t = 0; t < cfg.grid.topologies; ++t) {
        // one seed per topology shared by every attack variant, so the
        // clean twin and the attacked runs see the same flights and traffic
        std::uint64_t sim_seed =
            seed_stream(root, "topology", static_cast<std::uint64_t>(t));
        auto add = [&](AttackKind k, double r) {
            RunSpec spec;
            spec.topology = t;
            spec.kind = k;
            spec.ratio = r;
            spec.sim_seed = sim_seed;
            spec.file = "t" + std::to_string(t) + "_" + to_string(k) + "_" +
                        std::to_string(ratio_percent(r)) + ".csv";
            runs.push_back(std::move(spec));
        };
        add(AttackKind::None, 0.0);
        for (AttackKind k : cfg.grid.attacks)
            for (double r : cfg.grid.ratios) add(k, r);
    }
    return runs;
}

json simulate_manifest_skeleton(const SimulateConfig& cfg, std::uint64_t root,
                                const std::string& config_digest,
                                const std::vector<RunSpec>& runs) {
    json m;
    m["tool_version"] = kToolVersion;
    m["stage"] = "simulate";
    m["config_digest"] = config_digest;
    m["seed"] = root;
    m["duration_s"] = cfg.sim.duration_s;
    m["window_s"] = cfg.sim.window_s;
    m["node_count"] = cfg.sim.node_count;
    m["topologies"] = cfg.grid.topologies;
    m["runs"] = json::array();
    for (const RunSpec& r : runs) {
        json e;
        e["file"] = r.file;
        e["topology"] = r.topology;
        e["attack"] = to_string(r.kind);
        e["ratio"] = r.ratio;
        e["sim_seed"] = r.sim_seed;
        m["runs"].push_back(std::move(e));
    }
    return m;
}

// true when an existing manifest matches the planned stage byte for byte
// once per-file digests are set aside, and every listed file still hashes
// to its recorded digest
bool outputs_current(const std::string& dir, const json& skeleton,
                     const std::string& digest_key) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) return false;
    json have;
    try {
        in >> have;
    } catch (...) {
        return false;
    }
    json stripped = have;
    stripped.erase("balance_notes");  // an output, unknowable before building
    if (!stripped.contains("runs") || !stripped["runs"].is_array()) return false;
    for (auto& e : stripped["runs"]) {
        if (!e.is_object() || !e.contains(digest_key)) return false;
        e.erase(digest_key);
    }
    if (stripped != skeleton) return false;
    try {
        for (const auto& e : have["runs"]) {
            std::string path = dir + "/" + e.at("file").get<std::string>();
            if (!fs::exists(path)) return false;
            if (file_digest_hex(path) != e.at(digest_key).get<std::string>())
                return false;
        }
    } catch (...) {
        return false;
    }
    return true;
}

// ---------------------------------------------------------------- dataset

struct TraceRun {
    std::string file;
    std::string digest;
    int topology = 0;
    AttackKind kind = AttackKind::None;
    double ratio = 0.0;
};

struct TracesManifest {
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    double window_s = 0.0;
    std::vector<TraceRun> runs;
};

TracesManifest load_traces_manifest(const std::string& dir) {
    const std::string path = dir + "/manifest.json";
    json j = parse_json_file(path);
    reject_unknown_keys(j,
                        {"tool_version", "stage", "config_digest", "seed", "duration_s",
                         "window_s", "node_count", "topologies", "runs"},
                        path);
    if (!j.contains("stage") || j.at("stage").get<std::string>() != "simulate")
        throw ConfigError(path + " is not a simulate-stage manifest");
    TracesManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.duration_s = j.at("duration_s").get<double>();
    m.window_s = j.at("window_s").get<double>();
    for (const auto& e : j.at("runs")) {
        reject_unknown_keys(e, {"file", "digest", "topology", "attack", "ratio", "sim_seed"},
                            path + " runs[]");
        TraceRun r;
        r.file = e.at("file").get<std::string>();
        r.digest = e.at("digest").get<std::string>();
        r.topology = e.at("topology").get<int>();
        r.kind = attack_kind_from_string(e.at("attack").get<std::string>());
        r.ratio = e.at("ratio").get<double>();
        m.runs.push_back(std::move(r));
    }
    if (m.runs.empty()) throw ConfigError(path + " lists no runs");
    return m;
}

struct Combo {
    AttackKind kind = AttackKind::None;
    double ratio = 0.0;
    std::string dir_name;
    std::vector<const TraceRun*> runs;  // one per topology, manifest order
};

std::string combo_dir_name(AttackKind kind, double ratio) {
    return std::string(to_string(kind)) + "_" + std::to_string(ratio_percent(ratio));
}

// within one UAV's class pool a sample is identified by its window start
std::set<double> sample_keys(const std::vector<Sample>& v) {
    std::set<double> keys;
    for (const Sample& s : v) keys.insert(s.window_start_s);
    return keys;
}

bool subset_of(const std::set<double>& small, const std::set<double>& big) {
    for (double k : small)
        if (!big.count(k)) return false;
    return true;
}

// ------------------------------------------------------------------ train

struct TrainPlan {
    IdsVariant variant = IdsVariant::FewShot;
    ArchKind model = ArchKind::Cnn;
    AttackKind attack = AttackKind::Sinkhole;
    double ratio = 0.0;
    int shot = 36;
    int rounds = -1;  // resolved to the variant default when absent
    double learning_rate = 0.003;
    int batch_size = 5;
    bool dropout = true;
    std::vector<std::uint64_t> seeds;
};

TrainPlan load_train_plan(const std::string& path) {
    json j = parse_json_file(path);
    reject_unknown_keys(j,
                        {"variant", "model", "attack", "ratio", "shot", "rounds",
                         "learning_rate", "batch_size", "dropout", "seeds"},
                        path);
    for (const char* key : {"variant", "model", "attack", "ratio"})
        if (!j.contains(key))
            throw ConfigError(std::string("plan requires '") + key + "': " + path);
    TrainPlan p;
    p.variant = ids_variant_from_string(j.at("variant").get<std::string>());
    p.model = arch_kind_from_string(j.at("model").get<std::string>());
    p.attack = attack_kind_from_string(j.at("attack").get<std::string>());
    if (p.attack == AttackKind::None)
        throw ConfigError("plans train against an attacked dataset, not 'none'");
    p.ratio = j.at("ratio").get<double>();
    if (!(p.ratio > 0.0 && p.ratio < 1.0))
        throw ConfigError("plan ratio must lie in (0, 1)");
    if (j.contains("shot")) p.shot = j.at("shot").get<int>();
    if (p.shot < 1) throw ConfigError("plan shot must be at least 1");
    p.rounds = j.contains("rounds") ? j.at("rounds").get<int>()
                                    : default_rounds(p.variant);
    if (p.rounds < 1) throw ConfigError("plan rounds must be at least 1");
    if (j.contains("learning_rate")) p.learning_rate = j.at("learning_rate").get<double>();
    if (!(p.learning_rate > 0.0)) throw ConfigError("plan learning_rate must be positive");
    if (j.contains("batch_size")) p.batch_size = j.at("batch_size").get<int>();
    if (p.batch_size < 1) throw ConfigError("plan batch_size must be at least 1");
    if (j.contains("dropout")) p.dropout = j.at("dropout").get<bool>();
    if (j.contains("seeds")) {
        for (const auto& s : j.at("seeds")) p.seeds.push_back(s.get<std::uint64_t>());
        if (p.seeds.empty()) throw ConfigError("plan seeds must not be empty");
    } else {
        p.seeds.push_back(0);
    }
    return p;
}

// the federated baselines train on the full 5 s stream; the pooled and
// few-shot tracks train on the decimated k-shot files
bool uses_full_stream(IdsVariant v) {
    return v == IdsVariant::Federated || v == IdsVariant::Local;
}

DatasetBuild rebuild_from_rows(const std::vector<Sample>& rows, AttackKind kind,
                               double ratio, bool full_stream) {
    DatasetBuild b;
    b.attack_kind = kind;
    b.attacker_ratio = ratio;
    std::map<std::pair<int, int>, std::size_t> index;
    for (const Sample& s : rows) {
        auto key = std::make_pair(s.topology_id, s.node_id);
        auto it = index.find(key);
        if (it == index.end()) {
            UavData u;
            u.topology_id = s.topology_id;
            u.node_id = s.node_id;
            b.uavs.push_back(std::move(u));
            it = index.emplace(key, b.uavs.size() - 1).first;
        }
        UavPair& pool = full_stream ? b.uavs[it->second].full : b.uavs[it->second].decimated;
        if (s.label == 0)
            pool.benign.push_back(s);
        else if (s.label == 1)
            pool.malicious.push_back(s);
        else
            throw ConfigError("dataset rows must be labeled 0 or 1");
    }
    return b;
}

struct LoadedDataset {
    DatasetBuild build;
    int topologies = 0;
    std::string source_file;
};

LoadedDataset load_plan_dataset(const TrainPlan& plan, const std::string& dataset_dir) {
    const bool full_stream = uses_full_stream(plan.variant);
    const std::string combo = dataset_dir + "/" + combo_dir_name(plan.attack, plan.ratio);
    const std::string file =
        combo + "/" + (full_stream ? "full.csv" : "shot" + std::to_string(plan.shot) + ".csv");
    if (!fs::exists(file))
        throw ConfigError("dataset is missing " + file +
                          "; rerun the dataset stage with a matching shot list");
    LoadedDataset out;
    out.source_file = file;
    out.build = rebuild_from_rows(import_samples_csv(file), plan.attack, plan.ratio,
                                  full_stream);
    std::set<int> topo;
    for (const UavData& u : out.build.uavs) topo.insert(u.topology_id);
    out.topologies = static_cast<int>(topo.size());
    if (out.topologies == 0) throw ConfigError("dataset file has no rows: " + file);
    return out;
}

ExperimentPlan to_experiment_plan(const TrainPlan& plan, std::uint64_t seed) {
    ExperimentPlan ep;
    ep.variant = plan.variant;
    ep.model = plan.model;
    ep.shot = plan.shot;
    ep.rounds = plan.rounds;
    ep.learning_rate = plan.learning_rate;
    ep.batch_size = plan.batch_size;
    ep.dropout_enabled = plan.dropout;
    ep.seed = seed;
    return ep;
}

void write_local_breakdown(const std::string& path, const LocalResult& r) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "uav_id,tp,fp,tn,fn,accuracy\n";
    for (std::size_t i = 0; i < r.client_ids.size(); ++i) {
        const ConfusionMatrix& cm = r.confusions[i];
        out << r.client_ids[i] << ',' << cm.tp << ',' << cm.fp << ',' << cm.tn << ','
            << cm.fn << ',' << format_csv_value(r.accuracies[i]) << '\n';
    }
    for (int id : r.excluded_ids) out << id << ",na,na,na,na,na\n";
    if (!out) throw IoError("short write on " + path);
}

// ------------------------------------------------------------------- tune

SearchSpace load_search_space(const std::string& path) {
    SearchSpace space;
    if (path.empty()) return space;
    json j = parse_json_file(path);
    reject_unknown_keys(j, {"learning_rate_lo", "learning_rate_hi", "batch_size"}, path);
    if (j.contains("learning_rate_lo"))
        space.learning_rate_lo = j.at("learning_rate_lo").get<double>();
    if (j.contains("learning_rate_hi"))
        space.learning_rate_hi = j.at("learning_rate_hi").get<double>();
    if (j.contains("batch_size")) space.batch_size = j.at("batch_size").get<int>();
    if (!(space.learning_rate_lo > 0.0) ||
        !(space.learning_rate_hi >= space.learning_rate_lo))
        throw ConfigError("search space needs 0 < learning_rate_lo <= learning_rate_hi");
    if (space.batch_size < 1) throw ConfigError("search space batch_size must be positive");
    return space;
}

}  // namespace

bool cmd_simulate(const SimulateArgs& args) {
    SimulateConfig cfg = load_simulate_config(args.config_path);
    const std::string config_digest = file_digest_hex(args.config_path);
    const std::vector<RunSpec> runs = grid_runs(cfg, args.seed);
    json skeleton = simulate_manifest_skeleton(cfg, args.seed, config_digest, runs);

    if (outputs_current(args.out_dir, skeleton, "digest")) {
        std::printf("simulate: up to date (%zu traces in %s)\n", runs.size(),
                    args.out_dir.c_str());
        return false;
    }
    fs::create_directories(args.out_dir);

    std::vector<std::string> digests(runs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= runs.size()) return;
            try {
                SimConfig c = cfg.sim;
                c.topology_id = runs[i].topology;
                c.seed = runs[i].sim_seed;
                c.attack_kind = runs[i].kind;
                c.attacker_ratio = runs[i].ratio;
                SimTrace trace = run_simulation(c);
                const std::string path = args.out_dir + "/" + runs[i].file;
                export_samples_csv(trace.samples, path);
                digests[i] = file_digest_hex(path);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(runs.size());
            }
        }
    };
    std::size_t workers = std::min<std::size_t>(
        runs.size(), static_cast<std::size_t>(std::max(args.jobs, 1)));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    for (std::size_t i = 0; i < runs.size(); ++i)
        skeleton["runs"][i]["digest"] = digests[i];
    write_json_file(args.out_dir + "/manifest.json", skeleton);
    std::printf("simulate: wrote %zu traces to %s\n", runs.size(), args.out_dir.c_str());
    return true;
}

bool cmd_dataset(const DatasetArgs& args) {
    TracesManifest traces = load_traces_manifest(args.traces_dir);
    const std::uint64_t root = args.seed_given ? args.seed : traces.seed;
    if (args.shots.empty()) throw ConfigError("dataset needs at least one shot size");
    for (int k : args.shots)
        if (k < 1) throw ConfigError("shot sizes must be positive");
    std::vector<int> distinct(args.shots.begin(), args.shots.end());
    std::sort(distinct.begin(), distinct.end());
    if (std::adjacent_find(distinct.begin(), distinct.end()) != distinct.end())
        throw ConfigError("shot sizes must be distinct");

    for (const TraceRun& r : traces.runs) {
        const std::string path = args.traces_dir + "/" + r.file;
        if (!fs::exists(path) || file_digest_hex(path) != r.digest)
            throw ConfigError("trace " + path +
                              " does not match its manifest; rerun simulate");
    }

    // pair every attacked run with its topology's clean twin
    std::map<int, const TraceRun*> clean;
    for (const TraceRun& r : traces.runs) {
        if (r.kind != AttackKind::None) continue;
        if (!clean.emplace(r.topology, &r).second)
            throw ConfigError("topology " + std::to_string(r.topology) +
                              " has two attack-free runs");
    }
    std::vector<Combo> combos;
    std::map<std::string, std::size_t> combo_index;
    for (const TraceRun& r : traces.runs) {
        if (r.kind == AttackKind::None) continue;
        if (!clean.count(r.topology))
            throw ConfigError("topology " + std::to_string(r.topology) +
                              " has no attack-free twin in the traces");
        const std::string name = combo_dir_name(r.kind, r.ratio);
        auto it = combo_index.find(name);
        if (it == combo_index.end()) {
            Combo c;
            c.kind = r.kind;
            c.ratio = r.ratio;
            c.dir_name = name;
            combos.push_back(std::move(c));
            it = combo_index.emplace(name, combos.size() - 1).first;
        }
        for (const TraceRun* prev : combos[it->second].runs)
            if (prev->topology == r.topology)
                throw ConfigError("duplicate run for topology " +
                                  std::to_string(r.topology) + " in " + name);
        combos[it->second].runs.push_back(&r);
    }
    if (combos.empty()) throw ConfigError("traces contain no attacked runs");

    json skeleton;
    skeleton["tool_version"] = kToolVersion;
    skeleton["stage"] = "dataset";
    skeleton["traces_digest"] = file_digest_hex(args.traces_dir + "/manifest.json");
    skeleton["seed"] = root;
    skeleton["shots"] = args.shots;
    skeleton["runs"] = json::array();
    std::vector<std::string> file_names;
    file_names.push_back("full.csv");
    for (int k : args.shots) file_names.push_back("shot" + std::to_string(k) + ".csv");
    for (const Combo& c : combos)
        for (const std::string& name : file_names) {
            json e;
            e["file"] = c.dir_name + "/" + name;
            skeleton["runs"].push_back(std::move(e));
        }

    if (outputs_current(args.out_dir, skeleton, "digest")) {
        std::printf("dataset: up to date (%zu combos in %s)\n", combos.size(),
                    args.out_dir.c_str());
        return false;
    }

    std::vector<std::string> digests;
    json notes = json::array();
    for (const Combo& c : combos) {
        std::vector<Sample> attack_free;
        std::vector<Sample> attacked;
        for (const TraceRun* r : c.runs) {
            std::vector<Sample> twin =
                import_samples_csv(args.traces_dir + "/" + clean.at(r->topology)->file);
            attack_free.insert(attack_free.end(), twin.begin(), twin.end());
            std::vector<Sample> rows = import_samples_csv(args.traces_dir + "/" + r->file);
            attacked.insert(attacked.end(), rows.begin(), rows.end());
        }
        DatasetBuild build = build_dataset(attack_free, attacked, traces.duration_s,
                                           traces.window_s, root);
        const std::string dir = args.out_dir + "/" + c.dir_name;
        fs::create_directories(dir);

        std::vector<Sample> full_rows;
        for (const UavData& u : build.uavs) {
            full_rows.insert(full_rows.end(), u.full.benign.begin(), u.full.benign.end());
            full_rows.insert(full_rows.end(), u.full.malicious.begin(),
                             u.full.malicious.end());
        }
        export_samples_csv(full_rows, dir + "/full.csv");
        digests.push_back(file_digest_hex(dir + "/full.csv"));

        // draw each shot once, write it, and keep it for the nesting audit
        std::map<int, std::vector<UavPair>> drawn;
        for (int k : args.shots) {
            std::vector<UavPair>& subsets = drawn[k];
            std::vector<Sample> rows;
            for (const UavData& u : build.uavs) {
                subsets.push_back(shot_subset(u, k, root));
                const UavPair& p = subsets.back();
                rows.insert(rows.end(), p.benign.begin(), p.benign.end());
                rows.insert(rows.end(), p.malicious.begin(), p.malicious.end());
            }
            const std::string path = dir + "/shot" + std::to_string(k) + ".csv";
            export_samples_csv(rows, path);
            digests.push_back(file_digest_hex(path));
        }
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
            const std::vector<UavPair>& small = drawn[distinct[i]];
            const std::vector<UavPair>& big = drawn[distinct[i + 1]];
            for (std::size_t u = 0; u < small.size(); ++u) {
                if (!subset_of(sample_keys(small[u].benign), sample_keys(big[u].benign)) ||
                    !subset_of(sample_keys(small[u].malicious),
                               sample_keys(big[u].malicious)))
                    throw InternalError("shot subsets failed to nest in " + c.dir_name);
            }
        }
        for (const std::string& n : build.balance_notes)
            notes.push_back(c.dir_name + ": " + n);
    }

    for (std::size_t i = 0; i < digests.size(); ++i)
        skeleton["runs"][i]["digest"] = digests[i];
    skeleton["balance_notes"] = notes;
    write_json_file(args.out_dir + "/manifest.json", skeleton);
    std::printf("dataset: wrote %zu combos to %s\n", combos.size(), args.out_dir.c_str());
    return true;
}

void cmd_train(const TrainArgs& args) {
    TrainPlan plan = load_train_plan(args.plan_path);
    LoadedDataset data = load_plan_dataset(plan, args.dataset_dir);
    const bool full_stream = uses_full_stream(plan.variant);
    const DataResolution resolution =
        full_stream ? DataResolution::Full : DataResolution::Decimated;
    fs::create_directories(args.out_dir);

    std::vector<ExperimentRecord> records;
    std::ostringstream timings;
    timings << "train " << to_string(plan.variant) << " " << to_string(plan.model)
            << " " << to_string(plan.attack) << " "
            << format_percent(plan.ratio) << " from " << data.source_file << '\n';
    double total_wall = 0.0;

    for (std::uint64_t seed : plan.seeds) {
        ExperimentPlan ep = to_experiment_plan(plan, seed);
        std::vector<ClientSplit> splits =
            make_client_splits(data.build, resolution, plan.shot, 0.8, seed);
        PrivacyAudit::reset();
        auto start = std::chrono::steady_clock::now();

        ExperimentRecord rec;
        rec.attack = to_string(plan.attack);
        rec.attacker_ratio = plan.ratio;
        rec.topologies = data.topologies;
        rec.variant = to_string(plan.variant);
        rec.model = to_string(plan.model);
        rec.shot = full_stream ? 0 : plan.shot;  // 0 marks the full 5 s stream
        rec.rounds = plan.rounds;
        rec.learning_rate = plan.learning_rate;
        rec.batch_size = plan.batch_size;
        rec.seed = seed;
        rec.weights_per_model = static_cast<long>(arch_param_count(plan.model));

        const std::string tag = "_seed" + std::to_string(seed);
        switch (plan.variant) {
            case IdsVariant::Centralized: {
                CentralResult r = run_centralized(ep, splits);
                rec.cm = r.confusion;
                save_weights(r.model, args.out_dir + "/model" + tag + ".txt");
                break;
            }
            case IdsVariant::Local: {
                LocalResult r = run_local(ep, splits);
                for (const ConfusionMatrix& cm : r.confusions) {
                    rec.cm.tp += cm.tp;
                    rec.cm.fp += cm.fp;
                    rec.cm.tn += cm.tn;
                    rec.cm.fn += cm.fn;
                }
                write_local_breakdown(args.out_dir + "/clients" + tag + ".csv", r);
                const std::string model_dir = args.out_dir + "/models" + tag;
                fs::create_directories(model_dir);
                for (std::size_t i = 0; i < r.client_ids.size(); ++i)
                    save_weights(r.models[i], model_dir + "/client_" +
                                                  std::to_string(r.client_ids[i]) +
                                                  ".txt");
                break;
            }
            case IdsVariant::Federated:
            case IdsVariant::FewShot: {
                FederatedResult r = run_federated(ep, splits);
                if (PrivacyAudit::server_sample_reads() != 0)
                    throw InternalError("server-side code read client samples");
                rec.cm = r.confusion;
                rec.nodes = static_cast<long>(splits.size());
                rec.comm_rounds = plan.rounds;
                rec.bytes_per_weight = 8;
                save_weights(r.global, args.out_dir + "/model" + tag + ".txt");
                break;
            }
        }
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                    start)
                          .count();
        total_wall += wall;
        // reports stay byte-identical across reruns; real timings live in
        // timings.txt which determinism comparisons must skip
        rec.wall_seconds = 0.0;
        timings << "seed " << seed << ": " << format_fixed(wall, 3) << " s\n";
        records.push_back(std::move(rec));
    }

    write_report_csv(args.out_dir + "/report.csv", records);
    write_summary_text(args.out_dir + "/summary.txt", records);
    timings << "total: " << format_fixed(total_wall, 3) << " s\n";
    std::ofstream tf(args.out_dir + "/timings.txt");
    if (!tf) throw IoError("cannot write timings in " + args.out_dir);
    tf << timings.str();
    std::printf("train: wrote %zu seed runs to %s\n", records.size(),
                args.out_dir.c_str());
}

void cmd_tune(const TuneArgs& args) {
    TrainPlan plan = load_train_plan(args.plan_path);
    LoadedDataset data = load_plan_dataset(plan, args.dataset_dir);
    const DataResolution resolution = uses_full_stream(plan.variant)
                                          ? DataResolution::Full
                                          : DataResolution::Decimated;
    SearchSpace space = load_search_space(args.space_path);
    const long budget = args.budget > 0 ? args.budget : default_rounds(plan.variant);
    if (args.eta < 2) throw ConfigError("eta must be at least 2");

    const std::uint64_t seed = plan.seeds.front();
    ExperimentPlan ep = to_experiment_plan(plan, seed);
    std::vector<ClientSplit> splits =
        make_client_splits(data.build, resolution, plan.shot, 0.8, seed);
    Objective objective = make_validation_objective(ep, splits);
    HyperbandResult res = run_hyperband(space, objective, budget, args.eta, seed);

    fs::create_directories(args.out_dir);
    write_ledger_csv(args.out_dir + "/ledger.csv", res.ledger);
    json best;
    best["learning_rate"] = res.best.learning_rate;
    best["batch_size"] = res.best.batch_size;
    best["sample_index"] = res.best.sample_index;
    best["score"] = res.best_score;
    best["budget"] = budget;
    best["eta"] = args.eta;
    best["brackets"] = res.brackets;
    best["total_resource"] = res.total_resource;
    write_json_file(args.out_dir + "/best.json", best);
    std::printf("tune: best learning_rate %s (validation accuracy %s) after %ld rounds\n",
                format_double(res.best.learning_rate).c_str(),
                format_double(res.best_score).c_str(), res.total_resource);
}

std::uint64_t cmd_cost(const CostArgs& args) {
    if (args.nodes < 0 || args.weights < 0 || args.rounds < 0 ||
        args.bytes_per_weight < 0)
        throw ConfigError("communication cost factors must not be negative");
    long weights = args.weights;
    if (!args.model.empty()) {
        long advertised =
            static_cast<long>(arch_param_count(arch_kind_from_string(args.model)));
        if (weights > 0 && weights != advertised)
            throw ConfigError("--weights " + std::to_string(weights) +
                              " disagrees with " + args.model + " (" +
                              std::to_string(advertised) + " parameters)");
        weights = advertised;
    }
    std::uint64_t cost = comm_cost(static_cast<std::uint64_t>(args.nodes),
                                   static_cast<std::uint64_t>(weights),
                                   static_cast<std::uint64_t>(args.rounds),
                                   static_cast<std::uint64_t>(args.bytes_per_weight));
    std::printf("%ld nodes x %ld weights x %ld rounds x %ld bytes = %llu bytes\n",
                args.nodes, weights, args.rounds, args.bytes_per_weight,
                static_cast<unsigned long long>(cost));
    return cost;
}

std::size_t cmd_report(const ReportArgs& args) {
    if (args.run_dirs.empty())
        throw ConfigError("report needs at least one run directory");
    std::vector<ExperimentRecord> all;
    for (const std::string& dir : args.run_dirs) {
        std::vector<ExperimentRecord> part = read_report_csv(dir + "/report.csv");
        all.insert(all.end(), part.begin(), part.end());
    }
    fs::create_directories(args.out_dir);
    write_report_csv(args.out_dir + "/report.csv", all);
    write_summary_text(args.out_dir + "/summary.txt", all);
    std::printf("report: merged %zu seed runs from %zu directories into %s\n",
                all.size(), args.run_dirs.size(), args.out_dir.c_str());
    return all.size();
}

int run_cli(const std::vector<std::string>& args) {
    try {
        CLI::App app{"deterministic fanet simulation and intrusion-detection pipeline"};
        app.set_version_flag("--version", std::string(kToolVersion));
        app.require_subcommand(1);

        SimulateArgs sim;
        CLI::App* c_sim = app.add_subcommand("simulate", "run the simulation grid");
        c_sim->add_option("--config", sim.config_path, "simulation config JSON")
            ->required();
        c_sim->add_option("--out", sim.out_dir, "trace output directory")->required();
        c_sim->add_option("--seed", sim.seed, "root seed");
        c_sim->add_option("--jobs", sim.jobs, "parallel simulations")
            ->check(CLI::PositiveNumber);

        DatasetArgs ds;
        CLI::App* c_ds = app.add_subcommand("dataset", "build labeled datasets");
        c_ds->add_option("--traces", ds.traces_dir, "simulate output directory")
            ->required();
        c_ds->add_option("--out", ds.out_dir, "dataset output directory")->required();
        c_ds->add_option("--shots", ds.shots, "per-class shot sizes");
        CLI::Option* ds_seed =
            c_ds->add_option("--seed", ds.seed, "override the inherited root seed");

        TrainArgs tr;
        CLI::App* c_tr = app.add_subcommand("train", "train and score one plan");
        c_tr->add_option("--plan", tr.plan_path, "experiment plan JSON")->required();
        c_tr->add_option("--data", tr.dataset_dir, "dataset directory")->required();
        c_tr->add_option("--out", tr.out_dir, "run output directory")->required();

        TuneArgs tu;
        CLI::App* c_tu = app.add_subcommand("tune", "search the learning rate");
        c_tu->add_option("--plan", tu.plan_path, "experiment plan JSON")->required();
        c_tu->add_option("--data", tu.dataset_dir, "dataset directory")->required();
        c_tu->add_option("--out", tu.out_dir, "search output directory")->required();
        c_tu->add_option("--space", tu.space_path, "search space JSON");
        c_tu->add_option("--budget", tu.budget, "full resource per trial");
        c_tu->add_option("--eta", tu.eta, "halving factor");

        CostArgs co;
        CLI::App* c_co = app.add_subcommand("cost", "print the communication cost");
        c_co->add_option("--nodes", co.nodes, "participating clients")->required();
        c_co->add_option("--weights", co.weights, "parameters per model");
        c_co->add_option("--model", co.model, "model name resolving the weight count");
        c_co->add_option("--rounds", co.rounds, "communication rounds")->required();
        c_co->add_option("--bytes", co.bytes_per_weight, "bytes per weight");

        ReportArgs re;
        CLI::App* c_re = app.add_subcommand("report", "merge run reports");
        c_re->add_option("--run", re.run_dirs, "train output directory; repeatable")
            ->required();
        c_re->add_option("--out", re.out_dir, "merged report directory")->required();

        std::vector<std::string> full;
        full.reserve(args.size() + 1);
        full.push_back("fanetlab");
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        argv.reserve(full.size());
        for (const std::string& a : full) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            return app.exit(e);
        }

        ds.seed_given = ds_seed->count() > 0;
        if (c_sim->parsed()) cmd_simulate(sim);
        if (c_ds->parsed()) cmd_dataset(ds);
        if (c_tr->parsed()) cmd_train(tr);
        if (c_tu->parsed()) cmd_tune(tu);
        if (c_co->parsed()) cmd_cost(co);
        if (c_re->parsed()) cmd_report(re);
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: io: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 4;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace fanet
