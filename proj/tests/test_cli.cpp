#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fanet/cli.hpp"
#include "fanet/dataset.hpp"
#include "fanet/errors.hpp"
#include "fanet/eval.hpp"
#include "fanet/nn.hpp"
#include "fanet/textio.hpp"

using namespace fanet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    std::string path;
    explicit TempDir(const std::string& name) : path("/tmp/fanet_cli_" + name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const { return path + "/" + name; }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string file_text(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> file_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

// four slow-moving UAVs in a small box stay mostly connected, and a single
// traffic pair leaves two nodes eligible to host the attacker
std::string tiny_config(int topologies, const std::string& attacks,
                        const std::string& ratios, int node_count = 4,
                        double duration_s = 200.0, int connections = 1) {
    std::ostringstream os;
    os << "{\n  \"sim\": {\"node_count\": " << node_count << ", \"duration_s\": "
       << duration_s << ", \"traffic_connections\": " << connections
       << ", \"area_m\": [600, 600, 100], \"tx_range_m\": 300, \"avg_speed_mps\": 20},\n"
       << "  \"grid\": {\"topologies\": " << topologies;
    if (!attacks.empty()) os << ", \"attacks\": " << attacks;
    if (!ratios.empty()) os << ", \"ratios\": " << ratios;
    os << "}\n}\n";
    return os.str();
}

void run_tiny_pipeline(const TempDir& d, std::uint64_t seed,
                       const std::vector<int>& shots) {
    write_file(d.sub("config.json"), tiny_config(1, "[\"sinkhole\"]", "[0.25]"));
    SimulateArgs sim{d.sub("config.json"), d.sub("traces"), seed, 1};
    REQUIRE(cmd_simulate(sim));
    DatasetArgs ds;
    ds.traces_dir = d.sub("traces");
    ds.out_dir = d.sub("data");
    ds.shots = shots;
    REQUIRE(cmd_dataset(ds));
}

std::string plan_json(const std::string& variant, const std::string& extra) {
    return "{\"variant\": \"" + variant +
           "\", \"model\": \"cnn\", \"attack\": \"sinkhole\", \"ratio\": 0.25" + extra +
           "}\n";
}

}  // namespace

TEST_CASE("simulate writes a digest manifest and reruns become no-ops") {
    TempDir d("simulate");
    write_file(d.sub("config.json"), tiny_config(1, "[\"sinkhole\"]", "[0.25]"));
    SimulateArgs args{d.sub("config.json"), d.sub("out"), 7, 1};

    CHECK(cmd_simulate(args));
    CHECK(fs::exists(d.sub("out/t0_none_0.csv")));
    CHECK(fs::exists(d.sub("out/t0_sinkhole_25.csv")));

    nlohmann::json m = nlohmann::json::parse(file_text(d.sub("out/manifest.json")));
    CHECK(m.at("tool_version") == kToolVersion);
    CHECK(m.at("stage") == "simulate");
    CHECK(m.at("seed") == 7);
    CHECK(m.at("topologies") == 1);
    REQUIRE(m.at("runs").size() == 2);
    CHECK(m["runs"][0].at("file") == "t0_none_0.csv");
    CHECK(m["runs"][0].at("attack") == "none");
    CHECK(m["runs"][1].at("attack") == "sinkhole");
    CHECK(m["runs"][1].at("ratio") == 0.25);
    CHECK(m["runs"][1].at("digest").get<std::string>().size() == 16);
    // both variants of one topology replay the same flights
    CHECK(m["runs"][0].at("sim_seed") == m["runs"][1].at("sim_seed"));

    std::string manifest_before = file_text(d.sub("out/manifest.json"));
    CHECK_FALSE(cmd_simulate(args));
    CHECK(file_text(d.sub("out/manifest.json")) == manifest_before);

    // a corrupted trace invalidates the stage and a rerun restores it
    {
        std::ofstream patch(d.sub("out/t0_none_0.csv"), std::ios::app);
        patch << "tampered\n";
    }
    CHECK(cmd_simulate(args));
    CHECK(file_text(d.sub("out/manifest.json")) == manifest_before);

    // a reworded config changes the digest, so the stage runs again
    write_file(d.sub("config.json"),
               tiny_config(1, "[\"sinkhole\"]", "[0.25]") + "\n");
    CHECK(cmd_simulate(args));

    // a different root seed is a different experiment
    SimulateArgs other = args;
    other.seed = 8;
    CHECK(cmd_simulate(other));
    nlohmann::json m2 = nlohmann::json::parse(file_text(d.sub("out/manifest.json")));
    CHECK(m2.at("runs")[0].at("sim_seed") != m.at("runs")[0].at("sim_seed"));
}

TEST_CASE("the simulation grid crosses topologies, attacks, and ratios") {
    TempDir d("grid");
    // defaults: three attacks at five ratios plus the clean twin per topology
    write_file(d.sub("config.json"), tiny_config(2, "", "", 20, 10.0, 5));
    SimulateArgs args{d.sub("config.json"), d.sub("out"), 3, 4};
    REQUIRE(cmd_simulate(args));

    nlohmann::json m = nlohmann::json::parse(file_text(d.sub("out/manifest.json")));
    REQUIRE(m.at("runs").size() == 32);  // 2 x (1 + 3 attacks x 5 ratios)
    std::set<std::string> files;
    for (const auto& e : m.at("runs")) {
        files.insert(e.at("file").get<std::string>());
        CHECK(fs::exists(d.sub("out/" + e.at("file").get<std::string>())));
    }
    CHECK(files.size() == 32);
    CHECK(files.count("t1_flooding_15.csv") == 1);
    CHECK(files.count("t0_blackhole_5.csv") == 1);
}

TEST_CASE("worker count changes nothing about the simulated bytes") {
    TempDir d("jobs");
    write_file(d.sub("config.json"),
               tiny_config(2, "[\"sinkhole\", \"flooding\"]", "[0.25]", 4, 100.0));
    SimulateArgs serial{d.sub("config.json"), d.sub("one"), 5, 1};
    SimulateArgs parallel{d.sub("config.json"), d.sub("four"), 5, 4};
    REQUIRE(cmd_simulate(serial));
    REQUIRE(cmd_simulate(parallel));

    nlohmann::json m = nlohmann::json::parse(file_text(d.sub("one/manifest.json")));
    REQUIRE(m.at("runs").size() == 6);
    for (const auto& e : m.at("runs")) {
        std::string name = e.at("file").get<std::string>();
        CHECK(file_text(d.sub("one/" + name)) == file_text(d.sub("four/" + name)));
    }
    CHECK(file_text(d.sub("one/manifest.json")) == file_text(d.sub("four/manifest.json")));
}

TEST_CASE("dataset pairs each attack with its clean twin and nests the shots") {
    TempDir d("dataset");
    run_tiny_pipeline(d, 11, {4, 2});

    const std::string combo = d.sub("data/sinkhole_25");
    REQUIRE(fs::exists(combo + "/full.csv"));
    REQUIRE(fs::exists(combo + "/shot4.csv"));
    REQUIRE(fs::exists(combo + "/shot2.csv"));

    // 40 windows per class per UAV at full rate, 4 decimated, shots below that
    std::vector<Sample> full = import_samples_csv(combo + "/full.csv");
    CHECK(full.size() == 4 * 2 * 40);
    std::vector<Sample> four = import_samples_csv(combo + "/shot4.csv");
    CHECK(four.size() == 4 * 2 * 4);
    std::vector<Sample> two = import_samples_csv(combo + "/shot2.csv");
    CHECK(two.size() == 4 * 2 * 2);

    // the smaller draw is contained in the larger one per node and class
    auto keys = [](const std::vector<Sample>& v) {
        std::set<std::tuple<int, int, double>> s;
        for (const Sample& x : v) s.insert({x.node_id, x.label, x.window_start_s});
        return s;
    };
    auto k2 = keys(two);
    auto k4 = keys(four);
    for (const auto& k : k2) CHECK(k4.count(k) == 1);

    nlohmann::json m = nlohmann::json::parse(file_text(d.sub("data/manifest.json")));
    CHECK(m.at("stage") == "dataset");
    CHECK(m.at("seed") == 11);  // inherited from the traces manifest
    CHECK(m.at("shots") == std::vector<int>{4, 2});
    CHECK(m.at("runs").size() == 3);

    DatasetArgs again;
    again.traces_dir = d.sub("traces");
    again.out_dir = d.sub("data");
    again.shots = {4, 2};
    CHECK_FALSE(cmd_dataset(again));

    again.out_dir = d.sub("data_reseeded");
    again.seed = 999;
    again.seed_given = true;
    CHECK(cmd_dataset(again));
    nlohmann::json m2 = nlohmann::json::parse(file_text(d.sub("data_reseeded/manifest.json")));
    CHECK(m2.at("seed") == 999);

    // an oversized shot cannot be drawn from a 4-window pool
    again.out_dir = d.sub("data_big");
    again.seed_given = false;
    again.shots = {9};
    CHECK_THROWS_AS(cmd_dataset(again), ConfigError);

    // drop the clean twin from the manifest and the pairing must fail loudly
    nlohmann::json traces =
        nlohmann::json::parse(file_text(d.sub("traces/manifest.json")));
    nlohmann::json kept = nlohmann::json::array();
    for (const auto& e : traces.at("runs"))
        if (e.at("attack") != "none") kept.push_back(e);
    traces["runs"] = kept;
    write_file(d.sub("traces/manifest.json"), traces.dump(2) + "\n");
    DatasetArgs broken;
    broken.traces_dir = d.sub("traces");
    broken.out_dir = d.sub("data_broken");
    broken.shots = {2};
    try {
        cmd_dataset(broken);
        FAIL("missing twin went unnoticed");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("topology 0") != std::string::npos);
        CHECK(std::string(e.what()).find("attack-free twin") != std::string::npos);
    }
}

TEST_CASE("train writes per-seed rows, checkpoints, and identical reruns") {
    TempDir d("train");
    run_tiny_pipeline(d, 21, {4, 2});
    write_file(d.sub("plan.json"),
               plan_json("fewshot", ", \"shot\": 2, \"rounds\": 3, \"learning_rate\": 0.01,"
                                    " \"batch_size\": 2, \"seeds\": [1, 2]"));

    TrainArgs args{d.sub("plan.json"), d.sub("data"), d.sub("run")};
    cmd_train(args);

    std::vector<std::string> lines = file_lines(d.sub("run/report.csv"));
    REQUIRE(lines.size() == 4);  // header, two seeds, one mean row
    CHECK(split_csv(lines[3])[9] == "mean");
    CHECK(fs::exists(d.sub("run/model_seed1.txt")));
    CHECK(fs::exists(d.sub("run/model_seed2.txt")));
    CHECK(fs::exists(d.sub("run/summary.txt")));
    CHECK(fs::exists(d.sub("run/timings.txt")));
    CHECK(load_weights(d.sub("run/model_seed1.txt")).kind == ArchKind::Cnn);

    std::vector<ExperimentRecord> recs = read_report_csv(d.sub("run/report.csv"));
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].variant == "fewshot");
    CHECK(recs[0].model == "cnn");
    CHECK(recs[0].shot == 2);
    CHECK(recs[0].rounds == 3);
    CHECK(recs[0].topologies == 1);
    CHECK(recs[0].nodes == 4);
    CHECK(recs[0].comm_rounds == 3);
    CHECK(recs[0].bytes_per_weight == 8);
    CHECK(recs[0].weights_per_model == static_cast<long>(arch_param_count(ArchKind::Cnn)));
    CHECK(recs[0].seed == 1);
    CHECK(recs[1].seed == 2);
    CHECK(recs[0].wall_seconds == 0.0);
    // one shot-2 client split leaves one test row per class per UAV
    CHECK(recs[0].cm.total() == 4 * 2);

    TrainArgs again{d.sub("plan.json"), d.sub("data"), d.sub("run_again")};
    cmd_train(again);
    CHECK(file_text(d.sub("run_again/report.csv")) == file_text(d.sub("run/report.csv")));
    CHECK(file_text(d.sub("run_again/summary.txt")) == file_text(d.sub("run/summary.txt")));
    CHECK(file_text(d.sub("run_again/model_seed1.txt")) ==
          file_text(d.sub("run/model_seed1.txt")));
}

TEST_CASE("each training variant resolves its own data and artifacts") {
    TempDir d("variants");
    run_tiny_pipeline(d, 31, {4, 2});

    write_file(d.sub("fl.json"), plan_json("federated", ", \"rounds\": 2, \"seeds\": [5]"));
    TrainArgs fl{d.sub("fl.json"), d.sub("data"), d.sub("run_fl")};
    cmd_train(fl);
    std::vector<ExperimentRecord> fl_recs = read_report_csv(d.sub("run_fl/report.csv"));
    REQUIRE(fl_recs.size() == 1);
    CHECK(fl_recs[0].shot == 0);  // trains on the full 5 s stream
    CHECK(fl_recs[0].nodes == 4);
    CHECK(fl_recs[0].comm_rounds == 2);
    // full rate: 40 per class, 8 test rows per class per UAV after the split
    CHECK(fl_recs[0].cm.total() == 4 * 2 * 8);

    write_file(d.sub("local.json"), plan_json("local", ", \"rounds\": 2, \"seeds\": [5]"));
    TrainArgs lo{d.sub("local.json"), d.sub("data"), d.sub("run_local")};
    cmd_train(lo);
    std::vector<std::string> breakdown = file_lines(d.sub("run_local/clients_seed5.csv"));
    REQUIRE(breakdown.size() == 5);  // header plus one row per UAV
    CHECK(breakdown[0] == "uav_id,tp,fp,tn,fn,accuracy");
    CHECK(fs::exists(d.sub("run_local/models_seed5/client_1.txt")));
    CHECK(fs::exists(d.sub("run_local/models_seed5/client_4.txt")));
    std::vector<ExperimentRecord> lo_recs = read_report_csv(d.sub("run_local/report.csv"));
    REQUIRE(lo_recs.size() == 1);
    CHECK(lo_recs[0].nodes == 0);
    // four isolated models each scored on the same 64-row pooled test set
    CHECK(lo_recs[0].cm.total() == 4 * 4 * 2 * 8);

    write_file(d.sub("central.json"),
               plan_json("centralized", ", \"shot\": 4, \"rounds\": 2, \"seeds\": [5]"));
    TrainArgs ce{d.sub("central.json"), d.sub("data"), d.sub("run_central")};
    cmd_train(ce);
    std::vector<std::string> lines = file_lines(d.sub("run_central/report.csv"));
    REQUIRE(lines.size() == 2);
    CHECK(split_csv(lines[1])[24] == "na");  // nothing crossed the network
    CHECK(fs::exists(d.sub("run_central/model_seed5.txt")));

    // a plan whose shot file was never generated is a configuration error
    write_file(d.sub("missing.json"),
               plan_json("fewshot", ", \"shot\": 3, \"seeds\": [5]"));
    TrainArgs missing{d.sub("missing.json"), d.sub("data"), d.sub("run_missing")};
    CHECK_THROWS_AS(cmd_train(missing), ConfigError);
}

TEST_CASE("tune writes a ledger matching the closed-form schedule") {
    TempDir d("tune");
    run_tiny_pipeline(d, 41, {4, 2});
    write_file(d.sub("plan.json"),
               plan_json("fewshot", ", \"shot\": 4, \"rounds\": 3, \"seeds\": [3]"));

    TuneArgs args;
    args.plan_path = d.sub("plan.json");
    args.dataset_dir = d.sub("data");
    args.out_dir = d.sub("search");
    args.budget = 3;
    args.eta = 3;
    cmd_tune(args);

    // budget 3 at eta 3: brackets of 3 and 1 configs, five scored rows
    std::vector<std::string> ledger = file_lines(d.sub("search/ledger.csv"));
    REQUIRE(ledger.size() == 6);
    nlohmann::json best = nlohmann::json::parse(file_text(d.sub("search/best.json")));
    CHECK(best.at("budget") == 3);
    CHECK(best.at("brackets") == 2);
    CHECK(best.at("total_resource") == 9);
    double lr = best.at("learning_rate").get<double>();
    CHECK(lr >= 0.001);
    CHECK(lr <= 0.01);
    double score = best.at("score").get<double>();
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);

    TuneArgs again = args;
    again.out_dir = d.sub("search_again");
    cmd_tune(again);
    CHECK(file_text(d.sub("search_again/ledger.csv")) ==
          file_text(d.sub("search/ledger.csv")));
    CHECK(file_text(d.sub("search_again/best.json")) == file_text(d.sub("search/best.json")));

    // a custom space narrows the sampled band
    write_file(d.sub("space.json"),
               "{\"learning_rate_lo\": 0.004, \"learning_rate_hi\": 0.005}\n");
    TuneArgs spaced = args;
    spaced.out_dir = d.sub("search_spaced");
    spaced.space_path = d.sub("space.json");
    cmd_tune(spaced);
    nlohmann::json narrow = nlohmann::json::parse(file_text(d.sub("search_spaced/best.json")));
    double nlr = narrow.at("learning_rate").get<double>();
    CHECK(nlr >= 0.004);
    CHECK(nlr <= 0.005);

    write_file(d.sub("bad_space.json"), "{\"learning_rate_lo\": 0.0}\n");
    TuneArgs bad = args;
    bad.space_path = d.sub("bad_space.json");
    CHECK_THROWS_AS(cmd_tune(bad), ConfigError);
}

TEST_CASE("report pools runs and regroups their seeds") {
    TempDir d("report");
    run_tiny_pipeline(d, 51, {4, 2});
    write_file(d.sub("fs.json"),
               plan_json("fewshot", ", \"shot\": 2, \"rounds\": 2, \"seeds\": [1, 2]"));
    write_file(d.sub("fl.json"), plan_json("federated", ", \"rounds\": 2, \"seeds\": [1]"));
    cmd_train({d.sub("fs.json"), d.sub("data"), d.sub("run_fs")});
    cmd_train({d.sub("fl.json"), d.sub("data"), d.sub("run_fl")});

    ReportArgs args;
    args.run_dirs = {d.sub("run_fs"), d.sub("run_fl")};
    args.out_dir = d.sub("merged");
    CHECK(cmd_report(args) == 3);

    std::vector<std::string> lines = file_lines(d.sub("merged/report.csv"));
    REQUIRE(lines.size() == 5);  // header, 2 fewshot seeds, their mean, 1 federated
    CHECK(split_csv(lines[3])[9] == "mean");
    std::string summary = file_text(d.sub("merged/summary.txt"));
    CHECK(summary.find("fewshot") != std::string::npos);
    CHECK(summary.find("federated") != std::string::npos);

    ReportArgs none;
    none.out_dir = d.sub("empty");
    CHECK_THROWS_AS(cmd_report(none), ConfigError);
}

TEST_CASE("the command line maps failure classes to distinct exit codes") {
    TempDir d("exitcodes");
    CHECK(run_cli({"simulate", "--config", d.sub("absent.json"), "--out", d.sub("o")}) == 3);

    write_file(d.sub("broken.json"), "{not json");
    CHECK(run_cli({"simulate", "--config", d.sub("broken.json"), "--out", d.sub("o")}) == 2);

    write_file(d.sub("unknown_key.json"), "{\"sim\": {\"warp_factor\": 9}}");
    CHECK(run_cli({"simulate", "--config", d.sub("unknown_key.json"), "--out", d.sub("o")}) ==
          2);

    CHECK(run_cli({"frobnicate"}) != 0);
    CHECK(run_cli({"simulate", "--config"}) != 0);  // missing value
    CHECK(run_cli({}) != 0);                        // a subcommand is required

    CHECK(run_cli({"cost", "--nodes", "50", "--model", "cnn", "--rounds", "10"}) == 0);
    CHECK(run_cli({"cost", "--nodes", "-3", "--weights", "10", "--rounds", "1"}) == 2);
    CHECK(run_cli({"cost", "--nodes", "1", "--weights", "7", "--model", "cnn",
                   "--rounds", "1"}) == 2);

    write_file(d.sub("plan.json"), "{\"variant\": \"fewshot\", \"model\": \"cnn\","
                                   " \"attack\": \"sinkhole\", \"ratio\": 0.25,"
                                   " \"surprise\": true}");
    CHECK(run_cli({"train", "--plan", d.sub("plan.json"), "--data", d.sub("nowhere"),
                   "--out", d.sub("o")}) == 2);
}

TEST_CASE("the cost command prints the exact product") {
    CHECK(cmd_cost({50, 0, "cnn", 10, 8}) ==
          50ull * arch_param_count(ArchKind::Cnn) * 10ull * 8ull);
    CHECK(cmd_cost({50, 0, "dnn", 100, 8}) ==
          50ull * arch_param_count(ArchKind::Mlp) * 100ull * 8ull);
    // cutting the rounds tenfold cuts the bytes tenfold
    CHECK(10 * cmd_cost({50, 0, "cnn", 10, 8}) == cmd_cost({50, 0, "cnn", 100, 8}));
    CHECK(cmd_cost({20, 441, "", 10, 8}) == 20ull * 441 * 10 * 8);
    CHECK_THROWS_AS(cmd_cost({0, 441, "", 10, 8}), ConfigError);
    CHECK_THROWS_AS(cmd_cost({20, 0, "", 10, 8}), ConfigError);
}
