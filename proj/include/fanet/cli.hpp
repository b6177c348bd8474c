// Pipeline subcommands: simulate -> dataset -> train/tune -> cost/report.
// Each command is a plain function over an argument struct so tests can
// drive the pipeline without a process boundary; run_cli owns flag parsing.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fanet {

inline constexpr const char* kToolVersion = "0.1.0";

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct DatasetArgs {
    std::string traces_dir;
    std::string out_dir;
    std::vector<int> shots{36, 20, 10};
    std::uint64_t seed = 0;
    bool seed_given = false;  // otherwise the traces manifest seed carries over
};

struct TrainArgs {
    std::string plan_path;
    std::string dataset_dir;
    std::string out_dir;
};

struct TuneArgs {
    std::string plan_path;
    std::string dataset_dir;
    std::string out_dir;
    std::string space_path;  // empty: built-in search space
    long budget = 0;         // 0: the plan variant's default rounds
    long eta = 3;
};

struct CostArgs {
    long nodes = 0;
    long weights = 0;     // 0 with a model name: resolved from the model
    std::string model;    // optional; cross-checked against weights when both given
    long rounds = 0;
    long bytes_per_weight = 8;
};

struct ReportArgs {
    std::vector<std::string> run_dirs;
    std::string out_dir;
};

// false: outputs already matched the manifest, nothing was rerun
bool cmd_simulate(const SimulateArgs& args);
bool cmd_dataset(const DatasetArgs& args);

void cmd_train(const TrainArgs& args);
void cmd_tune(const TuneArgs& args);
std::uint64_t cmd_cost(const CostArgs& args);
std::size_t cmd_report(const ReportArgs& args);

// maps ConfigError to 2, IoError to 3, anything else to 4
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace fanet
